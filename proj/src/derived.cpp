#include "pta/derived.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "pta/error.hpp"

namespace pta {

namespace {

std::vector<uint32_t> unique_succ(const std::vector<uint32_t> &s) {
  std::vector<uint32_t> out = s;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <class E>
void sort_unique(std::vector<E> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

uint32_t function_size(const PointerModule &m, uint32_t f) {
  uint32_t n = 0;
  for (const auto &b : m.functions[f].blocks) n += static_cast<uint32_t>(b.instrs.size());
  return n;
}

std::string node_label(const PointerModule &m, InstrId id) {
  const Instruction &in = m.instr(id);
  std::string s = m.instr_name(id) + "\\n";
  if (!in.dest.empty()) s += "%" + in.dest + " = ";
  s += opcode_name(in.op);
  return s;
}

}  // namespace

//===----------------------------------------------------------------------===//
// ICFG
//===----------------------------------------------------------------------===//

const char *to_string(ICFG::EdgeKind k) {
  switch (k) {
    case ICFG::EdgeKind::Intra: return "intra";
    case ICFG::EdgeKind::Call: return "call";
    case ICFG::EdgeKind::Return: return "return";
  }
  return "?";
}

ICFG build_icfg(const AnalysisResult &r) {
  const PointerModule &m = r.module();
  const CallGraph &cg = r.call_graph();
  ICFG g;
  auto entry = m.entry_index();
  if (!entry) return g;
  std::vector<bool> seen(m.functions.size(), false);
  std::deque<uint32_t> work{*entry};
  seen[*entry] = true;
  while (!work.empty()) {
    uint32_t f = work.front();
    work.pop_front();
    g.functions.push_back(f);
    CFG cfg = build_cfg(m, f);
    for (uint32_t i = 0; i < cfg.size(); ++i) {
      const InstrId id = cfg.first + i;
      g.nodes.push_back(id);
      for (uint32_t s : cfg.succ[i]) g.edges.push_back({id, cfg.first + s, ICFG::EdgeKind::Intra});
      if (!m.instr(id).is_call()) continue;
      auto it = cg.find(id);
      if (it == cg.end()) continue;
      for (uint32_t callee : it->second) {
        auto callee_entry = m.entry_instr(callee);
        if (!callee_entry) continue;
        g.edges.push_back({id, *callee_entry, ICFG::EdgeKind::Call});
        const uint32_t n = function_size(m, callee);
        for (uint32_t j = 0; j < n; ++j)
          if (m.instr(*callee_entry + j).op == Opcode::Ret)
            for (uint32_t s : cfg.succ[i]) g.edges.push_back({*callee_entry + j, cfg.first + s, ICFG::EdgeKind::Return});
        if (!seen[callee]) {
          seen[callee] = true;
          work.push_back(callee);
        }
      }
    }
  }
  std::sort(g.functions.begin(), g.functions.end());
  std::sort(g.nodes.begin(), g.nodes.end());
  sort_unique(g.edges);
  return g;
}

std::string ICFG::dot(const PointerModule &m) const {
  std::string s = "digraph icfg {\n";
  for (InstrId n : nodes) s += "  n" + std::to_string(n) + " [label=\"" + node_label(m, n) + "\"];\n";
  for (const auto &e : edges)
    s += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) + " [label=\"" + to_string(e.kind) + "\"];\n";
  return s + "}\n";
}

//===----------------------------------------------------------------------===//
// Dominance
//===----------------------------------------------------------------------===//

std::vector<uint32_t> dominators(const std::vector<std::vector<uint32_t>> &succ, uint32_t root) {
  const uint32_t n = static_cast<uint32_t>(succ.size());
  std::vector<std::vector<uint32_t>> pred(n);
  for (uint32_t a = 0; a < n; ++a)
    for (uint32_t b : succ[a]) pred[b].push_back(a);
  // Reverse postorder from the root.
  std::vector<uint32_t> post, rpo_index(n, kNone);
  std::vector<bool> visited(n, false);
  std::vector<std::pair<uint32_t, size_t>> stack{{root, 0}};
  visited[root] = true;
  while (!stack.empty()) {
    auto &[v, i] = stack.back();
    if (i < succ[v].size()) {
      uint32_t s = succ[v][i++];
      if (!visited[s]) {
        visited[s] = true;
        stack.push_back({s, 0});
      }
    } else {
      post.push_back(v);
      stack.pop_back();
    }
  }
  std::vector<uint32_t> rpo(post.rbegin(), post.rend());
  for (uint32_t i = 0; i < rpo.size(); ++i) rpo_index[rpo[i]] = i;
  std::vector<uint32_t> idom(n, kNone);
  idom[root] = root;
  auto intersect = [&](uint32_t a, uint32_t b) {
    while (a != b) {
      while (rpo_index[a] > rpo_index[b]) a = idom[a];
      while (rpo_index[b] > rpo_index[a]) b = idom[b];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (uint32_t i = 1; i < rpo.size(); ++i) {
      uint32_t b = rpo[i];
      uint32_t next = kNone;
      for (uint32_t p : pred[b]) {
        if (idom[p] == kNone) continue;
        next = next == kNone ? p : intersect(p, next);
      }
      if (next != idom[b]) {
        idom[b] = next;
        changed = true;
      }
    }
  }
  idom[root] = kNone;
  return idom;
}

std::vector<std::pair<uint32_t, uint32_t>> control_dependences(const std::vector<std::vector<uint32_t>> &succ) {
  const uint32_t n = static_cast<uint32_t>(succ.size());
  const uint32_t exit = n;
  std::vector<std::vector<uint32_t>> rsucc(n + 1);
  for (uint32_t a = 0; a < n; ++a) {
    if (succ[a].empty()) rsucc[exit].push_back(a);
    for (uint32_t b : succ[a]) rsucc[b].push_back(a);
  }
  // Nodes that never reach an exit (infinite loops) get an artificial edge.
  std::vector<bool> reaches(n + 1, false);
  std::deque<uint32_t> work{exit};
  reaches[exit] = true;
  while (!work.empty()) {
    uint32_t v = work.front();
    work.pop_front();
    for (uint32_t p : rsucc[v])
      if (!reaches[p]) reaches[p] = true, work.push_back(p);
  }
  for (uint32_t a = 0; a < n; ++a)
    if (!reaches[a]) rsucc[exit].push_back(a);
  std::vector<uint32_t> ipdom = dominators(rsucc, exit);

  std::vector<std::pair<uint32_t, uint32_t>> out;
  for (uint32_t a = 0; a < n; ++a) {
    std::vector<uint32_t> ss = unique_succ(succ[a]);
    if (ss.size() < 2) continue;
    for (uint32_t s : ss) {
      for (uint32_t runner = s; runner != ipdom[a] && runner != exit && runner != kNone; runner = ipdom[runner])
        out.emplace_back(a, runner);
    }
  }
  sort_unique(out);
  return out;
}

//===----------------------------------------------------------------------===//
// MemorySSA
//===----------------------------------------------------------------------===//

std::string MemorySSAForm::def_name(uint32_t d) const {
  const MemoryDef &def = defs[d];
  const PointerModule &m = table->module();
  std::string s = table->object_name(def.object) + "_" + std::to_string(def.version);
  switch (def.kind) {
    case MemoryDef::Kind::Initial: return s + " = initial(@" + m.functions[def.function].name + ")";
    case MemoryDef::Kind::Chi: return s + " = chi(" + m.instr_name(def.instr) + ")";
    case MemoryDef::Kind::Phi: return s + " = phi(" + m.instr_name(def.instr) + ")";
  }
  return s;
}

namespace {

class SsaBuilder {
 public:
  SsaBuilder(const AnalysisResult &r, MemorySSAForm &out) : r_(r), m_(r.module()), out_(out) {}

  void build(uint32_t f) {
    const CFG cfg = build_cfg(m_, f);
    const uint32_t n = static_cast<uint32_t>(cfg.size());
    if (n == 0) return;
    const uint32_t V = n;
    std::vector<std::vector<uint32_t>> succ(n + 1), preds(n + 1);
    succ[V] = {0};
    preds[0].push_back(V);
    for (uint32_t i = 0; i < n; ++i) {
      succ[i] = unique_succ(cfg.succ[i]);
      for (uint32_t s : succ[i]) preds[s].push_back(i);
    }
    std::vector<uint32_t> idom = dominators(succ, V);
    std::vector<std::vector<uint32_t>> children(n + 1);
    for (uint32_t i = 0; i < n; ++i)
      if (idom[i] != kNone) children[idom[i]].push_back(i);
    std::vector<std::set<uint32_t>> df(n + 1);
    for (uint32_t b = 0; b < n; ++b) {
      if (preds[b].size() < 2 || idom[b] == kNone) continue;
      for (uint32_t p : preds[b]) {
        if (p != V && idom[p] == kNone) continue;
        for (uint32_t runner = p; runner != idom[b]; runner = idom[runner]) df[runner].insert(b);
      }
    }

    // Annotations per node.
    std::vector<std::vector<uint32_t>> mus(n), chis(n);
    std::set<uint32_t> objects;
    std::map<uint32_t, std::vector<uint32_t>> def_sites;
    for (uint32_t i = 0; i < n; ++i) {
      const InstrId id = cfg.first + i;
      const Instruction &in = m_.instr(id);
      const ModRef &mr = r_.mod_ref(id);
      if (in.op == Opcode::Load || in.is_call()) mus[i] = mr.reads;
      if (in.op == Opcode::Store || in.is_call()) chis[i] = mr.writes;
      objects.insert(mus[i].begin(), mus[i].end());
      objects.insert(chis[i].begin(), chis[i].end());
      for (uint32_t o : chis[i]) def_sites[o].push_back(i);
    }

    std::map<uint32_t, uint32_t> next_version;
    std::map<uint32_t, std::vector<uint32_t>> stacks;
    for (uint32_t o : objects) {
      MemoryDef d;
      d.kind = MemoryDef::Kind::Initial;
      d.function = f;
      d.object = o;
      d.version = next_version[o]++;
      d.instr = cfg.first;
      uint32_t id = add(std::move(d));
      out_.initial[{f, o}] = id;
      stacks[o].push_back(id);
    }

    // Phi placement at iterated dominance frontiers.
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> phis(n + 1);  // node -> (object, def)
    for (const auto &[o, sites] : def_sites) {
      std::vector<bool> has_phi(n + 1, false), queued(n + 1, false);
      std::deque<uint32_t> work(sites.begin(), sites.end());
      for (uint32_t s : sites) queued[s] = true;
      while (!work.empty()) {
        uint32_t x = work.front();
        work.pop_front();
        for (uint32_t y : df[x]) {
          if (has_phi[y]) continue;
          has_phi[y] = true;
          MemoryDef d;
          d.kind = MemoryDef::Kind::Phi;
          d.function = f;
          d.object = o;
          d.instr = cfg.first + y;
          d.incoming.assign(preds[y].size(), kNone);
          uint32_t id = add(std::move(d));
          phis[y].emplace_back(o, id);
          out_.phi[{cfg.first + y, o}] = id;
          if (!queued[y]) queued[y] = true, work.push_back(y);
        }
      }
    }

    // Renaming over the dominator tree.
    struct Item {
      uint32_t node;
      bool exit;
    };
    std::vector<Item> work{{V, false}};
    std::vector<std::vector<uint32_t>> pushed(n + 1);
    while (!work.empty()) {
      Item it = work.back();
      work.pop_back();
      const uint32_t x = it.node;
      if (it.exit) {
        for (uint32_t o : pushed[x]) stacks[o].pop_back();
        continue;
      }
      if (x != V) {
        const InstrId id = cfg.first + x;
        for (const auto &[o, d] : phis[x]) {
          out_.defs[d].version = next_version[o]++;
          stacks[o].push_back(d);
          pushed[x].push_back(o);
        }
        for (uint32_t o : mus[x]) out_.mu[{id, o}] = stacks[o].back();
        for (uint32_t o : chis[x]) {
          MemoryDef d;
          d.kind = MemoryDef::Kind::Chi;
          d.function = f;
          d.object = o;
          d.version = next_version[o]++;
          d.instr = id;
          d.incoming = {stacks[o].back()};
          uint32_t did = add(std::move(d));
          out_.chi[{id, o}] = did;
          stacks[o].push_back(did);
          pushed[x].push_back(o);
        }
      }
      for (uint32_t y : succ[x]) {
        size_t j = std::find(preds[y].begin(), preds[y].end(), x) - preds[y].begin();
        for (const auto &[o, d] : phis[y]) out_.defs[d].incoming[j] = stacks[o].back();
      }
      work.push_back({x, true});
      for (auto c = children[x].rbegin(); c != children[x].rend(); ++c) work.push_back({*c, false});
    }
    // Unreachable code (rejected by validation) falls back to the initial version.
    for (uint32_t i = 0; i < n; ++i)
      for (uint32_t o : mus[i]) out_.mu.try_emplace({cfg.first + i, o}, out_.initial[{f, o}]);
  }

 private:
  uint32_t add(MemoryDef d) {
    out_.defs.push_back(std::move(d));
    return static_cast<uint32_t>(out_.defs.size() - 1);
  }

  const AnalysisResult &r_;
  const PointerModule &m_;
  MemorySSAForm &out_;
};

}  // namespace

MemorySSAForm build_memory_ssa(const AnalysisResult &r) {
  MemorySSAForm out;
  out.table = r.global().nodes_ptr();
  SsaBuilder b(r, out);
  for (uint32_t f = 0; f < r.module().functions.size(); ++f) b.build(f);
  return out;
}

const MemoryDef &memory_def_of(const MemorySSAForm &ssa, InstrId load, uint32_t object) {
  auto it = ssa.mu.find({load, object});
  if (it == ssa.mu.end()) {
    const auto &t = *ssa.table;
    std::string what = load < t.module().instruction_count() ? t.module().instr_name(load) : std::to_string(load);
    std::string obj = object < t.objects().size() ? t.object_name(object) : std::to_string(object);
    throw AnalysisError(what + " does not read object " + obj);
  }
  return ssa.defs[it->second];
}

std::vector<InstrId> defining_instructions(const MemorySSAForm &ssa, uint32_t def) {
  std::vector<InstrId> out;
  std::set<uint32_t> seen{def};
  std::vector<uint32_t> work{def};
  while (!work.empty()) {
    const MemoryDef &d = ssa.defs[work.back()];
    work.pop_back();
    if (d.kind == MemoryDef::Kind::Chi) {
      out.push_back(d.instr);
    } else if (d.kind == MemoryDef::Kind::Phi) {
      for (uint32_t in : d.incoming)
        if (in != kNone && seen.insert(in).second) work.push_back(in);
    }
  }
  sort_unique(out);
  return out;
}

//===----------------------------------------------------------------------===//
// PDG
//===----------------------------------------------------------------------===//

const char *to_string(PDG::EdgeKind k) {
  switch (k) {
    case PDG::EdgeKind::DataLocal: return "data-local";
    case PDG::EdgeKind::DataMemory: return "data-memory";
    case PDG::EdgeKind::Control: return "control";
    case PDG::EdgeKind::Call: return "call";
    case PDG::EdgeKind::Return: return "return";
  }
  return "?";
}

namespace {

/// Local variables read by an instruction.
std::vector<uint32_t> uses_of(const PointerModule &m, uint32_t f, const Instruction &in) {
  std::vector<uint32_t> out;
  for (const auto &o : in.operands) out.push_back(*m.local_index(f, o));
  return out;
}

void reaching_definitions(const PointerModule &m, const CFG &cfg, std::vector<PDG::Edge> &edges) {
  const uint32_t n = static_cast<uint32_t>(cfg.size());
  const uint32_t f = cfg.function;
  std::vector<uint32_t> def_var;   // def index -> local
  std::vector<uint32_t> def_node;  // def index -> node
  std::vector<uint32_t> node_def(n, kNone);
  for (uint32_t i = 0; i < n; ++i) {
    const Instruction &in = m.instr(cfg.first + i);
    if (in.dest.empty()) continue;
    node_def[i] = static_cast<uint32_t>(def_var.size());
    def_var.push_back(*m.local_index(f, in.dest));
    def_node.push_back(i);
  }
  const size_t nd = def_var.size(), words = (nd + 63) / 64;
  if (nd == 0) return;
  std::vector<std::vector<uint64_t>> defs_of_var(m.locals(f).size(), std::vector<uint64_t>(words, 0));
  for (uint32_t d = 0; d < nd; ++d) defs_of_var[def_var[d]][d / 64] |= 1ull << (d % 64);

  std::vector<std::vector<uint64_t>> in(n, std::vector<uint64_t>(words, 0)), out = in;
  auto transfer = [&](uint32_t i, std::vector<uint64_t> &o) {
    o = in[i];
    if (node_def[i] == kNone) return;
    const auto &kill = defs_of_var[def_var[node_def[i]]];
    for (size_t w = 0; w < words; ++w) o[w] &= ~kill[w];
    o[node_def[i] / 64] |= 1ull << (node_def[i] % 64);
  };
  std::deque<uint32_t> work;
  std::vector<bool> queued(n, true);
  for (uint32_t i = 0; i < n; ++i) work.push_back(i);
  std::vector<uint64_t> tmp;
  while (!work.empty()) {
    uint32_t i = work.front();
    work.pop_front();
    queued[i] = false;
    transfer(i, tmp);
    if (tmp == out[i]) continue;
    out[i] = tmp;
    for (uint32_t s : cfg.succ[i]) {
      bool grew = false;
      for (size_t w = 0; w < words; ++w) {
        uint64_t v = in[s][w] | out[i][w];
        if (v != in[s][w]) in[s][w] = v, grew = true;
      }
      if (grew && !queued[s]) queued[s] = true, work.push_back(s);
    }
  }
  for (uint32_t i = 0; i < n; ++i) {
    for (uint32_t v : uses_of(m, f, m.instr(cfg.first + i))) {
      const auto &mask = defs_of_var[v];
      for (size_t w = 0; w < words; ++w) {
        uint64_t bits = in[i][w] & mask[w];
        while (bits) {
          uint32_t d = static_cast<uint32_t>(w * 64 + __builtin_ctzll(bits));
          bits &= bits - 1;
          edges.push_back({cfg.first + def_node[d], cfg.first + i, PDG::EdgeKind::DataLocal});
        }
      }
    }
  }
}

}  // namespace

PDG build_pdg(const AnalysisResult &r, const MemorySSAForm &ssa) {
  const PointerModule &m = r.module();
  PDG g;
  for (uint32_t f = 0; f < m.functions.size(); ++f) {
    CFG cfg = build_cfg(m, f);
    for (uint32_t i = 0; i < cfg.size(); ++i) g.nodes.push_back(cfg.first + i);
    reaching_definitions(m, cfg, g.edges);
    for (const auto &[a, b] : control_dependences(cfg.succ))
      g.edges.push_back({cfg.first + a, cfg.first + b, PDG::EdgeKind::Control});
  }
  for (const auto &[key, def] : ssa.mu)
    for (InstrId d : defining_instructions(ssa, def))
      if (d != key.first) g.edges.push_back({d, key.first, PDG::EdgeKind::DataMemory});
  for (const auto &[key, def] : ssa.chi)
    for (InstrId d : defining_instructions(ssa, ssa.defs[def].incoming[0]))
      if (d != key.first) g.edges.push_back({d, key.first, PDG::EdgeKind::DataMemory});
  for (const auto &[site, targets] : r.call_graph()) {
    for (uint32_t callee : targets) {
      auto entry = m.entry_instr(callee);
      if (!entry) continue;
      g.edges.push_back({site, *entry, PDG::EdgeKind::Call});
      const uint32_t n = function_size(m, callee);
      for (uint32_t j = 0; j < n; ++j)
        if (m.instr(*entry + j).op == Opcode::Ret) g.edges.push_back({*entry + j, site, PDG::EdgeKind::Return});
    }
  }
  std::sort(g.nodes.begin(), g.nodes.end());
  sort_unique(g.edges);
  return g;
}

std::string PDG::dot(const PointerModule &m) const {
  std::string s = "digraph pdg {\n";
  for (InstrId n : nodes) s += "  n" + std::to_string(n) + " [label=\"" + node_label(m, n) + "\"];\n";
  for (const auto &e : edges)
    s += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) + " [label=\"" + to_string(e.kind) + "\"];\n";
  return s + "}\n";
}

std::vector<InstrId> slice(const PDG &g, const std::vector<InstrId> &seeds, SliceDirection dir) {
  std::map<InstrId, std::vector<InstrId>> adj;
  for (const auto &e : g.edges) {
    if (dir == SliceDirection::Backward) {
      adj[e.to].push_back(e.from);
    } else {
      adj[e.from].push_back(e.to);
    }
  }
  std::set<InstrId> seen(seeds.begin(), seeds.end());
  std::vector<InstrId> work(seeds.begin(), seeds.end());
  while (!work.empty()) {
    InstrId v = work.back();
    work.pop_back();
    auto it = adj.find(v);
    if (it == adj.end()) continue;
    for (InstrId w : it->second)
      if (seen.insert(w).second) work.push_back(w);
  }
  return {seen.begin(), seen.end()};
}

std::vector<InstrId> slice(const PDG &g, InstrId seed, SliceDirection dir) {
  return slice(g, std::vector<InstrId>{seed}, dir);
}

}  // namespace pta
