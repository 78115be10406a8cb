#include <algorithm>
#include <deque>
#include <functional>
#include <set>

#include "pta/error.hpp"
#include "pta/graph.hpp"
#include "pta/sensitivity.hpp"

namespace pta {

namespace {

using State = FlowSolution::State;

const std::vector<NodeId> kEmpty;

const std::vector<NodeId> &get(const State &s, NodeId k) {
  auto it = s.find(k);
  return it == s.end() ? kEmpty : it->second;
}

void put(State &s, NodeId k, std::vector<NodeId> v) {
  if (v.empty()) {
    s.erase(k);
  } else {
    s[k] = std::move(v);
  }
}

bool merge_into(std::vector<NodeId> &dst, const std::vector<NodeId> &src) {
  if (src.empty()) return false;
  size_t before = dst.size();
  std::vector<NodeId> u;
  u.reserve(dst.size() + src.size());
  std::set_union(dst.begin(), dst.end(), src.begin(), src.end(), std::back_inserter(u));
  if (u.size() == before) return false;
  dst = std::move(u);
  return true;
}

bool join_into(State &dst, const State &src) {
  bool changed = false;
  for (const auto &[k, v] : src) changed |= merge_into(dst[k], v);
  return changed;
}

CallGraph ci_call_graph(std::shared_ptr<const PointerModule> m) {
  SolverConfig cfg;
  cfg.cycles = CycleMode::LCD;
  cfg.strategy = Strategy::Diff;
  return solve(generate(m), cfg).call_graph();
}

std::vector<uint32_t> function_sizes(const PointerModule &m) {
  std::vector<uint32_t> out(m.functions.size(), 0);
  for (uint32_t f = 0; f < m.functions.size(); ++f)
    for (const auto &b : m.functions[f].blocks) out[f] += static_cast<uint32_t>(b.instrs.size());
  return out;
}

class FlowEngine {
 public:
  FlowEngine(std::shared_ptr<const PointerModule> m, int k, const FlowOptions &opts)
      : m_(std::move(m)), k_(k), opts_(opts), t_(build_node_table(m_)) {
    if (opts_.call_graph) {
      cg_ = *opts_.call_graph;
    } else {
      cg_ = ci_call_graph(m_);
    }
    strong_ = strong_updatable_objects(*t_, cg_);
    sizes_ = function_sizes(*m_);
    cfgs_.reserve(m_->functions.size());
    rets_.assign(m_->functions.size(), {});
    for (uint32_t f = 0; f < m_->functions.size(); ++f) {
      cfgs_.push_back(build_cfg(*m_, f));
      for (uint32_t i = 0; i < sizes_[f]; ++i)
        if (m_->instr(cfgs_[f].first + i).op == Opcode::Ret) rets_[f].push_back(i);
    }
    alloc_object_.assign(m_->instruction_count(), kNone);
    for (uint32_t o = 0; o < t_->objects().size(); ++o)
      if (t_->object(o).kind == ObjectKind::AllocSite) alloc_object_[t_->object(o).origin] = o;
  }

  FlowSolution run() {
    auto entry = m_->entry_index();
    if (entry && sizes_[*entry] > 0) {
      clone_of(*entry, 0);
      // Ahead-of-time cloning over the context-insensitive call graph.
      for (uint32_t c = 0; c < clones_.size(); ++c) {
        const uint32_t f = clones_[c].function, ctx = clones_[c].context;
        for (uint32_t i = 0; i < sizes_[f]; ++i) {
          InstrId id = cfgs_[f].first + i;
          auto it = cg_.find(id);
          if (it == cg_.end()) continue;
          for (uint32_t g : it->second) clone_of(g, contexts_.extend(ctx, id, k_));
        }
      }
      flow(0, State{});
    }
    while (!work_.empty()) {
      uint32_t pid = work_.front();
      work_.pop_front();
      queued_[pid] = false;
      if (++steps_ > opts_.max_steps)
        throw ResourceLimitError("flow-sensitive step limit exceeded (" + std::to_string(opts_.max_steps) +
                                 " steps, " + std::to_string(clones_.size()) + " clones)");
      process(pid);
    }

    FlowSolution sol;
    sol.k = k_;
    sol.contexts = contexts_;
    sol.table = t_;
    sol.clones = clones_;
    sol.clone_index = clone_index_;
    sol.in = std::move(in_);
    sol.out = std::move(out_);
    sol.reached = std::move(reached_);
    for (auto &[site, fns] : calls_) sol.calls[site].assign(fns.begin(), fns.end());
    sol.steps = steps_;
    return sol;
  }

 private:
  uint32_t clone_of(uint32_t f, uint32_t ctx) {
    auto [it, inserted] = clone_index_.emplace(std::make_pair(f, ctx), static_cast<uint32_t>(clones_.size()));
    if (!inserted) return it->second;
    if (clones_.size() >= opts_.max_clones)
      throw ResourceLimitError("context clone limit exceeded (" + std::to_string(opts_.max_clones) + " clones)");
    FlowSolution::Clone c;
    c.function = f;
    c.context = ctx;
    c.first_point = static_cast<uint32_t>(in_.size());
    clones_.push_back(c);
    in_.resize(in_.size() + sizes_[f]);
    out_.resize(in_.size());
    reached_.resize(in_.size(), false);
    queued_.resize(in_.size(), false);
    callers_.emplace_back();
    return it->second;
  }

  void push(uint32_t pid) {
    if (queued_[pid]) return;
    queued_[pid] = true;
    work_.push_back(pid);
  }

  void flow(uint32_t pid, const State &s) {
    if (!reached_[pid]) {
      reached_[pid] = true;
      in_[pid] = s;
      push(pid);
    } else if (join_into(in_[pid], s)) {
      push(pid);
    }
  }

  State cells_of(const State &s) const {
    State out;
    for (const auto &[k, v] : s)
      if (t_->is_cell(k)) out.emplace_hint(out.end(), k, v);
    return out;
  }

  void process(uint32_t pid) {
    const uint32_t c = clone_at(pid);
    const uint32_t f = clones_[c].function;
    const uint32_t i = pid - clones_[c].first_point;
    const InstrId id = cfgs_[f].first + i;
    const Instruction &in = m_->instr(id);
    const State &s = in_[pid];
    auto var = [&](const std::string &n) { return t_->var(f, *m_->local_index(f, n)); };

    if (in.is_call()) {
      State copy = s;  // cloning may reallocate the state vectors
      call(c, i, id, in, copy);
      return;
    }
    State o = s;
    bool live = true;
    switch (in.op) {
      case Opcode::Alloc: put(o, var(in.dest), {t_->cell(alloc_object_[id], 0)}); break;
      case Opcode::Addr: {
        uint32_t obj;
        if (auto g = m_->global_index(in.symbol)) {
          obj = t_->global_object(*g);
        } else {
          obj = t_->function_object(*m_->function_index(in.symbol));
        }
        put(o, var(in.dest), {t_->cell(obj, 0)});
        break;
      }
      case Opcode::Copy: put(o, var(in.dest), get(s, var(in.operands[0]))); break;
      case Opcode::Load: {
        std::vector<NodeId> v;
        for (NodeId cell : get(s, var(in.operands[0]))) merge_into(v, get(s, cell));
        put(o, var(in.dest), std::move(v));
        break;
      }
      case Opcode::Store: {
        const auto &ptrs = get(s, var(in.operands[1]));
        const auto &val = get(s, var(in.operands[0]));
        if (ptrs.empty()) {
          live = false;  // null dereference: execution stops here
        } else if (opts_.strong_updates && ptrs.size() == 1 && strong_[t_->object_of(ptrs[0])]) {
          put(o, ptrs[0], val);
        } else {
          for (NodeId cell : ptrs) merge_into(o[cell], val);
          for (NodeId cell : ptrs)
            if (o[cell].empty()) o.erase(cell);
        }
        break;
      }
      case Opcode::Field: {
        std::vector<NodeId> v;
        for (NodeId cell : get(s, var(in.operands[0]))) v.push_back(t_->field_offset(cell, in.field_index));
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        put(o, var(in.dest), std::move(v));
        break;
      }
      case Opcode::Ret: {
        const NodeId slot = t_->ret(f);
        if (in.operands.empty()) {
          o.erase(slot);
        } else {
          put(o, slot, get(s, var(in.operands[0])));
        }
        out_[pid] = std::move(o);
        for (const auto &[caller, site] : callers_[c]) deliver(c, pid, caller, site);
        return;
      }
      default: break;
    }
    out_[pid] = live ? std::move(o) : State{};
    if (!live) return;
    for (uint32_t succ : cfgs_[f].succ[i]) flow(clones_[c].first_point + succ, out_[pid]);
  }

  void call(uint32_t c, uint32_t i, InstrId id, const Instruction &in, const State &s) {
    const uint32_t f = clones_[c].function;
    const uint32_t pid = clones_[c].first_point + i;
    auto var = [&](const std::string &n) { return t_->var(f, *m_->local_index(f, n)); };
    std::vector<uint32_t> targets;
    size_t first_arg = 0;
    if (in.op == Opcode::Call) {
      targets.push_back(*m_->function_index(in.symbol));
    } else {
      first_arg = 1;
      for (NodeId cell : get(s, var(in.operands[0])))
        if (auto g = t_->function_of_object(t_->object_of(cell)))
          if (m_->functions[*g].params.size() + 1 == in.operands.size()) targets.push_back(*g);
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    }
    auto &known = calls_[id];
    State cells = cells_of(s);
    for (uint32_t g : targets) {
      known.insert(g);
      uint32_t callee = clone_of(g, contexts_.extend(clones_[c].context, id, k_));
      if (sizes_[g] == 0) continue;
      State entry = cells;
      for (size_t a = first_arg; a < in.operands.size(); ++a)
        put(entry, t_->var(g, static_cast<uint32_t>(a - first_arg)), get(s, var(in.operands[a])));
      flow(clones_[callee].first_point, entry);
      if (callers_[callee].emplace(c, i).second)
        for (uint32_t r : rets_[g]) {
          uint32_t rp = clones_[callee].first_point + r;
          if (reached_[rp]) deliver(callee, rp, c, i);
        }
    }
    // Locals of the caller survive the call; memory flows through the callee.
    State bypass;
    const NodeId dest = var(in.dest);
    for (const auto &[k, v] : s)
      if (!t_->is_cell(k) && k != dest) bypass.emplace_hint(bypass.end(), k, v);
    out_[pid] = bypass;
    for (uint32_t succ : cfgs_[f].succ[i]) flow(clones_[c].first_point + succ, bypass);
  }

  void deliver(uint32_t callee, uint32_t ret_pid, uint32_t caller, uint32_t site) {
    const State &o = out_[ret_pid];
    State r = cells_of(o);
    const uint32_t f = clones_[caller].function;
    const Instruction &in = m_->instr(cfgs_[f].first + site);
    put(r, t_->var(f, *m_->local_index(f, in.dest)), get(o, t_->ret(clones_[callee].function)));
    for (uint32_t succ : cfgs_[f].succ[site]) flow(clones_[caller].first_point + succ, r);
  }

  uint32_t clone_at(uint32_t pid) const {
    auto it = std::upper_bound(clones_.begin(), clones_.end(), pid,
                               [](uint32_t p, const FlowSolution::Clone &c) { return p < c.first_point; });
    return static_cast<uint32_t>(it - clones_.begin()) - 1;
  }

  std::shared_ptr<const PointerModule> m_;
  int k_;
  FlowOptions opts_;
  std::shared_ptr<const NodeTable> t_;
  CallGraph cg_;
  std::vector<bool> strong_;
  std::vector<uint32_t> sizes_;
  std::vector<CFG> cfgs_;
  std::vector<std::vector<uint32_t>> rets_;
  std::vector<uint32_t> alloc_object_;
  ContextTable contexts_;
  std::vector<FlowSolution::Clone> clones_;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> clone_index_;
  std::vector<State> in_, out_;
  std::vector<bool> reached_, queued_;
  std::vector<std::set<std::pair<uint32_t, uint32_t>>> callers_;
  std::deque<uint32_t> work_;
  std::map<InstrId, std::set<uint32_t>> calls_;
  uint64_t steps_ = 0;
};

}  // namespace

std::vector<bool> strong_updatable_objects(const NodeTable &t, const CallGraph &cg) {
  const PointerModule &m = t.module();
  const uint32_t nf = static_cast<uint32_t>(m.functions.size());
  std::vector<std::vector<InstrId>> sites_of(nf);
  std::vector<std::vector<uint32_t>> callees(nf);
  for (const auto &[site, targets] : cg)
    for (uint32_t g : targets) {
      sites_of[g].push_back(site);
      callees[m.loc(site).function].push_back(g);
    }
  std::vector<bool> recursive = nodes_on_cycles(nf, [&](uint32_t f) { return callees[f]; });

  std::vector<bool> on_cycle(m.instruction_count(), false);
  for (uint32_t f = 0; f < nf; ++f) {
    CFG cfg = build_cfg(m, f);
    auto cyc = cfg.on_cycle();
    for (uint32_t i = 0; i < cfg.size(); ++i) on_cycle[cfg.first + i] = cyc[i];
  }

  const auto entry = m.entry_index();
  std::vector<int> memo(nf, -1);  // -1 unknown, 2 in progress
  std::function<bool(uint32_t)> single = [&](uint32_t f) -> bool {
    if (memo[f] == 0 || memo[f] == 1) return memo[f] == 1;
    if (memo[f] == 2) return false;
    memo[f] = 2;
    bool ok;
    if (recursive[f]) {
      ok = false;
    } else if (sites_of[f].empty()) {
      ok = true;  // the entry runs once; other uncalled functions never run
    } else if (entry && *entry == f) {
      ok = false;
    } else if (sites_of[f].size() != 1) {
      ok = false;
    } else {
      InstrId s = sites_of[f][0];
      ok = !on_cycle[s] && single(m.loc(s).function);
    }
    memo[f] = ok ? 1 : 0;
    return ok;
  };

  std::vector<bool> out(t.objects().size(), true);
  for (uint32_t o = 0; o < t.objects().size(); ++o) {
    const ObjectInfo &info = t.object(o);
    if (info.kind != ObjectKind::AllocSite) continue;
    out[o] = !on_cycle[info.origin] && single(m.loc(info.origin).function);
  }
  return out;
}

uint32_t FlowSolution::point(uint32_t clone, InstrId id) const {
  const PointerModule &m = table->module();
  return clones[clone].first_point + (id - *m.entry_instr(clones[clone].function));
}

std::vector<NodeId> FlowSolution::in_at(InstrId id, NodeId node) const {
  const PointerModule &m = table->module();
  const uint32_t f = m.loc(id).function;
  std::vector<NodeId> out;
  for (uint32_t c = 0; c < clones.size(); ++c) {
    if (clones[c].function != f) continue;
    merge_into(out, get(in[point(c, id)], node));
  }
  return out;
}

std::vector<NodeId> FlowSolution::points_to(NodeId node) const {
  std::vector<NodeId> out;
  const NodeInfo &info = table->info(node);
  for (uint32_t c = 0; c < clones.size(); ++c) {
    if (info.kind == NodeKind::Var && clones[c].function != info.function) continue;
    uint32_t end = c + 1 < clones.size() ? clones[c + 1].first_point : static_cast<uint32_t>(in.size());
    for (uint32_t p = clones[c].first_point; p < end; ++p) {
      merge_into(out, get(in[p], node));
      merge_into(out, get(this->out[p], node));
    }
  }
  return out;
}

PointsToSolution FlowSolution::project() const {
  const NodeTable &t = *table;
  std::vector<std::set<NodeId>> acc(t.size());
  for (uint32_t p = 0; p < in.size(); ++p)
    for (const State *s : {&in[p], &out[p]})
      for (const auto &[k, v] : *s) acc[k].insert(v.begin(), v.end());
  std::vector<NodeId> rep(t.size());
  std::vector<std::vector<NodeId>> sets(t.size());
  for (NodeId n = 0; n < t.size(); ++n) {
    rep[n] = n;
    sets[n].assign(acc[n].begin(), acc[n].end());
  }
  SolverStats stats;
  stats.iterations = steps;
  stats.graph_nodes = in.size();
  return PointsToSolution(table, std::move(rep), std::move(sets), calls, stats);
}

FlowSolution solve_flow_sensitive(std::shared_ptr<const PointerModule> m, const FlowOptions &opts) {
  return solve_fscs(std::move(m), 0, opts);
}

FlowSolution solve_fscs(std::shared_ptr<const PointerModule> m, int k, const FlowOptions &opts) {
  if (k < 0) throw AnalysisError("k must be nonnegative");
  FlowEngine e(std::move(m), k, opts);
  return e.run();
}

}  // namespace pta
