#include "pta/query.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pta/error.hpp"
#include "pta/graph.hpp"

namespace pta {

const char *to_string(AnalysisKind k) {
  switch (k) {
    case AnalysisKind::FICI: return "fici";
    case AnalysisKind::Steens: return "steens";
    case AnalysisKind::KCFA: return "kcfa";
    case AnalysisKind::FS: return "fs";
    case AnalysisKind::FSCS: return "fscs";
  }
  return "?";
}

std::optional<AnalysisKind> parse_analysis(std::string_view s) {
  for (auto k : {AnalysisKind::FICI, AnalysisKind::Steens, AnalysisKind::KCFA, AnalysisKind::FS, AnalysisKind::FSCS})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

AnalysisResult::AnalysisResult(PointsToSolution sol, Provenance p)
    : prov_(std::move(p)), global_(std::make_shared<PointsToSolution>(std::move(sol))) {
  init();
}

AnalysisResult::AnalysisResult(UnificationSolution sol, Provenance p) : prov_(std::move(p)) {
  unify_ = std::make_shared<UnificationSolution>(std::move(sol));
  global_ = std::make_shared<PointsToSolution>(project_sets(*unify_));
  init();
}

AnalysisResult::AnalysisResult(ContextualSolution sol, Provenance p) : prov_(std::move(p)) {
  ctx_ = std::make_shared<ContextualSolution>(std::move(sol));
  global_ = std::make_shared<PointsToSolution>(project_ci(*ctx_));
  init();
}

AnalysisResult::AnalysisResult(FlowSolution sol, Provenance p) : prov_(std::move(p)) {
  flow_ = std::make_shared<FlowSolution>(std::move(sol));
  global_ = std::make_shared<PointsToSolution>(flow_->project());
  init();
}

namespace {

void insert_objects(std::set<uint32_t> &dst, const NodeTable &t, std::span<const NodeId> cells) {
  for (NodeId c : cells) dst.insert(t.object_of(c));
}

}  // namespace

void AnalysisResult::init() {
  const PointerModule &m = module();
  const NodeTable &t = nodes();
  const uint32_t nf = static_cast<uint32_t>(m.functions.size());
  std::vector<std::set<uint32_t>> fr(nf), fw(nf);
  std::vector<std::set<uint32_t>> reads(m.instruction_count()), writes(m.instruction_count());
  std::vector<std::vector<uint32_t>> callees(nf);
  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    const Instruction &in = m.instr(id);
    const uint32_t f = m.loc(id).function;
    if (in.op == Opcode::Load) {
      insert_objects(reads[id], t, global_->points_to(*t.var_by_name(f, in.operands[0])));
      fr[f].insert(reads[id].begin(), reads[id].end());
    } else if (in.op == Opcode::Store) {
      insert_objects(writes[id], t, global_->points_to(*t.var_by_name(f, in.operands[1])));
      fw[f].insert(writes[id].begin(), writes[id].end());
    } else if (in.is_call()) {
      auto it = call_graph().find(id);
      if (it != call_graph().end()) callees[f].insert(callees[f].end(), it->second.begin(), it->second.end());
    }
  }
  // Transitive summaries: components in reverse topological order, callees first.
  SCCResult scc = strongly_connected_components(nf, [&](uint32_t f) { return callees[f]; });
  std::vector<std::vector<uint32_t>> members(scc.count);
  for (uint32_t f = 0; f < nf; ++f) members[scc.component[f]].push_back(f);
  std::vector<std::set<uint32_t>> cr(scc.count), cw(scc.count);
  for (uint32_t c = 0; c < scc.count; ++c) {
    for (uint32_t f : members[c]) {
      cr[c].insert(fr[f].begin(), fr[f].end());
      cw[c].insert(fw[f].begin(), fw[f].end());
      for (uint32_t g : callees[f]) {
        uint32_t d = scc.component[g];
        if (d == c) continue;
        cr[c].insert(cr[d].begin(), cr[d].end());
        cw[c].insert(cw[d].begin(), cw[d].end());
      }
    }
  }
  modref_.assign(m.instruction_count(), {});
  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    if (m.instr(id).is_call()) {
      auto it = call_graph().find(id);
      if (it != call_graph().end())
        for (uint32_t g : it->second) {
          reads[id].insert(cr[scc.component[g]].begin(), cr[scc.component[g]].end());
          writes[id].insert(cw[scc.component[g]].begin(), cw[scc.component[g]].end());
        }
    }
    modref_[id].reads.assign(reads[id].begin(), reads[id].end());
    modref_[id].writes.assign(writes[id].begin(), writes[id].end());
  }
}

NodeId AnalysisResult::resolve_var(std::string_view name) const {
  const PointerModule &m = module();
  std::optional<uint32_t> fn;
  std::string_view local = name;
  if (!name.empty() && name[0] == '@') {
    auto colon = name.find(':');
    if (colon == std::string_view::npos) throw AnalysisError("unknown variable " + std::string(name));
    fn = m.function_index(name.substr(1, colon - 1));
    local = name.substr(colon + 1);
  } else {
    fn = m.entry_index();
  }
  if (!fn) throw AnalysisError("unknown variable " + std::string(name));
  if (local == "ret") return nodes().ret(*fn);
  if (!local.empty() && local[0] == '%') local.remove_prefix(1);
  auto n = nodes().var_by_name(*fn, local);
  if (!n) throw AnalysisError("unknown variable " + std::string(name));
  return *n;
}

uint32_t AnalysisResult::resolve_object(std::string_view name) const {
  const NodeTable &t = nodes();
  for (uint32_t o = 0; o < t.objects().size(); ++o)
    if (t.object_name(o) == name) return o;
  throw AnalysisError("unknown object " + std::string(name));
}

std::vector<NodeId> AnalysisResult::pts(NodeId var, std::optional<InstrId> at) const {
  if (at) {
    if (!flow_) throw AnalysisError("program-point queries need a flow-sensitive result");
    if (*at >= module().instruction_count()) throw AnalysisError("unknown instruction " + std::to_string(*at));
    return flow_->in_at(*at, var);
  }
  auto s = global_->points_to(var);
  return {s.begin(), s.end()};
}

bool may_alias(const AnalysisResult &r, NodeId p, NodeId q, std::optional<InstrId> at) {
  auto a = r.pts(p, at), b = r.pts(q, at);
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

bool may_alias(const AnalysisResult &r, std::string_view p, std::string_view q, std::optional<InstrId> at) {
  return may_alias(r, r.resolve_var(p), r.resolve_var(q), at);
}

bool pointed_by(const AnalysisResult &r, std::string_view p, std::string_view object) {
  uint32_t o = r.resolve_object(object);
  for (NodeId c : r.pts(r.resolve_var(p)))
    if (r.nodes().object_of(c) == o) return true;
  return false;
}

std::vector<NodeId> points_to_set(const AnalysisResult &r, std::string_view p, std::optional<InstrId> at) {
  return r.pts(r.resolve_var(p), at);
}

std::vector<NodeId> alias_set(const AnalysisResult &r, NodeId v) {
  const NodeTable &t = r.nodes();
  std::vector<NodeId> out;
  if (r.pts(v).empty()) return out;
  for (NodeId w = 0; w < t.size(); ++w) {
    if (t.is_cell(w) || t.info(w).local == kRetSlot) continue;
    if (may_alias(r, v, w)) out.push_back(w);
  }
  return out;
}

std::vector<NodeId> alias_set(const AnalysisResult &r, std::string_view v) { return alias_set(r, r.resolve_var(v)); }

ModRef mod_ref(const AnalysisResult &r, InstrId id) {
  if (id >= r.module().instruction_count()) throw AnalysisError("unknown instruction " + std::to_string(id));
  return r.mod_ref(id);
}

namespace {

std::string join_names(const std::vector<std::string> &names) {
  std::string s = "{";
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) s += ", ";
    s += names[i];
  }
  return s + "}";
}

}  // namespace

std::vector<std::string> run_queries(const AnalysisResult &r, std::string_view script) {
  std::vector<std::string> out;
  std::istringstream in{std::string(script)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> w;
    for (std::string tok; ls >> tok;) w.push_back(tok);
    if (w.empty()) continue;
    std::string text = w[0];
    for (size_t i = 1; i < w.size(); ++i) text += " " + w[i];
    auto arity = [&](size_t n) {
      if (w.size() != n + 1)
        throw AnalysisError("line " + std::to_string(lineno) + ": " + w[0] + " takes " + std::to_string(n) +
                            " argument(s)");
    };
    try {
      if (w[0] == "ALIAS") {
        arity(2);
        out.push_back(text + ": " + (may_alias(r, w[1], w[2]) ? "true" : "false"));
      } else if (w[0] == "PTS") {
        arity(1);
        std::vector<std::string> names;
        for (NodeId c : points_to_set(r, w[1])) names.push_back(r.nodes().cell_name(c));
        out.push_back(text + ": " + join_names(names));
      } else if (w[0] == "PB") {
        arity(2);
        out.push_back(text + ": " + (pointed_by(r, w[1], w[2]) ? "true" : "false"));
      } else if (w[0] == "ALIASSET") {
        arity(1);
        std::vector<std::string> names;
        for (NodeId v : alias_set(r, w[1])) names.push_back(r.nodes().node_name(v));
        std::sort(names.begin(), names.end());
        out.push_back(text + ": " + join_names(names));
      } else {
        throw AnalysisError("line " + std::to_string(lineno) + ": unknown query " + w[0]);
      }
    } catch (const AnalysisError &e) {
      std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw AnalysisError("line " + std::to_string(lineno) + ": " + msg);
    }
  }
  return out;
}

}  // namespace pta
