#include "pta/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "pta/error.hpp"

namespace pta {

using json = nlohmann::json;

int RunConfig::effective_k() const {
  if (analysis != AnalysisKind::KCFA && analysis != AnalysisKind::FSCS) return 0;
  return k.value_or(2);
}

void RunConfig::validate() const {
  const bool contextual = analysis == AnalysisKind::KCFA || analysis == AnalysisKind::FSCS;
  if (k && !contextual) throw AnalysisError("--k is only valid with --analysis kcfa or fscs");
  if (k && *k < 0) throw AnalysisError("--k must be non-negative");
  if (analysis == AnalysisKind::KCFA && effective_k() > 3) throw AnalysisError("--k must be at most 3 for kcfa");
  if (analysis == AnalysisKind::FSCS && effective_k() > 2) throw AnalysisError("--k must be at most 2 for fscs");
  if (solver_flags && analysis == AnalysisKind::Steens)
    throw AnalysisError("solver flags (--solver, --worklist, --offline, --cycles, --pts) do not apply to steens");
  if (solver.max_propagations == 0) throw AnalysisError("--max-props must be positive");
  if (solver.backend == SetBackendKind::Bdd) throw AnalysisError("the bdd set backend is not implemented");
}

std::string content_hash(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

std::shared_ptr<const PointerModule> load_module(std::string_view text, std::string_view origin) {
  ParseResult r = parse_module(text);
  if (!r.ok()) {
    std::string msg;
    for (const Diagnostic &d : r.diagnostics) {
      if (!d.is_error()) continue;
      if (!msg.empty()) msg += "\n";
      if (!origin.empty()) msg += std::string(origin) + ":";
      msg += d.str();
    }
    throw AnalysisError(msg);
  }
  return std::make_shared<const PointerModule>(std::move(*r.module));
}

AnalysisResult run_analysis(std::shared_ptr<const PointerModule> m, const RunConfig &cfg,
                            const std::string &module_hash) {
  cfg.validate();
  const int k = cfg.effective_k();
  Provenance prov{cfg.analysis, k, cfg.solver.str(), module_hash};
  switch (cfg.analysis) {
    case AnalysisKind::FICI:
      return AnalysisResult(solve(generate(build_node_table(m)), cfg.solver), prov);
    case AnalysisKind::Steens:
      prov.config = "unification";
      return AnalysisResult(solve_unify(m), prov);
    case AnalysisKind::KCFA: {
      KcfaOptions ko;
      ko.max_clones = cfg.max_clones;
      return AnalysisResult(solve_kcfa(m, k, cfg.solver, ko), prov);
    }
    case AnalysisKind::FS:
    case AnalysisKind::FSCS: {
      PointsToSolution ci = solve(generate(build_node_table(m)), cfg.solver);
      FlowOptions fo;
      fo.max_steps = cfg.max_steps;
      fo.max_clones = cfg.max_clones;
      fo.call_graph = &ci.call_graph();
      return AnalysisResult(solve_fscs(m, k, fo), prov);
    }
  }
  throw InvariantError("unknown analysis kind");
}

namespace {

json provenance_json(const RunConfig &cfg, const std::string &module_hash) {
  json c;
  c["analysis"] = to_string(cfg.analysis);
  c["k"] = cfg.effective_k();
  if (cfg.analysis != AnalysisKind::Steens) {
    c["offline"] = to_string(cfg.solver.offline);
    c["cycles"] = to_string(cfg.solver.cycles);
    c["solver"] = to_string(cfg.solver.strategy);
    c["worklist"] = to_string(cfg.solver.worklist);
    c["pts"] = backend_name(cfg.solver.backend);
    c["max_props"] = cfg.solver.max_propagations;
  }
  if (cfg.analysis == AnalysisKind::KCFA || cfg.analysis == AnalysisKind::FS || cfg.analysis == AnalysisKind::FSCS)
    c["max_clones"] = cfg.max_clones;
  if (cfg.analysis == AnalysisKind::FS || cfg.analysis == AnalysisKind::FSCS) c["max_steps"] = cfg.max_steps;
  json p;
  p["config"] = c;
  p["granularity"] = cfg.analysis == AnalysisKind::Steens ? "object" : "field";
  p["module_hash"] = module_hash;
  p["tool_version"] = kToolVersion;
  return p;
}

json cell_list(const NodeTable &t, std::span<const NodeId> cells) {
  json a = json::array();
  for (NodeId c : cells) a.push_back(t.cell_name(c));
  return a;
}

json flow_table(const FlowSolution &fs) {
  const NodeTable &t = fs.nodes();
  const PointerModule &m = t.module();
  std::vector<std::vector<InstrId>> body(m.functions.size());
  for (InstrId id = 0; id < m.instruction_count(); ++id) body[m.loc(id).function].push_back(id);

  std::map<InstrId, std::map<NodeId, std::set<NodeId>>> in;
  for (uint32_t c = 0; c < fs.clones.size(); ++c) {
    for (InstrId id : body[fs.clones[c].function]) {
      uint32_t pt = fs.point(c, id);
      if (!fs.reached[pt]) continue;
      auto &dst = in[id];
      for (const auto &[key, cells] : fs.in[pt])
        if (!cells.empty()) dst[key].insert(cells.begin(), cells.end());
    }
  }
  json out = json::object();
  for (const auto &[id, state] : in) {
    json s = json::object();
    for (const auto &[key, cells] : state) {
      std::vector<NodeId> v(cells.begin(), cells.end());
      s[t.node_name(key)] = cell_list(t, v);
    }
    out[m.instr_name(id)] = std::move(s);
  }
  return out;
}

}  // namespace

std::string provenance_text(const RunConfig &cfg, const std::string &module_hash) {
  return provenance_json(cfg, module_hash).dump();
}

std::string dump_result(const AnalysisResult &r, const RunConfig &cfg) {
  const NodeTable &t = r.nodes();
  const PointerModule &m = r.module();
  const PointsToSolution &g = r.global();
  json d;
  d["provenance"] = provenance_json(cfg, r.provenance().module_hash);

  json pts = json::object(), mem = json::object();
  for (NodeId n = 0; n < t.size(); ++n) {
    if (t.is_cell(n)) {
      if (!g.points_to(n).empty()) mem[t.cell_name(n)] = cell_list(t, g.points_to(n));
    } else {
      pts[t.node_name(n)] = cell_list(t, g.points_to(n));
    }
  }
  d["points_to"] = std::move(pts);
  d["memory"] = std::move(mem);

  json cg = json::object();
  for (const auto &[site, targets] : r.call_graph()) {
    json a = json::array();
    for (uint32_t f : targets) a.push_back("@" + m.functions[f].name);
    cg[m.instr_name(site)] = std::move(a);
  }
  d["call_graph"] = std::move(cg);

  const SolverStats &s = g.stats();
  json st;
  st["iterations"] = s.iterations;
  st["propagations"] = s.propagations;
  st["collapsed"] = s.collapsed;
  st["offline_merged"] = s.offline_merged;
  st["waves"] = s.waves;
  st["lcd_probes"] = s.lcd_probes;
  st["graph_nodes"] = s.graph_nodes;
  if (const ContextualSolution *c = r.contextual()) {
    st["clones"] = c->clone_count();
    st["rounds"] = c->rounds;
  }
  if (const FlowSolution *f = r.flow()) {
    st["clones"] = f->clones.size();
    st["steps"] = f->steps;
    d["flow_in"] = flow_table(*f);
  }
  if (const UnificationSolution *u = r.unification()) st["classes"] = u->class_count();
  d["statistics"] = std::move(st);
  return d.dump(2) + "\n";
}

bool dump_matches(std::string_view dump_text, const RunConfig &cfg, const std::string &module_hash) {
  json d = json::parse(dump_text, nullptr, false);
  if (d.is_discarded() || !d.is_object() || !d.contains("provenance")) return false;
  return d["provenance"] == provenance_json(cfg, module_hash);
}

//===----------------------------------------------------------------------===//
// Diff
//===----------------------------------------------------------------------===//

std::optional<DiffMode> parse_diff_mode(std::string_view s) {
  if (s == "equal") return DiffMode::Equal;
  if (s == "subset") return DiffMode::Subset;
  return std::nullopt;
}

namespace {

using Table = std::map<std::string, std::set<std::string>>;

// "A.3" -> "A"
std::string collapse(const std::string &name) {
  size_t dot = name.rfind('.');
  if (dot == std::string::npos || dot + 1 == name.size()) return name;
  for (size_t i = dot + 1; i < name.size(); ++i)
    if (name[i] < '0' || name[i] > '9') return name;
  return name.substr(0, dot);
}

Table read_table(const json &d, bool fields_collapsed) {
  Table t;
  auto add = [&](const json &section, const std::string &prefix, bool collapse_key) {
    if (!section.is_object()) throw AnalysisError("malformed dump: expected an object");
    for (const auto &[key, values] : section.items()) {
      std::string k = prefix + (collapse_key && fields_collapsed ? collapse(key) : key);
      auto &dst = t[k];
      if (!values.is_array()) throw AnalysisError("malformed dump: entry '" + key + "' is not a list");
      for (const auto &v : values) {
        if (!v.is_string()) throw AnalysisError("malformed dump: entry '" + key + "' has a non-string element");
        dst.insert(fields_collapsed ? collapse(v.get<std::string>()) : v.get<std::string>());
      }
    }
  };
  add(d.at("points_to"), "", false);
  if (d.contains("memory")) add(d.at("memory"), "*", true);
  return t;
}

json parse_dump(std::string_view text, const char *which) {
  json d = json::parse(text, nullptr, false);
  if (d.is_discarded() || !d.is_object() || !d.contains("points_to") || !d.contains("provenance"))
    throw AnalysisError(std::string("malformed dump: ") + which);
  return d;
}

std::string set_str(const std::set<std::string> &s) {
  std::string out = "{";
  for (const auto &x : s) out += (out.size() > 1 ? ", " : "") + x;
  return out + "}";
}

}  // namespace

DiffReport diff_dumps(std::string_view a_text, std::string_view b_text, DiffMode mode) {
  json a = parse_dump(a_text, "first"), b = parse_dump(b_text, "second");
  DiffReport rep;
  std::string ha = a["provenance"].value("module_hash", ""), hb = b["provenance"].value("module_hash", "");
  if (ha != hb) rep.lines.push_back("module hash differs: " + ha + " vs " + hb);
  const bool coarse = a["provenance"].value("granularity", "field") == "object" ||
                      b["provenance"].value("granularity", "field") == "object";
  Table ta = read_table(a, coarse), tb = read_table(b, coarse);
  static const std::set<std::string> empty;
  auto get = [&](const Table &t, const std::string &k) -> const std::set<std::string> & {
    auto it = t.find(k);
    return it == t.end() ? empty : it->second;
  };
  std::set<std::string> keys;
  for (const auto &[k, _] : ta) keys.insert(k);
  if (mode == DiffMode::Equal)
    for (const auto &[k, _] : tb) keys.insert(k);
  for (const auto &k : keys) {
    const auto &sa = get(ta, k), &sb = get(tb, k);
    if (mode == DiffMode::Equal) {
      if (sa != sb) rep.lines.push_back(k + ": " + set_str(sa) + " vs " + set_str(sb));
    } else {
      std::set<std::string> extra;
      std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(extra, extra.end()));
      if (!extra.empty()) rep.lines.push_back(k + ": " + set_str(extra) + " not in second");
    }
  }
  return rep;
}

//===----------------------------------------------------------------------===//
// Bench
//===----------------------------------------------------------------------===//

std::optional<SolverConfig> parse_solver_config(std::string_view s) {
  std::vector<std::string_view> parts;
  for (size_t start = 0;;) {
    size_t slash = s.find('/', start);
    parts.push_back(s.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  SolverConfig c;
  if (parts.size() == 5) {
    auto o = parse_offline(parts[0]);
    auto cy = parse_cycles(parts[1]);
    auto st = parse_strategy(parts[2]);
    auto w = parse_worklist(parts[3]);
    auto b = parse_backend(parts[4]);
    if (!o || !cy || !st || !w || !b) return std::nullopt;
    c.offline = *o;
    c.cycles = *cy;
    c.strategy = *st;
    c.worklist = *w;
    c.backend = *b;
    return c;
  }
  for (std::string_view p : parts) {
    if (p == "none") continue;
    if (auto o = parse_offline(p)) c.offline = *o;
    else if (auto cy = parse_cycles(p)) c.cycles = *cy;
    else if (auto st = parse_strategy(p)) c.strategy = *st;
    else if (auto w = parse_worklist(p)) c.worklist = *w;
    else if (auto b = parse_backend(p)) c.backend = *b;
    else return std::nullopt;
  }
  return c;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace

std::vector<BenchRow> bench_module(const std::string &name, std::shared_ptr<const PointerModule> m,
                                   const std::vector<SolverConfig> &configs, const BenchOptions &opts) {
  const ConstraintSystem sys = generate(build_node_table(m));
  std::vector<BenchRow> rows;
  for (SolverConfig c : configs) {
    c.max_propagations = opts.max_propagations;
    BenchRow row;
    row.program = name;
    row.config = c.str();
    for (int i = 0; i < opts.warmup; ++i) solve(sys, c);
    std::vector<double> times;
    for (int i = 0; i < std::max(1, opts.runs); ++i) {
      ConstraintSystem copy = sys;
      auto t0 = std::chrono::steady_clock::now();
      PointsToSolution sol = solve(std::move(copy), c);
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      row.propagations = sol.stats().propagations;
      row.graph_nodes = sol.stats().graph_nodes;
      row.offline_merged = sol.stats().offline_merged;
    }
    row.millis = median(times);
    rows.push_back(row);
  }
  return rows;
}

std::vector<BenchRatio> bench_ratios(const std::vector<BenchRow> &rows, const std::string &baseline) {
  std::map<std::string, const BenchRow *> base;
  std::vector<std::string> order;
  for (const BenchRow &r : rows) {
    if (r.config == baseline) base[r.program] = &r;
    if (std::find(order.begin(), order.end(), r.config) == order.end()) order.push_back(r.config);
  }
  std::vector<BenchRatio> out;
  for (const std::string &config : order) {
    BenchRatio ratio;
    ratio.config = config;
    std::vector<double> props, times;
    for (const BenchRow &r : rows) {
      if (r.config != config) continue;
      auto it = base.find(r.program);
      if (it == base.end()) continue;
      const BenchRow &b = *it->second;
      ++ratio.programs;
      if (r.propagations <= b.propagations) ++ratio.not_worse;
      props.push_back(r.propagations == 0 ? (b.propagations == 0 ? 1.0 : static_cast<double>(b.propagations))
                                          : static_cast<double>(b.propagations) / r.propagations);
      times.push_back(b.millis / std::max(r.millis, 1e-6));
    }
    ratio.median_propagation_ratio = median(props);
    ratio.median_time_ratio = median(times);
    out.push_back(ratio);
  }
  return out;
}

std::string bench_csv(const std::vector<BenchRow> &rows) {
  std::string s = "program,config,propagations,millis,graph_nodes,offline_merged\n";
  char buf[64];
  for (const BenchRow &r : rows) {
    std::snprintf(buf, sizeof buf, "%.3f", r.millis);
    s += r.program + "," + r.config + "," + std::to_string(r.propagations) + "," + buf + "," +
         std::to_string(r.graph_nodes) + "," + std::to_string(r.offline_merged) + "\n";
  }
  return s;
}

std::string ratio_csv(const std::vector<BenchRatio> &ratios) {
  std::string s = "config,programs,median_propagation_ratio,median_time_ratio,not_worse\n";
  char buf[96];
  for (const BenchRatio &r : ratios) {
    std::snprintf(buf, sizeof buf, "%zu,%.3f,%.3f,%zu", r.programs, r.median_propagation_ratio,
                  r.median_time_ratio, r.not_worse);
    s += r.config + "," + buf + "\n";
  }
  return s;
}

}  // namespace pta
