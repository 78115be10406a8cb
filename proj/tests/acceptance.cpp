// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Takes a few minutes on one core.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "pta/derived.hpp"
#include "pta/driver.hpp"
#include "pta/generator.hpp"
#include "pta/interpreter.hpp"

using namespace pta;
namespace fs = std::filesystem;

namespace {

constexpr uint64_t kCorpus = 1000;

std::shared_ptr<const PointerModule> corpus(uint64_t seed, bool deterministic = false) {
  GenOptions g;
  g.seed = seed;
  g.size = 10 + seed % 191;
  g.deterministic = deterministic;
  return load_module(generate_program(g));
}

SolverConfig uncapped(SolverConfig c) {
  c.max_propagations = 1ull << 40;
  return c;
}

SolverConfig fast() {
  SolverConfig c;
  c.strategy = Strategy::Wave;
  c.cycles = CycleMode::Both;
  c.backend = SetBackendKind::SparseBitVector;
  return uncapped(c);
}

std::vector<uint32_t> objects_of(const NodeTable &t, std::span<const NodeId> cells) {
  std::vector<uint32_t> o;
  for (NodeId c : cells) o.push_back(t.object_of(c));
  std::sort(o.begin(), o.end());
  o.erase(std::unique(o.begin(), o.end()), o.end());
  return o;
}

template <class A, class B>
bool subset(const A &a, const B &b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool intersects(const std::vector<uint32_t> &a, const std::vector<uint32_t> &b) {
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    *i < *j ? ++i : ++j;
  }
  return false;
}

bool contains(std::span<const NodeId> v, NodeId c) { return std::find(v.begin(), v.end(), c) != v.end(); }
bool contains(const std::vector<NodeId> &v, NodeId c) { return std::find(v.begin(), v.end(), c) != v.end(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

// ---------------------------------------------------------------------------

Outcome configuration_equivalence() {
  const auto configs = SolverConfig::all();
  size_t mismatches = 0, max_instr = 0;
  std::string first;
  for (uint64_t seed = 1; seed <= kCorpus; ++seed) {
    auto m = corpus(seed);
    max_instr = std::max(max_instr, m->instruction_count());
    ConstraintSystem sys = generate(m);
    PointsToSolution ref = solve(sys, uncapped(SolverConfig::reference()));
    for (const SolverConfig &c : configs) {
      bool ok;
      try {
        PointsToSolution sol = solve(sys, uncapped(c));
        ok = sol.same_sets(ref) && sol.call_graph() == ref.call_graph();
      } catch (const std::exception &) {
        ok = false;
      }
      if (!ok && mismatches++ == 0) first = "seed " + std::to_string(seed) + " " + c.str();
    }
  }
  Outcome o;
  o.pass = mismatches == 0;
  o.detail = std::to_string(kCorpus) + " programs (<=" + std::to_string(max_instr) + " instructions) x " +
             std::to_string(configs.size()) + " configs, " + std::to_string(mismatches) + " mismatches" +
             (first.empty() ? "" : ", first: " + first);
  return o;
}

Outcome soundness() {
  size_t violations = 0, facts = 0;
  const uint64_t programs = 500;
  for (uint64_t seed = 1; seed <= programs; ++seed) {
    auto m = corpus(seed, true);
    auto t = build_node_table(m);
    Trace tr = interpret(t);
    SolverConfig cfg = fast();
    PointsToSolution ci = solve(generate(t), cfg);
    std::vector<PointsToSolution> global{ci, project_ci(solve_kcfa(m, 1, cfg)), project_ci(solve_kcfa(m, 2, cfg))};
    PointsToSolution st = project_sets(solve_unify(m));
    FlowOptions fo;
    fo.call_graph = &ci.call_graph();
    std::vector<FlowSolution> flow;
    flow.push_back(solve_flow_sensitive(m, fo));
    flow.push_back(solve_fscs(m, 1, fo));
    flow.push_back(solve_fscs(m, 2, fo));
    for (const VarFact &f : tr.facts) {
      ++facts;
      for (const auto &s : global) violations += !contains(s.points_to(f.var), f.cell);
      violations += !contains(st.points_to(f.var), t->cell(t->object_of(f.cell), 0));
      for (const auto &s : flow) violations += !contains(s.in_at(f.instr, f.var), f.cell);
    }
    for (const MemFact &f : tr.loads) {
      ++facts;
      for (const auto &s : global) violations += !contains(s.points_to(f.cell), f.value);
      for (const auto &s : flow) violations += !contains(s.in_at(f.instr, f.cell), f.value);
    }
  }
  return {violations == 0, std::to_string(programs) + " deterministic programs, " + std::to_string(facts) +
                               " runtime facts x 7 modes, " + std::to_string(violations) + " violations"};
}

Outcome precision_lattice() {
  size_t violations = 0, alias_pairs = 0, non_monotone = 0;
  for (uint64_t seed = 1; seed <= kCorpus; ++seed) {
    auto m = corpus(seed);
    SolverConfig cfg = fast();
    PointsToSolution ci = solve(generate(m), cfg);
    const NodeTable &t = ci.nodes();
    FlowOptions fo;
    fo.call_graph = &ci.call_graph();
    PointsToSolution fs = solve_flow_sensitive(m, fo).project(), f1 = solve_fscs(m, 1, fo).project(),
                     f2 = solve_fscs(m, 2, fo).project();
    PointsToSolution k1 = project_ci(solve_kcfa(m, 1, cfg)), k2 = project_ci(solve_kcfa(m, 2, cfg));
    PointsToSolution st = project_sets(solve_unify(m));
    std::vector<NodeId> vars;
    std::vector<std::vector<uint32_t>> an, un;
    for (NodeId n = 0; n < t.size(); ++n) {
      if (t.is_cell(n)) continue;
      auto a = objects_of(t, ci.points_to(n)), s = objects_of(t, st.points_to(n));
      auto ofs = objects_of(t, fs.points_to(n)), o1 = objects_of(t, f1.points_to(n)), o2 = objects_of(t, f2.points_to(n));
      auto c1 = objects_of(t, k1.points_to(n)), c2 = objects_of(t, k2.points_to(n));
      violations += !subset(o2, ofs) + !subset(ofs, a) + !subset(c1, a) + !subset(c2, a) + !subset(a, s);
      non_monotone += !subset(c2, c1) + !subset(o2, o1);
      vars.push_back(n);
      an.push_back(std::move(a));
      un.push_back(std::move(s));
    }
    for (size_t i = 0; i < vars.size(); ++i)
      for (size_t j = i; j < vars.size(); ++j)
        if (intersects(an[i], an[j])) {
          ++alias_pairs;
          violations += !intersects(un[i], un[j]);
        }
  }
  return {violations == 0, std::to_string(kCorpus) + " programs, " + std::to_string(alias_pairs) +
                               " Andersen alias pairs, " + std::to_string(violations) +
                               " violations; k-monotonicity counterexamples (reported, not failed): " +
                               std::to_string(non_monotone)};
}

Outcome named_examples() {
  const char *identity =
      "func @id(%x) {\nentry:\n  ret %x\n}\n"
      "func @main() {\nentry:\n  %a = alloc A\n  %b = alloc B\n  %x = call @id(%a)\n  %y = call @id(%b)\n  ret\n}\n";
  const char *double_store =
      "func @main() {\nentry:\n  %p = alloc P\n  %a = alloc A\n  %b = alloc B\n  store %a, %p\n  store %b, %p\n"
      "  %q = load %p\n  ret\n}\n";
  auto ask = [](const char *text, AnalysisKind kind, std::optional<int> k, const char *script) {
    RunConfig cfg;
    cfg.analysis = kind;
    cfg.k = k;
    return run_queries(run_analysis(load_module(text), cfg, ""), script);
  };
  using Lines = std::vector<std::string>;
  const Lines precise{"PTS %x: {A}", "PTS %y: {B}"}, merged{"PTS %x: {A, B}", "PTS %y: {A, B}"};
  std::vector<std::pair<std::string, bool>> checks{
      {"id kcfa k=1", ask(identity, AnalysisKind::KCFA, 1, "PTS %x\nPTS %y") == precise},
      {"id fscs k=1", ask(identity, AnalysisKind::FSCS, 1, "PTS %x\nPTS %y") == precise},
      {"id fici", ask(identity, AnalysisKind::FICI, std::nullopt, "PTS %x\nPTS %y") == merged},
      {"double-store fs", ask(double_store, AnalysisKind::FS, std::nullopt, "PTS %q") == Lines{"PTS %q: {B}"}},
      {"double-store fici", ask(double_store, AnalysisKind::FICI, std::nullopt, "PTS %q") == Lines{"PTS %q: {A, B}"}},
  };
  Outcome o;
  for (const auto &[name, ok] : checks) {
    o.pass &= ok;
    o.detail += (o.detail.empty() ? "" : ", ") + name + (ok ? " ok" : " WRONG");
  }
  return o;
}

Outcome bench_substitute() {
  const size_t programs = 20;
  SolverConfig naive = uncapped(SolverConfig::reference()), hvn = naive, wave = naive, diff = naive;
  hvn.offline = OfflineMode::HVN;
  wave.strategy = Strategy::Wave;
  diff.strategy = Strategy::Diff;
  BenchOptions opts;
  opts.runs = 1;
  opts.warmup = 0;
  size_t fewer_nodes = 0, wave_ok = 0, diff_ok = 0, min_size = SIZE_MAX;
  for (uint64_t seed = 1; seed <= programs; ++seed) {
    auto m = load_module(generate_program(bench_profile(seed, 5000)));
    min_size = std::min(min_size, m->instruction_count());
    auto rows = bench_module("gen-" + std::to_string(seed), m, {naive, hvn, wave, diff}, opts);
    fewer_nodes += rows[1].graph_nodes < rows[0].graph_nodes;
    wave_ok += rows[2].propagations <= rows[0].propagations;
    diff_ok += rows[3].propagations <= rows[0].propagations;
  }
  auto enough = [&](size_t n) { return n * 10 >= programs * 9; };
  std::ostringstream d;
  d << programs << " programs of >=" << min_size << " instructions; HVN fewer graph nodes on " << fewer_nodes
    << ", Wave <= Naive propagations on " << wave_ok << ", Diff <= Naive on " << diff_ok;
  return {min_size >= 5000 && enough(fewer_nodes) && enough(wave_ok) && enough(diff_ok), d.str()};
}

// Exhaustive post-dominance over the augmented graph, as in the unit tests.
bool reaches(const std::vector<std::vector<uint32_t>> &g, uint32_t from, uint32_t target, uint32_t removed) {
  if (from == removed) return false;
  std::vector<bool> seen(g.size(), false);
  std::deque<uint32_t> work{from};
  seen[from] = true;
  while (!work.empty()) {
    uint32_t v = work.front();
    work.pop_front();
    if (v == target) return true;
    for (uint32_t s : g[v])
      if (s != removed && !seen[s]) seen[s] = true, work.push_back(s);
  }
  return false;
}

std::set<std::pair<uint32_t, uint32_t>> cd_oracle(const std::vector<std::vector<uint32_t>> &succ) {
  const uint32_t n = static_cast<uint32_t>(succ.size()), exit = n;
  std::vector<std::vector<uint32_t>> g(n + 1);
  for (uint32_t a = 0; a < n; ++a) {
    g[a] = succ[a];
    if (succ[a].empty()) g[a].push_back(exit);
  }
  std::vector<uint32_t> stuck;
  for (uint32_t a = 0; a < n; ++a)
    if (!reaches(g, a, exit, kNone)) stuck.push_back(a);
  for (uint32_t a : stuck) g[a].push_back(exit);
  auto pdom = [&](uint32_t y, uint32_t z) { return y == z || !reaches(g, z, exit, y); };
  std::set<std::pair<uint32_t, uint32_t>> out;
  for (uint32_t x = 0; x < n; ++x) {
    std::set<uint32_t> ss(succ[x].begin(), succ[x].end());
    if (ss.size() < 2) continue;
    for (uint32_t y = 0; y < n; ++y) {
      if (y != x && pdom(y, x)) continue;
      for (uint32_t z : ss)
        if (pdom(y, z)) {
          out.insert({x, y});
          break;
        }
    }
  }
  return out;
}

Outcome memory_ssa_pdg() {
  size_t violations = 0, cfgs = 0, loads = 0;
  auto check_cd = [&](const std::vector<std::vector<uint32_t>> &succ) {
    ++cfgs;
    auto cd = control_dependences(succ);
    std::set<std::pair<uint32_t, uint32_t>> got(cd.begin(), cd.end());
    violations += got != cd_oracle(succ);
  };
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 5000; ++i) {
    uint32_t n = 1 + static_cast<uint32_t>(rng() % 10);
    std::vector<std::vector<uint32_t>> g(n);
    for (auto &s : g)
      for (uint64_t e = rng() % 3; e > 0; --e) s.push_back(static_cast<uint32_t>(rng() % n));
    check_cd(g);
  }
  for (uint64_t seed = 1; seed <= kCorpus; ++seed) {
    auto m = corpus(seed);
    for (uint32_t f = 0; f < m->functions.size(); ++f) {
      CFG cfg = build_cfg(*m, f);
      if (cfg.size() <= 10) check_cd(cfg.succ);
    }
    AnalysisResult r(solve(generate(m), fast()), Provenance{});
    MemorySSAForm ssa = build_memory_ssa(r);
    std::set<std::tuple<uint32_t, uint32_t, uint32_t>> versions;
    for (const MemoryDef &d : ssa.defs) violations += !versions.insert({d.function, d.object, d.version}).second;
    PDG pdg = build_pdg(r, ssa);
    for (InstrId i = 0; i < m->instruction_count(); ++i) {
      const Instruction &in = m->instr(i);
      if (in.op != Opcode::Load && !in.is_call()) continue;
      const ModRef &mr = r.mod_ref(i);
      size_t mus = 0;
      for (auto it = ssa.mu.lower_bound({i, 0}); it != ssa.mu.end() && it->first.first == i; ++it) ++mus;
      violations += mus != mr.reads.size();
      if (in.op != Opcode::Load) continue;
      ++loads;
      auto back = slice(pdg, i, SliceDirection::Backward);
      for (uint32_t o : mr.reads)
        for (InstrId d : defining_instructions(ssa, ssa.mu.at({i, o})))
          violations += !std::binary_search(back.begin(), back.end(), d);
    }
  }
  return {violations == 0, std::to_string(cfgs) + " CFGs of <=10 nodes against the path oracle, " +
                               std::to_string(loads) + " loads sliced, " + std::to_string(violations) +
                               " violations"};
}

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int sh(const std::string &cmd) {
  int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

Outcome determinism() {
  fs::path dir = fs::temp_directory_path() / ("pta_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = PTA_CLI;
  size_t runs = 0, differing = 0, failed = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    fs::path a = dir / "a.pir", b = dir / "b.pir";
    std::string gen = cli + " gen --seed " + std::to_string(seed) + " --size " + std::to_string(40 * seed) + " -o ";
    failed += sh(gen + a.string()) != 0;
    failed += sh(gen + b.string()) != 0;
    differing += read_file(a) != read_file(b) || read_file(a).empty();
    for (const char *mode : {"fici", "steens", "kcfa", "fs", "fscs"}) {
      fs::path d1 = dir / "d1.json", d2 = dir / "d2.json";
      std::string base = cli + " analyze " + a.string() + " --analysis " + mode + " --max-props 1000000000000";
      fs::remove(d1), fs::remove(d2);
      failed += sh(base + " --dump " + d1.string()) != 0;
      failed += sh(base + " --dump " + d2.string()) != 0;
      ++runs;
      differing += read_file(d1) != read_file(d2) || read_file(d1).empty();
    }
  }
  fs::remove_all(dir);
  return {differing == 0 && failed == 0, "5 generated programs x 5 modes analyzed twice, 5 seeds generated twice; " +
                                             std::to_string(differing) + " differing outputs, " +
                                             std::to_string(failed) + " failed commands"};
}

}  // namespace

int main() {
  struct Criterion {
    const char *name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"configuration equivalence", configuration_equivalence},
      {"soundness against the interpreter", soundness},
      {"precision lattice", precision_lattice},
      {"named examples", named_examples},
      {"benchmark substitute", bench_substitute},
      {"MemorySSA/PDG structure", memory_ssa_pdg},
      {"determinism", determinism},
  };
  bool all = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all &= o.pass;
    std::printf("%s %zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
