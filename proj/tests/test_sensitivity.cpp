#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <cmath>

#include "pta/error.hpp"
#include "pta/interpreter.hpp"
#include "pta/sensitivity.hpp"
#include "pta/steensgaard.hpp"

using namespace pta;

namespace {

const char *kIdentity =
    "func @id(%x) {\nentry:\n  ret %x\n}\n"
    "func @main() {\nentry:\n  %a = alloc A\n  %b = alloc B\n  %x = call @id(%a)\n  %y = call @id(%b)\n  ret\n}\n";

const char *kDoubleStore = "  %p = alloc P\n  %a = alloc A\n  %b = alloc B\n  store %a, %p\n  store %b, %p\n  %q = load %p";

using Names = std::vector<std::string>;

Names pts(const PointsToSolution &s, const std::string &var) { return names(s.nodes(), s.points_to(var_of(s.nodes(), "main", var))); }

Names in_at(const FlowSolution &s, InstrId id, const std::string &var) {
  auto v = s.in_at(id, var_of(s.nodes(), "main", var));
  return names(s.nodes(), v);
}

InstrId ret_of_main(const PointerModule &m) {
  uint32_t f = *m.function_index("main");
  const Function &fn = m.functions[f];
  return m.instr_id(f, static_cast<uint32_t>(fn.blocks.size() - 1),
                    static_cast<uint32_t>(fn.blocks.back().instrs.size() - 1));
}

}  // namespace

TEST_CASE("identity function: context sensitivity separates the calls") {
  auto m = parse_ok(kIdentity);
  auto ci = solve(generate(m), SolverConfig::reference());
  CHECK(pts(ci, "x") == Names{"A", "B"});
  CHECK(pts(ci, "y") == Names{"A", "B"});

  auto k0 = project_ci(solve_kcfa(m, 0));
  CHECK(pts(k0, "x") == Names{"A", "B"});
  CHECK(k0.same_sets(ci));

  auto k1 = solve_kcfa(m, 1);
  CHECK(pts(project_ci(k1), "x") == Names{"A"});
  CHECK(pts(project_ci(k1), "y") == Names{"B"});
  uint32_t id = *m->function_index("id");
  CHECK(k1.function_contexts[id].size() == 2);

  auto fscs = solve_fscs(m, 1);
  InstrId end = ret_of_main(*m);
  CHECK(in_at(fscs, end, "x") == Names{"A"});
  CHECK(in_at(fscs, end, "y") == Names{"B"});
  CHECK(pts(fscs.project(), "x") == Names{"A"});

  auto fs = solve_flow_sensitive(m);
  CHECK(in_at(fs, end, "x") == Names{"A", "B"});
}

TEST_CASE("double store: strong update at a singleton target") {
  auto m = parse_ok(main_only(kDoubleStore));
  auto fs = solve_flow_sensitive(m);
  CHECK(pts(fs.project(), "q") == Names{"B"});
  CHECK(pts(solve(generate(m), SolverConfig::reference()), "q") == Names{"A", "B"});

  FlowOptions weak;
  weak.strong_updates = false;
  CHECK(pts(solve_flow_sensitive(m, weak).project(), "q") == Names{"A", "B"});
}

TEST_CASE("diamond: meet is union") {
  auto m = parse_ok(
      "func @main() {\nentry:\n  %p = alloc P\n  %a = alloc A\n  %b = alloc B\n  br l, r\n"
      "l:\n  store %a, %p\n  br join\nr:\n  store %b, %p\n  br join\njoin:\n  %q = load %p\n  ret\n}\n");
  auto fs = solve_flow_sensitive(m);
  CHECK(pts(fs.project(), "q") == Names{"A", "B"});
  const NodeTable &t = fs.nodes();
  InstrId load = m->instr_id(0, 3, 0);
  NodeId cell = t.cell(t.object_of(fs.in_at(load, var_of(t, "main", "p"))[0]), 0);
  CHECK(names(t, fs.in_at(load, cell)) == Names{"A", "B"});
}

TEST_CASE("straight-line single assignment: final point equals the flow-insensitive sets") {
  auto m = parse_ok(main_only(
      "  %a = alloc A\n  %b = alloc B\n  %p = alloc P\n  store %a, %p\n  %c = load %p\n  %d = copy %b\n"
      "  %f = field %p, 1\n  store %d, %f\n  %g = load %f"));
  auto fs = solve_flow_sensitive(m);
  auto ci = solve(generate(m), SolverConfig::reference());
  InstrId end = ret_of_main(*m);
  for (const char *v : {"a", "b", "p", "c", "d", "f", "g"}) {
    CAPTURE(v);
    CHECK(in_at(fs, end, v) == pts(ci, v));
  }
}

TEST_CASE("heap cloning uses the allocating context") {
  auto m = parse_ok(
      "func @mk() {\nentry:\n  %o = alloc O\n  ret %o\n}\n"
      "func @main() {\nentry:\n  %a = call @mk()\n  %b = call @mk()\n  ret\n}\n");
  auto k1 = solve_kcfa(m, 1);
  uint32_t main = *m->function_index("main");
  auto a = k1.points_to(main, *m->local_index(main, "a"), 0);
  auto b = k1.points_to(main, *m->local_index(main, "b"), 0);
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK(a[0] != b[0]);
  CHECK(k1.table->object_name(k1.table->object_of(a[0])).rfind("O[", 0) == 0);
  auto proj = project_ci(k1);
  CHECK(pts(proj, "a") == Names{"O"});
  CHECK(pts(proj, "b") == Names{"O"});
}

TEST_CASE("recursion terminates with k-limited contexts") {
  auto m = parse_ok(
      "func @f(%x) {\nentry:\n  %y = call @f(%x)\n  %z = call @f(%y)\n  ret %x\n}\n"
      "func @main() {\nentry:\n  %a = alloc A\n  %r = call @f(%a)\n  ret\n}\n");
  const double sites = 3;
  for (int k = 0; k <= 3; ++k) {
    auto sol = solve_kcfa(m, k);
    uint32_t f = *m->function_index("f");
    double bound = 0;
    for (int l = 0; l <= k; ++l) bound += std::pow(sites, l);
    CHECK(sol.function_contexts[f].size() <= bound);
    CHECK(pts(project_ci(sol), "r") == Names{"A"});
    auto fl = solve_fscs(m, std::min(k, 2));
    CHECK(pts(fl.project(), "r") == Names{"A"});
  }
}

TEST_CASE("caps raise resource errors") {
  auto m = parse_ok(kIdentity);
  KcfaOptions ko;
  ko.max_clones = 1;
  CHECK_THROWS_AS(solve_kcfa(m, 1, SolverConfig::reference(), ko), ResourceLimitError);
  FlowOptions fo;
  fo.max_steps = 2;
  CHECK_THROWS_AS(solve_flow_sensitive(m, fo), ResourceLimitError);
  fo = {};
  fo.max_clones = 1;
  CHECK_THROWS_AS(solve_fscs(m, 1, fo), ResourceLimitError);
}

TEST_CASE("strong-updatable objects") {
  auto m = parse_ok(
      "global @g\n"
      "func @once() {\nentry:\n  %o = alloc ONCE\n  ret\n}\n"
      "func @twice() {\nentry:\n  %o = alloc TWICE\n  ret\n}\n"
      "func @rec() {\nentry:\n  %o = alloc REC\n  %r = call @rec()\n  ret\n}\n"
      "func @main() {\nentry:\n  %a = alloc MAIN\n  %x = call @once()\n  %y = call @twice()\n"
      "  %z = call @twice()\n  %w = call @rec()\n  br loop\nloop:\n  %l = alloc LOOP\n  br loop, out\nout:\n  ret\n}\n");
  auto t = build_node_table(m);
  auto ci = solve(generate(t), SolverConfig::reference());
  auto su = strong_updatable_objects(*t, ci.call_graph());
  std::map<std::string, bool> by_name;
  for (uint32_t o = 0; o < t->objects().size(); ++o) by_name[t->object_name(o)] = su[o];
  CHECK(by_name["@g"]);
  CHECK(by_name["@main"]);
  CHECK(by_name["MAIN"]);
  CHECK(by_name["ONCE"]);
  CHECK_FALSE(by_name["TWICE"]);
  CHECK_FALSE(by_name["REC"]);
  CHECK_FALSE(by_name["LOOP"]);
}

TEST_CASE("context names") {
  auto m = parse_ok(kIdentity);
  ContextTable ct;
  uint32_t c1 = ct.extend(0, m->instr_id(1, 0, 2), 2);
  uint32_t c2 = ct.extend(c1, m->instr_id(1, 0, 3), 2);
  uint32_t c3 = ct.extend(c2, m->instr_id(1, 0, 2), 2);
  CHECK(ct.name(*m, c1) == "[@main:entry:2]");
  CHECK(ct[c3].size() == 2);
  CHECK(ct.extend(0, m->instr_id(1, 0, 2), 0) == 0);
}

TEST_CASE("corpus: degeneracy and precision lattice") {
  size_t non_monotone = 0;
  for (uint64_t seed = 1; seed <= 120; ++seed) {
    CAPTURE(seed);
    auto m = corpus(seed);
    SolverConfig cfg = sweep_config();
    auto ci = solve(generate(m), cfg);
    CHECK(project_ci(solve_kcfa(m, 0, cfg)).same_sets(ci));
    auto k1 = project_ci(solve_kcfa(m, 1, cfg)), k2 = project_ci(solve_kcfa(m, 2, cfg));
    FlowOptions fo;
    fo.call_graph = &ci.call_graph();
    auto fs = solve_flow_sensitive(m, fo).project();
    CHECK(solve_fscs(m, 0, fo).project().same_sets(fs));
    auto f1 = solve_fscs(m, 1, fo).project(), f2 = solve_fscs(m, 2, fo).project();
    auto st = project_sets(solve_unify(m));
    const NodeTable &t = ci.nodes();
    for (NodeId n = 0; n < t.size(); ++n) {
      if (t.is_cell(n)) continue;
      auto a = objects_of(t, ci.points_to(n));
      CHECK(subset(objects_of(t, k1.points_to(n)), a));
      CHECK(subset(objects_of(t, k2.points_to(n)), a));
      CHECK(subset(objects_of(t, fs.points_to(n)), a));
      CHECK(subset(objects_of(t, f2.points_to(n)), objects_of(t, fs.points_to(n))));
      CHECK(subset(objects_of(t, f1.points_to(n)), objects_of(t, fs.points_to(n))));
      CHECK(subset(a, objects_of(t, st.points_to(n))));
      non_monotone += !subset(objects_of(t, k2.points_to(n)), objects_of(t, k1.points_to(n)));
      non_monotone += !subset(objects_of(t, f2.points_to(n)), objects_of(t, f1.points_to(n)));
    }
  }
  MESSAGE("variables where k=2 is less precise than k=1: " << non_monotone);
}

TEST_CASE("corpus: interpreter facts are contained in every mode") {
  for (uint64_t seed = 1; seed <= 120; ++seed) {
    CAPTURE(seed);
    auto m = corpus(seed, true);
    auto t = build_node_table(m);
    Trace tr = interpret(t);
    SolverConfig cfg = sweep_config();
    auto ci = solve(generate(t), cfg);
    std::vector<PointsToSolution> global{ci, project_ci(solve_kcfa(m, 1, cfg)), project_ci(solve_kcfa(m, 2, cfg))};
    auto st = project_sets(solve_unify(m));
    FlowOptions fo;
    fo.call_graph = &ci.call_graph();
    FlowOptions weak = fo;
    weak.strong_updates = false;
    std::vector<FlowSolution> flow;
    flow.push_back(solve_flow_sensitive(m, fo));
    flow.push_back(solve_fscs(m, 1, fo));
    flow.push_back(solve_fscs(m, 2, fo));
    flow.push_back(solve_flow_sensitive(m, weak));
    auto has = [](const auto &v, NodeId c) { return std::find(v.begin(), v.end(), c) != v.end(); };
    for (const VarFact &f : tr.facts) {
      for (const auto &s : global) CHECK(has(s.points_to(f.var), f.cell));
      CHECK(has(st.points_to(f.var), t->cell(t->object_of(f.cell), 0)));
      for (const auto &s : flow) CHECK(has(s.in_at(f.instr, f.var), f.cell));
    }
    for (const MemFact &f : tr.loads) {
      for (const auto &s : global) CHECK(has(s.points_to(f.cell), f.value));
      for (const auto &s : flow) CHECK(has(s.in_at(f.instr, f.cell), f.value));
    }
    // Weak-only mode never loses facts relative to strong updates.
    const FlowSolution &strong = flow[0], &weak_only = flow[3];
    for (NodeId n = 0; n < t->size(); ++n) CHECK(subset(strong.points_to(n), weak_only.points_to(n)));
  }
}
