#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <deque>
#include <map>

#include "pta/query.hpp"
#include "pta/steensgaard.hpp"

using namespace pta;

namespace {

// Unification by explicit relabeling: every element carries a class label,
// a join rewrites all labels of one side. Quadratic, obviously correct.
class Relabel {
 public:
  explicit Relabel(size_t n) {
    for (size_t i = 0; i < n; ++i) fresh();
  }
  uint32_t fresh() {
    label_.push_back(static_cast<uint32_t>(label_.size()));
    return label_.back();
  }
  uint32_t target(uint32_t x) {
    auto it = ptr_.find(label_[x]);
    if (it != ptr_.end()) return it->second;
    uint32_t e = fresh();
    ptr_[label_[x]] = e;
    return e;
  }
  void join(uint32_t a, uint32_t b) {
    std::deque<std::pair<uint32_t, uint32_t>> todo{{a, b}};
    while (!todo.empty()) {
      auto [x, y] = todo.front();
      todo.pop_front();
      uint32_t lx = label_[x], ly = label_[y];
      if (lx == ly) continue;
      for (uint32_t &l : label_)
        if (l == ly) l = lx;
      auto px = ptr_.find(lx), py = ptr_.find(ly);
      if (py != ptr_.end()) {
        if (px == ptr_.end()) ptr_[lx] = py->second;
        else todo.push_back({px->second, py->second});
        ptr_.erase(ly);
      }
    }
  }
  uint32_t label(uint32_t x) const { return label_[x]; }
  std::optional<uint32_t> pointee(uint32_t x) const {
    auto it = ptr_.find(label_[x]);
    if (it == ptr_.end()) return std::nullopt;
    return label_[it->second];
  }

 private:
  std::vector<uint32_t> label_;
  std::map<uint32_t, uint32_t> ptr_;
};

struct OracleResult {
  std::vector<std::vector<uint32_t>> pointed;  // var -> objects
  std::vector<uint32_t> object_label;
};

OracleResult oracle(std::shared_ptr<const PointerModule> mp) {
  const PointerModule &m = *mp;
  auto t = build_node_table(mp);
  Relabel u(t->size());
  auto v = [&](uint32_t f, const std::string &name) { return *t->var_by_name(f, name); };
  auto cell0 = [&](uint32_t o) { return t->object(o).first_cell; };
  std::map<InstrId, uint32_t> site_object;
  for (uint32_t o = 0; o < t->objects().size(); ++o)
    if (t->object(o).kind == ObjectKind::AllocSite) site_object[t->object(o).origin] = o;
  std::set<uint32_t> taken;
  for (InstrId id = 0; id < m.instruction_count(); ++id)
    if (m.instr(id).op == Opcode::Addr)
      if (auto f = m.function_index(m.instr(id).symbol)) taken.insert(*f);
  auto bind = [&](uint32_t caller, const Instruction &in, uint32_t callee, size_t first) {
    for (size_t i = 0; i < m.functions[callee].params.size(); ++i)
      u.join(u.target(t->var(callee, static_cast<uint32_t>(i))), u.target(v(caller, in.operands[first + i])));
    u.join(u.target(v(caller, in.dest)), u.target(t->ret(callee)));
  };
  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    const Instruction &in = m.instr(id);
    uint32_t f = m.loc(id).function;
    switch (in.op) {
      case Opcode::Alloc: u.join(u.target(v(f, in.dest)), cell0(site_object[id])); break;
      case Opcode::Addr: {
        auto g = m.global_index(in.symbol);
        uint32_t o = g ? t->global_object(*g) : t->function_object(*m.function_index(in.symbol));
        u.join(u.target(v(f, in.dest)), cell0(o));
        break;
      }
      case Opcode::Copy:
      case Opcode::Field: u.join(u.target(v(f, in.dest)), u.target(v(f, in.operands[0]))); break;
      case Opcode::Load: u.join(u.target(v(f, in.dest)), u.target(u.target(v(f, in.operands[0])))); break;
      case Opcode::Store: u.join(u.target(u.target(v(f, in.operands[1]))), u.target(v(f, in.operands[0]))); break;
      case Opcode::Call: bind(f, in, *m.function_index(in.symbol), 0); break;
      case Opcode::ICall:
        for (uint32_t g : taken)
          if (m.functions[g].params.size() + 1 == in.operands.size()) bind(f, in, g, 1);
        break;
      case Opcode::Ret:
        if (!in.operands.empty()) u.join(u.target(t->ret(f)), u.target(v(f, in.operands[0])));
        break;
      case Opcode::Br: break;
    }
  }
  OracleResult r;
  r.pointed.resize(t->size());
  for (uint32_t o = 0; o < t->objects().size(); ++o) r.object_label.push_back(u.label(cell0(o)));
  for (NodeId n = 0; n < t->size(); ++n) {
    if (t->is_cell(n)) continue;
    if (auto p = u.pointee(n))
      for (uint32_t o = 0; o < t->objects().size(); ++o)
        if (r.object_label[o] == *p) r.pointed[n].push_back(o);
  }
  return r;
}

std::vector<std::string> pts(const PointsToSolution &s, const std::string &var) {
  return names(s.nodes(), s.points_to(var_of(s.nodes(), "main", var)));
}

}  // namespace

TEST_CASE("examples") {
  SUBCASE("copy shares the pointee class") {
    auto m = parse_ok(main_only("  %p = alloc A\n  %q = copy %p"));
    auto sol = project_sets(solve_unify(m));
    CHECK(pts(sol, "p") == std::vector<std::string>{"A"});
    CHECK(pts(sol, "q") == std::vector<std::string>{"A"});
    CHECK(sol.granularity() == PointsToSolution::Granularity::Object);
  }
  SUBCASE("precision gap against inclusion") {
    auto m = parse_ok(main_only("  %p = alloc A\n  %q = alloc B\n  %p = copy %q"));
    auto st = project_sets(solve_unify(m));
    auto an = solve(generate(m), SolverConfig::reference());
    CHECK(pts(st, "p") == std::vector<std::string>{"A", "B"});
    CHECK(pts(st, "q") == std::vector<std::string>{"A", "B"});
    CHECK(pts(an, "q") == std::vector<std::string>{"B"});
  }
  SUBCASE("unrelated allocations stay apart") {
    auto m = parse_ok(main_only("  %x = alloc X\n  %y = alloc Y"));
    AnalysisResult r(solve_unify(m), Provenance{AnalysisKind::Steens, 0, "", ""});
    CHECK_FALSE(may_alias(r, "%x", "%y"));
    CHECK(pts(r.global(), "x") == std::vector<std::string>{"X"});
  }
  SUBCASE("indirect calls bind every address-taken function of matching arity") {
    auto m = parse_ok(
        "func @f(%a) {\ne:\n  ret %a\n}\nfunc @g(%b) {\ne:\n  ret %b\n}\nfunc @h(%c, %d) {\ne:\n  ret %c\n}\n"
        "func @main() {\nentry:\n  %o = alloc O\n  %fp = addr @f\n  %gp = addr @g\n  %hp = addr @h\n"
        "  %r = icall %fp(%o)\n  ret\n}\n");
    auto sol = solve_unify(m);
    const NodeTable &t = sol.nodes();
    auto b = sol.pointed_objects(var_of(t, "g", "b"));
    CHECK(b.size() == 1);
    CHECK(sol.pointed_objects(var_of(t, "h", "c")).empty());
    auto cg = project_sets(sol).call_graph();
    // The projected call graph is still filtered by the pointer's set.
    REQUIRE(cg.size() == 1);
    CHECK(cg.begin()->second.size() == 1);
  }
}

TEST_CASE("union-find matches the relabeling oracle on small programs") {
  size_t checked = 0;
  for (uint64_t seed = 1; checked < 300; ++seed) {
    GenOptions g;
    g.seed = seed;
    g.size = 8 + seed % 25;
    g.vars_per_function = 4;
    auto m = parse_ok(generate_program(g));
    auto t = build_node_table(m);
    size_t vars = 0;
    for (NodeId n = 0; n < t->size(); ++n) vars += !t->is_cell(n);
    if (vars > 20) continue;
    ++checked;
    CAPTURE(seed);
    auto sol = solve_unify(m);
    OracleResult o = oracle(m);
    for (NodeId n = 0; n < t->size(); ++n)
      if (!t->is_cell(n)) CHECK(sol.pointed_objects(n) == o.pointed[n]);
    for (uint32_t a = 0; a < t->objects().size(); ++a)
      for (uint32_t b = 0; b < t->objects().size(); ++b)
        CHECK((sol.class_of(t->object(a).first_cell) == sol.class_of(t->object(b).first_cell)) ==
              (o.object_label[a] == o.object_label[b]));
  }
}

TEST_CASE("corpus: over-approximates inclusion, near-linear work") {
  double worst = 0;
  for (uint64_t seed = 1; seed <= 300; ++seed) {
    CAPTURE(seed);
    auto m = corpus(seed);
    auto us = solve_unify(m);
    AnalysisResult st(us, Provenance{AnalysisKind::Steens, 0, "", ""});
    AnalysisResult an(solve(generate(m), sweep_config()), Provenance{});
    const NodeTable &t = an.nodes();
    std::vector<NodeId> vars;
    for (NodeId n = 0; n < t.size(); ++n)
      if (!t.is_cell(n)) vars.push_back(n);
    for (NodeId n : vars) CHECK(subset(objects_of(t, an.global().points_to(n)), objects_of(t, st.global().points_to(n))));
    for (NodeId a : vars)
      for (NodeId b : vars)
        if (may_alias(an, a, b)) CHECK(may_alias(st, a, b));
    double ratio = static_cast<double>(us.work()) / static_cast<double>(m->instruction_count() + vars.size());
    worst = std::max(worst, ratio);
  }
  MESSAGE("worst union-find work per (instruction + variable): " << worst);
  CHECK(worst <= 16.0);
}
