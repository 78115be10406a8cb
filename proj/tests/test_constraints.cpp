#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "pta/error.hpp"

using namespace pta;

namespace {

const char *kProgram =
    "global @g\n"
    "func @id(%x) {\ne:\n  ret %x\n}\n"
    "func @two(%a, %b) {\ne:\n  ret\n}\n"
    "func @main() {\nentry:\n"
    "  %p = alloc A\n  %q = load %p\n  %s = field %p, 2\n  store %q, %p\n"
    "  %f = addr @id\n  %r = icall %f(%p)\n  %c = call @id(%p)\n  ret\n}\n";

}  // namespace

TEST_CASE("per-instruction rules") {
  CHECK(generate(parse_ok(main_only("  %p = alloc A"))).dump() == std::vector<std::string>{"ADDROF @main:%p A"});

  auto load = generate(parse_ok(main_only("  %p = alloc A\n  %q = load %p")));
  auto lines = load.dump();
  CHECK(std::count(lines.begin(), lines.end(), "LOAD @main:%q @main:%p") == 1);

  auto ic = generate(parse_ok("func @id(%x) {\ne:\n  ret %x\n}\nfunc @main() {\nentry:\n  %a = alloc A\n"
                              "  %fp = addr @id\n  %r = icall %fp(%a)\n  ret\n}\n"));
  CHECK(ic.icalls.size() == 1);
  // Only the return inside @id and the two address-of constraints; nothing for the icall yet.
  size_t copies = 0;
  for (const Constraint &c : ic.constraints) copies += c.kind == ConstraintKind::Copy;
  CHECK(copies == 1);
  CHECK(ic.icalls[0].args.size() == 1);
}

TEST_CASE("full mapping and debug dump") {
  auto sys = generate(parse_ok(kProgram));
  CHECK(sys.dump() == std::vector<std::string>{
                          "ADDROF @main:%f @id",
                          "ADDROF @main:%p A",
                          "COPY @id:%x @main:%p",
                          "COPY @id:ret @id:%x",
                          "COPY @main:%c @id:ret",
                          "FIELD @main:%s @main:%p 2",
                          "LOAD @main:%q @main:%p",
                          "STORE @main:%p @main:%q",
                      });
  CHECK(sys.direct_calls.size() == 1);
  CHECK(sys.icalls.size() == 1);
}

TEST_CASE("indirect call resolution") {
  auto sys = generate(parse_ok(kProgram));
  const NodeTable &t = *sys.nodes;
  auto bound = sys.resolve_indirect_call(0, t.function_object(0));
  REQUIRE(bound.size() == 2);
  CHECK(constraint_str(t, bound[0]) == "COPY @id:%x @main:%p");
  CHECK(constraint_str(t, bound[1]) == "COPY @main:%r @id:ret");

  CHECK(sys.resolve_indirect_call(0, t.function_object(0)).empty());

  CHECK(sys.warnings.empty());
  CHECK(sys.resolve_indirect_call(0, t.function_object(1)).empty());
  CHECK(sys.warnings.size() == 1);

  CHECK_THROWS_AS(sys.resolve_indirect_call(0, t.global_object(0)), AnalysisError);
}

TEST_CASE("node table layout") {
  auto m = parse_ok(kProgram);
  auto t = build_node_table(m);
  // One object per global, function and alloc site, each with max_field+1 cells.
  CHECK(t->objects().size() == 1 + 3 + 1);
  for (uint32_t o = 0; o < t->objects().size(); ++o) {
    for (int f = 0; f <= m->max_field; ++f) {
      NodeId c = t->cell(o, f);
      CHECK(t->is_cell(c));
      CHECK(t->object_of(c) == o);
      CHECK(t->field_of(c) == static_cast<uint32_t>(f));
    }
    CHECK(t->field_offset(t->cell(o, 3), 2) == t->cell(o, 5));
    CHECK(t->field_offset(t->cell(o, 3), 6) == t->cell(o, 0));
  }
  CHECK(t->object_name(t->global_object(0)) == "@g");
  CHECK(t->cell_name(t->cell(t->function_object(0), 2)) == "@id.2");
}

TEST_CASE("corpus: linear size, determinism, housed endpoints") {
  for (uint64_t seed = 1; seed <= 300; ++seed) {
    auto m = corpus(seed);
    ConstraintSystem a = generate(m), b = generate(m);
    CHECK(a.constraints == b.constraints);
    CHECK(a.constraints.size() <= 2 * m->instruction_count());
    std::set<Constraint> unique(a.constraints.begin(), a.constraints.end());
    CHECK(unique.size() == a.constraints.size());
    for (const Constraint &c : a.constraints) {
      CHECK(c.dst < a.node_count());
      CHECK(c.src < a.node_count());
      if (c.kind == ConstraintKind::AddrOf) CHECK(a.nodes->is_cell(c.src));
      else CHECK_FALSE(a.nodes->is_cell(c.src));
      CHECK_FALSE(a.nodes->is_cell(c.dst));
    }
    for (const IndirectCall &ic : a.icalls) {
      CHECK(ic.fnptr < a.node_count());
      for (NodeId arg : ic.args) CHECK(arg < a.node_count());
    }
  }
}
