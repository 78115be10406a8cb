#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace pta;

namespace {

size_t count_errors(const std::vector<Diagnostic> &ds) {
  return std::count_if(ds.begin(), ds.end(), [](const Diagnostic &d) { return d.is_error(); });
}

std::vector<Diagnostic> diagnostics(const std::string &text) { return parse_module(text).diagnostics; }

}  // namespace

TEST_CASE("minimal program parses") {
  auto m = parse_ok("func @main() { entry: %p = alloc A \n ret }");
  REQUIRE(m->functions.size() == 1);
  CHECK(m->instruction_count() == 2);
  CHECK(m->instr(0).op == Opcode::Alloc);
  CHECK(m->instr(0).symbol == "A");
}

TEST_CASE("dangling identifiers are reported with positions") {
  auto ds = diagnostics("func @main() { entry: %p = copy %q \n ret }");
  REQUIRE(count_errors(ds) == 1);
  CHECK(ds[0].message.find("%q") != std::string::npos);

  ds = diagnostics("func @main() {\nentry:\n  %a = alloc A\n  store %a, %b\n  ret\n}");
  REQUIRE(count_errors(ds) == 1);
  CHECK(ds[0].message.find("%b") != std::string::npos);
  CHECK(ds[0].line == 4);
}

TEST_CASE("validation errors") {
  SUBCASE("well formed") {
    ParseResult r = parse_module(main_only("  %p = alloc A"));
    REQUIRE(r.ok());
    CHECK(validate(*r.module).empty());
  }
  SUBCASE("two terminators") {
    CHECK(count_errors(diagnostics("func @main() {\nentry:\n  ret\n  ret\n}")) == 1);
  }
  SUBCASE("direct call arity") {
    auto ds = diagnostics("func @f(%x) {\ne:\n ret %x\n}\nfunc @main() {\nentry:\n  %a = alloc A\n"
                          "  %r = call @f(%a, %a)\n  ret\n}");
    CHECK(count_errors(ds) == 1);
  }
  SUBCASE("field index bound") {
    CHECK(count_errors(diagnostics(main_only("  %p = alloc A\n  %q = field %p, 9"))) == 1);
    CHECK(parse_module(main_only("  %p = alloc A\n  %q = field %p, 9"), 9).ok());
  }
  SUBCASE("duplicates and unresolved names") {
    CHECK(count_errors(diagnostics("global @g\nglobal @g\n" + main_only(""))) >= 1);
    CHECK(count_errors(diagnostics("func @main() {\nentry:\n  br nowhere\n}")) >= 1);
    CHECK(count_errors(diagnostics(main_only("  %p = call @missing()"))) >= 1);
    CHECK(count_errors(diagnostics(main_only("  %p = addr @missing"))) >= 1);
  }
  SUBCASE("syntax error names a position") {
    auto ds = diagnostics("func @main() {\nentry:\n  %p = frob %q\n  ret\n}");
    REQUIRE(count_errors(ds) >= 1);
    CHECK(ds[0].line >= 3);
  }
  SUBCASE("unreachable block is a warning") {
    ParseResult r = parse_module("func @main() {\nentry:\n  ret\ndead:\n  ret\n}");
    REQUIRE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK_FALSE(r.diagnostics[0].is_error());
  }
}

TEST_CASE("comments and whitespace") {
  auto m = parse_ok("; header\nfunc @main() {   ; trailing\nentry:\n  %p = alloc A ; x\n\n  ret\n}\n");
  CHECK(m->instruction_count() == 2);
}

TEST_CASE("cfg shapes") {
  SUBCASE("straight line") {
    auto m = parse_ok(main_only("  %p = alloc A\n  %q = copy %p"));
    CFG g = build_cfg(*m, 0);
    CHECK(g.size() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.pred[0].empty());
  }
  SUBCASE("diamond") {
    auto m = parse_ok("func @main() {\nentry:\n  br l1, l2\nl1:\n  br join\nl2:\n  br join\njoin:\n  ret\n}");
    CFG g = build_cfg(*m, 0);
    REQUIRE(g.size() == 4);
    CHECK(g.succ[0] == std::vector<uint32_t>{1, 2});
    CHECK(g.pred[3].size() == 2);
    // two paths entry -> join
    size_t paths = 0;
    for (uint32_t s : g.succ[0])
      for (uint32_t t : g.succ[s]) paths += t == 3;
    CHECK(paths == 2);
  }
  SUBCASE("self loop") {
    auto m = parse_ok("func @main() {\nentry:\n  br l\nl:\n  %p = alloc A\n  br l, exit\nexit:\n  ret\n}");
    CFG g = build_cfg(*m, 0);
    auto cyc = g.on_cycle();
    CHECK_FALSE(cyc[0]);
    CHECK(cyc[1]);
    CHECK(cyc[2]);
    CHECK_FALSE(cyc[3]);
  }
}

TEST_CASE("pretty printing") {
  auto m = parse_ok(main_only("  %p = alloc A"));
  std::string text = pretty_print(*m);
  CHECK(text.find("  %p = alloc A\n") != std::string::npos);

  auto two = parse_ok("func @b() {\ne:\n  ret\n}\nfunc @main() {\ne:\n  ret\n}\n");
  std::string t2 = pretty_print(*two);
  CHECK(t2.find("@b") < t2.find("@main"));
}

TEST_CASE("corpus: round trip, cfg edge count, deterministic validation") {
  for (uint64_t seed = 1; seed <= 300; ++seed) {
    auto m = corpus(seed, seed % 3 == 0);
    ParseResult again = parse_module(pretty_print(*m));
    REQUIRE(again.ok());
    CHECK(*again.module == *m);
    CHECK(pretty_print(*again.module) == pretty_print(*m));

    for (uint32_t f = 0; f < m->functions.size(); ++f) {
      size_t expected = 0;
      for (const BasicBlock &b : m->functions[f].blocks) {
        expected += b.instrs.size() - 1;  // fallthrough pairs
        const Instruction &last = b.instrs.back();
        if (last.op == Opcode::Br) expected += last.targets.size();
      }
      CHECK(build_cfg(*m, f).edge_count() == expected);
    }
    CHECK(validate(*m).empty());
  }
}

TEST_CASE("diagnostics are deterministic") {
  const std::string bad =
      "global @g\nglobal @g\nfunc @main() {\nentry:\n  %a = copy %x\n  store %a, %y\n  br nowhere\n"
      "dead:\n  %r = call @main(%a)\n  ret\n  ret\n}\n";
  auto first = diagnostics(bad);
  CHECK(first.size() >= 4);
  for (int i = 0; i < 5; ++i) CHECK(diagnostics(bad) == first);
}
