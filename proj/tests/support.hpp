#pragma once

#include <doctest.h>

#include <algorithm>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pta/andersen.hpp"
#include "pta/constraints.hpp"
#include "pta/generator.hpp"
#include "pta/ir.hpp"

inline std::shared_ptr<const pta::PointerModule> parse_ok(const std::string &text, int max_field = 8) {
  pta::ParseResult r = pta::parse_module(text, max_field);
  if (!r.ok()) {
    std::string msg;
    for (const auto &d : r.diagnostics) msg += d.str() + "\n";
    FAIL("parse failed:\n" << msg);
  }
  return std::make_shared<const pta::PointerModule>(std::move(*r.module));
}

/// Wraps a main body: "func @main() { entry: <body> ret }".
inline std::string main_only(const std::string &body) { return "func @main() {\nentry:\n" + body + "\n  ret\n}\n"; }

/// Corpus program `seed`: sizes cycle through 10..200 instructions.
inline std::shared_ptr<const pta::PointerModule> corpus(uint64_t seed, bool deterministic = false) {
  pta::GenOptions g;
  g.seed = seed;
  g.size = 10 + seed % 191;
  g.deterministic = deterministic;
  return parse_ok(pta::generate_program(g));
}

/// A fast configuration with an effectively unlimited propagation budget, for
/// sweeps over recursive programs.
inline pta::SolverConfig sweep_config() {
  pta::SolverConfig c;
  c.strategy = pta::Strategy::Wave;
  c.cycles = pta::CycleMode::Both;
  c.backend = pta::SetBackendKind::SparseBitVector;
  c.max_propagations = 1ull << 40;
  return c;
}

inline pta::SolverConfig reference_uncapped() {
  pta::SolverConfig c = pta::SolverConfig::reference();
  c.max_propagations = 1ull << 40;
  return c;
}

/// Objects of a cell set, ascending and unique.
inline std::vector<uint32_t> objects_of(const pta::NodeTable &t, std::span<const pta::NodeId> cells) {
  std::vector<uint32_t> o;
  for (pta::NodeId c : cells) o.push_back(t.object_of(c));
  std::sort(o.begin(), o.end());
  o.erase(std::unique(o.begin(), o.end()), o.end());
  return o;
}

template <class A, class B>
bool subset(const A &a, const B &b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline std::vector<std::string> names(const pta::NodeTable &t, std::span<const pta::NodeId> cells) {
  std::vector<std::string> out;
  for (pta::NodeId c : cells) out.push_back(t.cell_name(c));
  return out;
}

inline pta::NodeId var_of(const pta::NodeTable &t, const std::string &fn, const std::string &local) {
  auto f = t.module().function_index(fn);
  REQUIRE(f.has_value());
  auto v = t.var_by_name(*f, local);
  REQUIRE(v.has_value());
  return *v;
}
