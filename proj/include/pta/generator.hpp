// Random program generator for test corpora and benchmarks.
#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace pta {

struct GenOptions {
  uint64_t seed = 1;
  /// Approximate number of instructions in the whole module.
  size_t size = 50;
  /// Number of functions; 0 derives it from size.
  size_t functions = 0;
  size_t vars_per_function = 12;
  size_t globals = 2;
  size_t block_size = 6;
  /// Relative weights: alloc, addr, copy, load, store, field, call, icall.
  std::array<unsigned, 8> weights{5, 2, 3, 2, 2, 2, 2, 1};
  /// Probability (per mille) that a block ends with a two-target branch.
  unsigned branch_density = 300;
  bool recursion = true;
  /// Probability (per mille) that a call may target the caller itself or an
  /// earlier function, when recursion is on.
  unsigned recursion_density = 150;
  /// When nonzero, function i only calls functions within this distance of
  /// i, giving call chains instead of a dense call graph.
  size_t call_window = 0;
  /// Straight-line blocks, single-target branches, no recursion, well-typed
  /// indirect calls: every run follows one path and terminates.
  bool deterministic = false;
  int max_field = 8;
};

/// Options for large benchmark programs: short functions calling nearby
/// functions. At default density, programs of thousands of instructions
/// degenerate into every pointer reaching most objects.
GenOptions bench_profile(uint64_t seed, size_t size);

/// Generates a well-formed module in textual form. Identical options give
/// identical text.
std::string generate_program(const GenOptions &opts);

}  // namespace pta
