// Application layer: run configuration, result dumps and caching, dump
// diffing, benchmarking.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pta/query.hpp"

namespace pta {

inline constexpr const char *kToolVersion = "1.0.0";

struct RunConfig {
  std::string input;
  AnalysisKind analysis = AnalysisKind::FICI;
  /// Only meaningful for kcfa and fscs; defaults to 2 there.
  std::optional<int> k;
  SolverConfig solver;
  /// Set when any solver flag was given explicitly.
  bool solver_flags = false;
  std::string queries;
  std::string dump;
  uint64_t max_steps = 10'000'000;   // flow-sensitive transfer steps
  size_t max_clones = 1'000'000;     // kcfa / fscs clones

  int effective_k() const;
  /// Throws AnalysisError for invalid flag combinations.
  void validate() const;
};

/// "fnv1a64:<16 hex digits>" over the raw bytes.
std::string content_hash(std::string_view bytes);

/// Parses and validates module text; throws AnalysisError carrying every
/// error diagnostic.
std::shared_ptr<const PointerModule> load_module(std::string_view text, std::string_view origin = "");

/// Runs the configured pipeline. `module_hash` is recorded in the provenance.
AnalysisResult run_analysis(std::shared_ptr<const PointerModule> m, const RunConfig &cfg,
                            const std::string &module_hash);

/// Canonical provenance text for (module hash, config); equal strings mean a
/// dump can be reused.
std::string provenance_text(const RunConfig &cfg, const std::string &module_hash);

/// Canonical dump: sorted keys, no timings. Flow-sensitive results also list
/// the IN sets of every reached instruction.
std::string dump_result(const AnalysisResult &r, const RunConfig &cfg);

/// True if `dump_text` is a dump whose provenance equals provenance_text.
bool dump_matches(std::string_view dump_text, const RunConfig &cfg, const std::string &module_hash);

enum class DiffMode { Equal, Subset };
std::optional<DiffMode> parse_diff_mode(std::string_view s);

struct DiffReport {
  std::vector<std::string> lines;
  bool clean() const { return lines.empty(); }
};

/// Compares the points-to and memory tables of two dumps. Subset mode checks
/// a ⊆ b per entry; when either side is object-granular both are compared
/// with fields collapsed. Throws AnalysisError on malformed input.
DiffReport diff_dumps(std::string_view a, std::string_view b, DiffMode mode);

//===----------------------------------------------------------------------===//
// Benchmarking
//===----------------------------------------------------------------------===//

/// Accepts "offline/cycles/strategy/worklist/pts" or any '/'-separated subset
/// of dimension values (e.g. "hvn/wave"); unnamed dimensions keep the
/// reference setting.
std::optional<SolverConfig> parse_solver_config(std::string_view s);

struct BenchOptions {
  int runs = 5;
  int warmup = 1;
  uint64_t max_propagations = 1ull << 40;
};

struct BenchRow {
  std::string program;
  std::string config;
  uint64_t propagations = 0;
  double millis = 0;  // median of runs
  uint64_t graph_nodes = 0;
  uint64_t offline_merged = 0;
};

std::vector<BenchRow> bench_module(const std::string &name, std::shared_ptr<const PointerModule> m,
                                   const std::vector<SolverConfig> &configs, const BenchOptions &opts = {});

struct BenchRatio {
  std::string config;
  double median_propagation_ratio = 0;  // baseline / config: >1 means fewer
  double median_time_ratio = 0;         // baseline / config: >1 means faster
  size_t programs = 0;
  size_t not_worse = 0;                 // programs with propagations <= baseline
};

/// Ratios against `baseline` (a config string appearing in rows).
std::vector<BenchRatio> bench_ratios(const std::vector<BenchRow> &rows, const std::string &baseline);

std::string bench_csv(const std::vector<BenchRow> &rows);
std::string ratio_csv(const std::vector<BenchRatio> &ratios);

}  // namespace pta
