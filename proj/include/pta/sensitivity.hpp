// Context-sensitive (k-CFA cloning), flow-sensitive and combined
// flow- and context-sensitive analyses.
#pragma once

#include <map>
#include <memory>
#include <vector>

#include "pta/andersen.hpp"
#include "pta/constraints.hpp"

namespace pta {

/// Call strings, most recent call site last. Id 0 is the empty context.
class ContextTable {
 public:
  ContextTable() { strings_.push_back({}); }
  /// Id of append(ctx, site) truncated to the last k sites.
  uint32_t extend(uint32_t ctx, InstrId site, int k);
  uint32_t intern(std::vector<InstrId> s);
  const std::vector<InstrId> &operator[](uint32_t id) const { return strings_[id]; }
  size_t size() const { return strings_.size(); }
  /// "[@main:entry:2,@f:entry:0]"; "" for the empty context.
  std::string name(const PointerModule &m, uint32_t id) const;

 private:
  std::vector<std::vector<InstrId>> strings_;
  std::map<std::vector<InstrId>, uint32_t> index_;
};

//===----------------------------------------------------------------------===//
// k-CFA
//===----------------------------------------------------------------------===//

struct KcfaOptions {
  size_t max_clones = 1'000'000;
};

struct ContextualSolution {
  int k = 0;
  ContextTable contexts;
  /// Cloned node table: one var per (function, local, context), one object per
  /// (alloc site, allocating context).
  std::shared_ptr<const NodeTable> table;
  std::shared_ptr<const PointsToSolution> solution;
  /// Reachable contexts per function (ascending ids).
  std::vector<std::vector<uint32_t>> function_contexts;
  /// (function, context) -> first var node of the clone; locals follow in
  /// order, then the return slot.
  std::map<std::pair<uint32_t, uint32_t>, NodeId> clone_base;
  size_t rounds = 0;
  std::vector<std::string> warnings;

  std::optional<NodeId> var(uint32_t function, uint32_t local, uint32_t context) const;
  std::span<const NodeId> points_to(uint32_t function, uint32_t local, uint32_t context) const;
  size_t clone_count() const { return clone_base.size(); }
};

/// Clones variables and allocation sites per k-limited call string. Contexts
/// are discovered as the call graph grows; functions never reached from the
/// entry are analyzed under the empty context so that k=0 reproduces the
/// context-insensitive solution exactly.
ContextualSolution solve_kcfa(std::shared_ptr<const PointerModule> m, int k,
                              const SolverConfig &base = SolverConfig::reference(), const KcfaOptions &opts = {});

/// Union over contexts on the context-insensitive table; heap contexts are
/// dropped.
PointsToSolution project_ci(const ContextualSolution &sol);

//===----------------------------------------------------------------------===//
// Flow-sensitive
//===----------------------------------------------------------------------===//

struct FlowOptions {
  bool strong_updates = true;
  uint64_t max_steps = 10'000'000;
  size_t max_clones = 1'000'000;
  /// Context-insensitive call graph used for cloning and the strong-update
  /// criterion; computed with andersen::solve when null.
  const CallGraph *call_graph = nullptr;
};

/// Objects whose every abstract store targets a single runtime location:
/// globals, functions, and alloc sites that execute at most once per run
/// (block on no CFG cycle, in a function with at most one activation).
std::vector<bool> strong_updatable_objects(const NodeTable &t, const CallGraph &cg);

class FlowSolution {
 public:
  /// key (CI var node of the owning clone, or cell) -> sorted cells.
  using State = std::map<NodeId, std::vector<NodeId>>;

  struct Clone {
    uint32_t function = 0;
    uint32_t context = 0;
    uint32_t first_point = 0;
  };

  int k = 0;
  ContextTable contexts;
  std::shared_ptr<const NodeTable> table;  // context-insensitive
  std::vector<Clone> clones;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> clone_index;  // (function, context) -> clone
  std::vector<State> in, out;  // per point
  std::vector<bool> reached;
  CallGraph calls;
  uint64_t steps = 0;

  const NodeTable &nodes() const { return *table; }
  uint32_t point(uint32_t clone, InstrId id) const;
  /// Union over clones of the IN set of `node` before instruction `id`.
  std::vector<NodeId> in_at(InstrId id, NodeId node) const;
  /// Union over every program point (IN and OUT).
  std::vector<NodeId> points_to(NodeId node) const;
  /// Whole-program unions as a field-granular solution on the CI table.
  PointsToSolution project() const;
};

FlowSolution solve_flow_sensitive(std::shared_ptr<const PointerModule> m, const FlowOptions &opts = {});
/// Functions cloned per k-limited context over the context-insensitive call
/// graph, then the flow-sensitive fixpoint over the expanded ICFG. k=0 is
/// solve_flow_sensitive.
FlowSolution solve_fscs(std::shared_ptr<const PointerModule> m, int k, const FlowOptions &opts = {});

}  // namespace pta
