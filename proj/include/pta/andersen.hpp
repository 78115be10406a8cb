// Subset-constraint solving: offline simplification, online cycle detection,
// propagation strategies and worklist orders. Every configuration computes the
// same least solution.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pta/constraints.hpp"
#include "pta/ptset.hpp"

namespace pta {

enum class OfflineMode { None, HVN, HU };
enum class CycleMode { None, LCD, HCD, Both };
enum class Strategy { Naive, Wave, Deep, Diff };
enum class WorklistOrder { FIFO, LIFO, LRF, TwoLRF, Topo };

const char *to_string(OfflineMode m);
const char *to_string(CycleMode m);
const char *to_string(Strategy s);
const char *to_string(WorklistOrder w);
std::optional<OfflineMode> parse_offline(std::string_view s);
std::optional<CycleMode> parse_cycles(std::string_view s);
std::optional<Strategy> parse_strategy(std::string_view s);
std::optional<WorklistOrder> parse_worklist(std::string_view s);
std::optional<SetBackendKind> parse_backend(std::string_view s);

struct SolverConfig {
  OfflineMode offline = OfflineMode::None;
  CycleMode cycles = CycleMode::None;
  Strategy strategy = Strategy::Naive;
  WorklistOrder worklist = WorklistOrder::FIFO;
  SetBackendKind backend = SetBackendKind::SortedVector;
  uint64_t max_propagations = 10'000'000;
  uint32_t topo_refresh = 1024;
  /// Verify after every step that no points-to set shrank.
  bool check_monotone = false;

  bool uses_lcd() const { return cycles == CycleMode::LCD || cycles == CycleMode::Both; }
  bool uses_hcd() const { return cycles == CycleMode::HCD || cycles == CycleMode::Both; }

  /// "offline/cycles/strategy/worklist/backend"
  std::string str() const;

  /// The reference configuration: no simplification, naive strategy, FIFO,
  /// sorted-vector sets.
  static SolverConfig reference() { return {}; }
  /// Full cross product of the configurable dimensions (480 entries).
  static std::vector<SolverConfig> all();
};

struct SolverStats {
  uint64_t iterations = 0;
  uint64_t propagations = 0;
  uint64_t collapsed = 0;
  uint64_t offline_merged = 0;
  uint64_t waves = 0;
  uint64_t lcd_probes = 0;
  uint64_t graph_nodes = 0;
  double millis = 0;

  /// "propagations=…, collapsed=…, waves=…, millis=…"
  std::string str() const;
};

/// call site -> target functions (sorted).
using CallGraph = std::map<InstrId, std::vector<uint32_t>>;

/// Finalized result of a subset or unification solver. Immutable.
class PointsToSolution {
 public:
  enum class Granularity { Field, Object };

  PointsToSolution(std::shared_ptr<const NodeTable> nodes, std::vector<NodeId> rep,
                   std::vector<std::vector<NodeId>> sets, CallGraph calls, SolverStats stats,
                   Granularity granularity = Granularity::Field);

  const NodeTable &nodes() const { return *nodes_; }
  std::shared_ptr<const NodeTable> nodes_ptr() const { return nodes_; }
  Granularity granularity() const { return granularity_; }

  /// Sorted cell ids. For object-granular solutions only field-0 cells appear.
  std::span<const NodeId> points_to(NodeId n) const { return sets_[rep_[n]]; }
  NodeId representative(NodeId n) const { return rep_[n]; }
  const CallGraph &call_graph() const { return calls_; }
  const SolverStats &stats() const { return stats_; }

  /// Same sets for every node of the table.
  bool same_sets(const PointsToSolution &o) const;

 private:
  std::shared_ptr<const NodeTable> nodes_;
  std::vector<NodeId> rep_;
  std::vector<std::vector<NodeId>> sets_;
  CallGraph calls_;
  SolverStats stats_;
  Granularity granularity_;
};

/// Binds an indirect call to a function object; returns the new copy
/// constraints. The default resolves through
/// ConstraintSystem::resolve_indirect_call.
using IndirectResolver = std::function<std::vector<Constraint>(ConstraintSystem &, size_t record, uint32_t object)>;

/// Per-edge record of the keys pushed along copy edges.
struct PropagationTrace {
  std::map<std::pair<NodeId, NodeId>, std::set<NodeId>> pushed;
};

struct SolveOptions {
  IndirectResolver resolver;
  PropagationTrace *trace = nullptr;
};

class SolveLimitError : public std::runtime_error {
 public:
  SolveLimitError(const std::string &what, SolverStats stats) : std::runtime_error(what), stats(stats) {}
  SolverStats stats;
};

PointsToSolution solve(ConstraintSystem sys, const SolverConfig &cfg, const SolveOptions &opts = {});

//===----------------------------------------------------------------------===//
// Offline simplification
//===----------------------------------------------------------------------===//

struct OfflineResult {
  ConstraintSystem system;
  /// Pointer-equivalence label per node (0 = provably empty).
  std::vector<uint32_t> labels;
  size_t merged = 0;
};

OfflineResult offline_hvn(const ConstraintSystem &sys);
OfflineResult offline_hu(const ConstraintSystem &sys);

/// Hybrid cycle detection table: whenever a key k enters pts(pointer), k is
/// collapsed into target.
struct HcdEntry {
  NodeId pointer;
  NodeId target;
  bool operator==(const HcdEntry &) const = default;
};
std::vector<HcdEntry> offline_hcd(const ConstraintSystem &sys);

//===----------------------------------------------------------------------===//
// Graph primitives used by the solvers
//===----------------------------------------------------------------------===//

/// If the edge src->dst lies on a cycle of `succ`, returns the nodes of the
/// strongly connected component containing it (sorted).
std::optional<std::vector<NodeId>> run_lcd_probe(const std::vector<std::vector<NodeId>> &succ, NodeId src,
                                                 NodeId dst);

struct CondensedGraph {
  std::vector<uint32_t> component;  // node -> component
  std::vector<std::vector<uint32_t>> succ;  // component DAG, deduplicated, sorted
  std::vector<std::vector<NodeId>> members;
};
CondensedGraph scc_collapse(const std::vector<std::vector<NodeId>> &succ);

/// Worklist with a pluggable selection policy. Nodes are kept at most once.
class Worklist {
 public:
  using TopoProvider = std::function<std::vector<uint32_t>()>;

  Worklist(WorklistOrder order, size_t node_count, TopoProvider topo = {}, uint32_t refresh = 1024);

  void push(NodeId n);
  /// Removes and returns the next node according to the policy; records the
  /// firing time used by LRF. Throws std::logic_error when empty.
  NodeId pop();
  bool empty() const;
  size_t size() const;

 private:
  void refresh_topo();

  WorklistOrder order_;
  std::vector<bool> queued_;
  std::deque<NodeId> fifo_;
  std::vector<NodeId> lifo_;
  // (priority, sequence, node)
  using Key = std::tuple<uint64_t, uint64_t, NodeId>;
  std::set<Key> current_, next_;
  std::vector<uint64_t> last_fired_;
  std::vector<uint64_t> seq_;
  std::vector<uint32_t> topo_index_;
  TopoProvider topo_;
  uint32_t refresh_;
  uint64_t tick_ = 0;
  uint64_t pushes_ = 0;
  uint64_t pops_ = 0;
};

}  // namespace pta
