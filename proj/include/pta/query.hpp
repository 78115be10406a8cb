// One query interface over every analysis backend.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pta/andersen.hpp"
#include "pta/sensitivity.hpp"
#include "pta/steensgaard.hpp"

namespace pta {

enum class AnalysisKind { FICI, Steens, KCFA, FS, FSCS };
const char *to_string(AnalysisKind k);
std::optional<AnalysisKind> parse_analysis(std::string_view s);

struct Provenance {
  AnalysisKind kind = AnalysisKind::FICI;
  int k = 0;
  std::string config;
  std::string module_hash;
};

struct ModRef {
  std::vector<uint32_t> reads;   // objects, ascending
  std::vector<uint32_t> writes;
};

/// Read-only adapter over a finalized solution. Point-free queries use the
/// whole-program sets on the context-insensitive node table; flow-sensitive
/// results can additionally be queried at an instruction.
class AnalysisResult {
 public:
  AnalysisResult(PointsToSolution sol, Provenance p);
  AnalysisResult(UnificationSolution sol, Provenance p);
  AnalysisResult(ContextualSolution sol, Provenance p);
  AnalysisResult(FlowSolution sol, Provenance p);

  const Provenance &provenance() const { return prov_; }
  const NodeTable &nodes() const { return global_->nodes(); }
  const PointerModule &module() const { return nodes().module(); }
  std::shared_ptr<const PointerModule> module_ptr() const { return nodes().module_ptr(); }
  /// Whole-program sets on the context-insensitive table.
  const PointsToSolution &global() const { return *global_; }
  const CallGraph &call_graph() const { return global_->call_graph(); }
  bool object_granular() const { return global_->granularity() == PointsToSolution::Granularity::Object; }

  const FlowSolution *flow() const { return flow_.get(); }
  const ContextualSolution *contextual() const { return ctx_.get(); }
  const UnificationSolution *unification() const { return unify_.get(); }

  /// "%p" names a local of the entry function; "@f:%p" of function f;
  /// "@f:ret" the return slot. Throws AnalysisError for unknown names.
  NodeId resolve_var(std::string_view name) const;
  /// "A" (alloc site), "@g" (global) or "@f" (function). Throws AnalysisError.
  uint32_t resolve_object(std::string_view name) const;

  /// Sorted cells; the IN set before `at` when given (flow-sensitive only).
  std::vector<NodeId> pts(NodeId var, std::optional<InstrId> at = std::nullopt) const;
  /// Objects the instruction may read / write; calls include their
  /// transitive callees.
  const ModRef &mod_ref(InstrId id) const { return modref_[id]; }

 private:
  void init();

  Provenance prov_;
  std::shared_ptr<const PointsToSolution> global_;
  std::shared_ptr<const FlowSolution> flow_;
  std::shared_ptr<const ContextualSolution> ctx_;
  std::shared_ptr<const UnificationSolution> unify_;
  std::vector<ModRef> modref_;
};

bool may_alias(const AnalysisResult &r, NodeId p, NodeId q, std::optional<InstrId> at = std::nullopt);
bool may_alias(const AnalysisResult &r, std::string_view p, std::string_view q,
               std::optional<InstrId> at = std::nullopt);
bool pointed_by(const AnalysisResult &r, std::string_view p, std::string_view object);
std::vector<NodeId> points_to_set(const AnalysisResult &r, std::string_view p,
                                  std::optional<InstrId> at = std::nullopt);
/// Every variable that may alias v, including v itself when pts(v) is
/// nonempty. Return slots are not variables.
std::vector<NodeId> alias_set(const AnalysisResult &r, NodeId v);
std::vector<NodeId> alias_set(const AnalysisResult &r, std::string_view v);
ModRef mod_ref(const AnalysisResult &r, InstrId id);

/// Runs a query script (`ALIAS %p %q | PTS %p | PB %p OBJ | ALIASSET %v`,
/// blank lines and '#' comments ignored); one answer line per query.
/// Throws AnalysisError naming the offending line.
std::vector<std::string> run_queries(const AnalysisResult &r, std::string_view script);

}  // namespace pta
