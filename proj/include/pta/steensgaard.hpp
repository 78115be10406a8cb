// Unification-based (equality constraint) points-to analysis.
#pragma once

#include <memory>
#include <vector>

#include "pta/andersen.hpp"
#include "pta/constraints.hpp"

namespace pta {

/// Equivalence classes over pointer variables and abstract objects. Each class
/// has at most one points-to link. Objects are field-insensitive: every cell
/// of an object is represented by its field-0 cell.
class UnificationSolution {
 public:
  UnificationSolution(std::shared_ptr<const NodeTable> nodes, std::vector<uint32_t> cls,
                      std::vector<uint32_t> target, uint64_t work);

  const NodeTable &nodes() const { return *nodes_; }
  std::shared_ptr<const NodeTable> nodes_ptr() const { return nodes_; }

  /// Class of a variable or of the object owning a cell.
  uint32_t class_of(NodeId n) const;
  /// Class the class points to, or kNone.
  uint32_t target_of_class(uint32_t cls) const { return target_[cls]; }
  /// Objects in the pointed-to class of node n, ascending.
  std::vector<uint32_t> pointed_objects(NodeId n) const;
  /// Union and find operations performed while solving.
  uint64_t work() const { return work_; }
  size_t class_count() const;

 private:
  std::shared_ptr<const NodeTable> nodes_;
  std::vector<uint32_t> cls_;     // element -> class (representative)
  std::vector<uint32_t> target_;  // class -> class or kNone
  std::vector<std::vector<uint32_t>> objects_in_;  // class -> objects
  uint64_t work_;
};

UnificationSolution solve_unify(std::shared_ptr<const PointerModule> m);

/// Object-granular projection: pts(v) is the field-0 cell of every object in
/// the class v points to. The call graph binds each indirect call to the
/// matching-arity functions in the projected set.
PointsToSolution project_sets(const UnificationSolution &sol);

}  // namespace pta
