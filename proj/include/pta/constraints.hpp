// Constraint language shared by the subset-based solvers.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pta/ir.hpp"

namespace pta {

using NodeId = uint32_t;
inline constexpr NodeId kNoNode = UINT32_MAX;
inline constexpr uint32_t kNone = UINT32_MAX;

enum class NodeKind : uint8_t { Var, Cell };
enum class ObjectKind : uint8_t { AllocSite, Global, Function };

struct ObjectInfo {
  ObjectKind kind = ObjectKind::AllocSite;
  /// Instruction id for alloc sites, global index or function index otherwise.
  uint32_t origin = 0;
  /// Heap context id (0 = empty context).
  uint32_t context = 0;
  NodeId first_cell = 0;
};

struct NodeInfo {
  NodeKind kind = NodeKind::Var;
  /// Var: owning function and local index (kRetSlot for the return slot).
  uint32_t function = kNone;
  uint32_t local = kNone;
  /// Var: calling context of the owning clone (0 = empty).
  uint32_t context = 0;
  /// Cell: object and field.
  uint32_t object = kNone;
  uint32_t field = 0;
};

inline constexpr uint32_t kRetSlot = UINT32_MAX - 1;

/// Dense numbering of pointer variables and abstract memory cells. Every
/// object owns max_field+1 consecutive cells; a points-to key is the id of a
/// cell.
class NodeTable {
 public:
  NodeTable(std::shared_ptr<const PointerModule> module);

  const PointerModule &module() const { return *module_; }
  std::shared_ptr<const PointerModule> module_ptr() const { return module_; }
  int max_field() const { return module_->max_field; }

  size_t size() const { return nodes_.size(); }
  const NodeInfo &info(NodeId n) const { return nodes_[n]; }
  bool is_cell(NodeId n) const { return nodes_[n].kind == NodeKind::Cell; }

  const std::vector<ObjectInfo> &objects() const { return objects_; }
  const ObjectInfo &object(uint32_t o) const { return objects_[o]; }

  NodeId add_var(uint32_t function, uint32_t local, uint32_t context);
  uint32_t add_object(ObjectKind kind, uint32_t origin, uint32_t context);

  NodeId cell(uint32_t object, uint32_t field) const { return objects_[object].first_cell + field; }
  uint32_t object_of(NodeId cell) const { return nodes_[cell].object; }
  uint32_t field_of(NodeId cell) const { return nodes_[cell].field; }
  /// Cell reached by adding `offset` to `cell`'s field; offsets past the
  /// maximum field collapse to field 0.
  NodeId field_offset(NodeId cell, int offset) const;

  /// Function object for function `fn`, or kNone.
  uint32_t function_object(uint32_t fn) const { return fn < fn_objects_.size() ? fn_objects_[fn] : kNone; }
  uint32_t global_object(uint32_t g) const { return global_objects_[g]; }
  /// Function index if `object` is a function object.
  std::optional<uint32_t> function_of_object(uint32_t object) const;

  /// Var lookup for the empty context (context-insensitive tables).
  NodeId var(uint32_t function, uint32_t local) const;
  NodeId ret(uint32_t function) const;
  std::optional<NodeId> var_by_name(uint32_t function, std::string_view local) const;

  /// Display names. Context suffixes are rendered through context_names.
  std::string object_name(uint32_t object) const;
  std::string cell_name(NodeId cell) const;
  std::string node_name(NodeId n) const;

  std::vector<std::string> context_names{""};

 private:
  std::shared_ptr<const PointerModule> module_;
  std::vector<NodeInfo> nodes_;
  std::vector<ObjectInfo> objects_;
  std::vector<uint32_t> fn_objects_;
  std::vector<uint32_t> global_objects_;
  std::vector<std::vector<NodeId>> ci_vars_;  // function -> local -> node (context 0)
  std::vector<NodeId> ci_ret_;
};

/// Context-insensitive node table: one var per (function, local), one return
/// slot per function, and the objects of all globals, functions and alloc
/// sites (in that order).
std::shared_ptr<const NodeTable> build_node_table(std::shared_ptr<const PointerModule> m);

enum class ConstraintKind : uint8_t { AddrOf, Copy, Load, Store, Field };

/// AddrOf: dst ⊇ {src}        (src is a cell)
/// Copy:   dst ⊇ src
/// Load:   dst ⊇ *src
/// Store:  *dst ⊇ src
/// Field:  dst ⊇ {c + offset | c ∈ src}
struct Constraint {
  ConstraintKind kind = ConstraintKind::Copy;
  NodeId dst = 0;
  NodeId src = 0;
  int offset = 0;
  auto operator<=>(const Constraint &) const = default;
};

struct IndirectCall {
  InstrId site = 0;
  NodeId fnptr = 0;
  std::vector<NodeId> args;
  NodeId dest = kNoNode;
  /// Calling context of the clone that contains the call.
  uint32_t context = 0;
};

struct DirectCall {
  InstrId site = 0;
  uint32_t callee = 0;
  uint32_t context = 0;
};

struct FunctionSig {
  std::vector<NodeId> params;
  NodeId ret = kNoNode;
};

class ConstraintSystem {
 public:
  std::shared_ptr<const NodeTable> nodes;
  std::vector<Constraint> constraints;
  std::vector<IndirectCall> icalls;
  std::vector<DirectCall> direct_calls;
  /// Per-function signature of the context-insensitive clone.
  std::vector<FunctionSig> signatures;
  /// Nodes that can gain incoming copy edges while solving (parameters of
  /// address-taken functions, indirect-call results). Offline passes must
  /// not merge these.
  std::vector<bool> dynamic_target;
  /// Offline merge map: node -> representative. Identity unless an offline
  /// pass ran.
  std::vector<NodeId> offline_rep;
  std::vector<std::string> warnings;

  size_t node_count() const { return nodes->size(); }

  void add(Constraint c) { constraints.push_back(c); }
  /// Sorts and removes duplicate constraints, keeping the first occurrence
  /// order stable otherwise.
  void dedup();

  /// Copy constraints binding `target` (a function object) at indirect call
  /// `record`. Returns an empty list on the second request for the same pair
  /// or on arity mismatch (with a warning). Throws AnalysisError if `target`
  /// is not a function object.
  std::vector<Constraint> resolve_indirect_call(size_t record, uint32_t target);

  /// "ADDROF p o" style lines, sorted.
  std::vector<std::string> dump() const;

 private:
  std::set<std::pair<size_t, uint32_t>> resolved_;
};

/// Translates a module into constraints over the context-insensitive node
/// table.
ConstraintSystem generate(std::shared_ptr<const PointerModule> m);

/// Same, reusing an existing table.
ConstraintSystem generate(std::shared_ptr<const NodeTable> table);

std::string constraint_str(const NodeTable &t, const Constraint &c);

}  // namespace pta
