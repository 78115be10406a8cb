// Representations derived from a solved analysis: ICFG, MemorySSA, PDG.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pta/query.hpp"

namespace pta {

//===----------------------------------------------------------------------===//
// ICFG
//===----------------------------------------------------------------------===//

struct ICFG {
  enum class EdgeKind { Intra, Call, Return };
  struct Edge {
    InstrId from;
    InstrId to;
    EdgeKind kind;
    auto operator<=>(const Edge &) const = default;
  };
  std::vector<uint32_t> functions;  // reachable from the entry, ascending
  std::vector<InstrId> nodes;       // ascending
  std::vector<Edge> edges;          // sorted, unique

  std::string dot(const PointerModule &m) const;
};
const char *to_string(ICFG::EdgeKind k);

/// Function CFGs of every function reachable from the entry over the solved
/// call graph, plus call edges (site -> callee entry) and return edges
/// (callee ret -> instruction after the site).
ICFG build_icfg(const AnalysisResult &r);

//===----------------------------------------------------------------------===//
// MemorySSA
//===----------------------------------------------------------------------===//

struct MemoryDef {
  enum class Kind { Initial, Chi, Phi };
  Kind kind = Kind::Initial;
  uint32_t function = 0;
  uint32_t object = 0;
  uint32_t version = 0;
  /// Chi: the store or call. Phi: the join instruction it precedes.
  /// Initial: the function's first instruction.
  InstrId instr = 0;
  /// Phi: reaching def per CFG predecessor (the virtual entry counts as the
  /// first predecessor of instruction 0). Chi: the version it may overwrite.
  std::vector<uint32_t> incoming;
};

/// Per-function memory SSA at object granularity. Calls carry mu/chi for the
/// transitive mod/ref of their callees.
struct MemorySSAForm {
  std::shared_ptr<const NodeTable> table;
  std::vector<MemoryDef> defs;
  std::map<std::pair<InstrId, uint32_t>, uint32_t> mu;       // (load or call, object) -> def
  std::map<std::pair<InstrId, uint32_t>, uint32_t> chi;      // (store or call, object) -> def
  std::map<std::pair<InstrId, uint32_t>, uint32_t> phi;      // (join, object) -> def
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> initial;  // (function, object) -> def

  std::string def_name(uint32_t def) const;
};

MemorySSAForm build_memory_ssa(const AnalysisResult &r);
/// The def linked to the mu of `object` at `load`. Throws AnalysisError if
/// the load does not read the object.
const MemoryDef &memory_def_of(const MemorySSAForm &ssa, InstrId load, uint32_t object);
/// Instructions of the chi defs a def stands for: itself for a chi, the
/// flattened phi operands for a phi, none for the initial version.
std::vector<InstrId> defining_instructions(const MemorySSAForm &ssa, uint32_t def);

//===----------------------------------------------------------------------===//
// PDG
//===----------------------------------------------------------------------===//

/// Immediate dominators over `succ` from `root` (kNone for unreachable nodes
/// and for the root itself).
std::vector<uint32_t> dominators(const std::vector<std::vector<uint32_t>> &succ, uint32_t root);

/// Intra-procedural control dependences (branch, dependent) by post-dominance
/// frontiers, with a virtual exit reached from every node without successors
/// (and from nodes that cannot reach one).
std::vector<std::pair<uint32_t, uint32_t>> control_dependences(const std::vector<std::vector<uint32_t>> &succ);

struct PDG {
  enum class EdgeKind { DataLocal, DataMemory, Control, Call, Return };
  struct Edge {
    InstrId from;
    InstrId to;
    EdgeKind kind;
    auto operator<=>(const Edge &) const = default;
  };
  std::vector<InstrId> nodes;
  std::vector<Edge> edges;  // sorted, unique

  std::string dot(const PointerModule &m) const;
};
const char *to_string(PDG::EdgeKind k);

PDG build_pdg(const AnalysisResult &r, const MemorySSAForm &ssa);

enum class SliceDirection { Backward, Forward };
std::vector<InstrId> slice(const PDG &g, InstrId seed, SliceDirection dir);
std::vector<InstrId> slice(const PDG &g, const std::vector<InstrId> &seeds, SliceDirection dir);

}  // namespace pta
