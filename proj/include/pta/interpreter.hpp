// Concrete small-step interpreter used as a soundness oracle.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pta/constraints.hpp"

namespace pta {

struct InterpOptions {
  uint64_t max_steps = 1'000'000;
  uint32_t max_instances = 10'000;  // per alloc site
  uint32_t max_depth = 2'000;
};

enum class Halt { Finished, NullDeref, BadCall, StepCap, InstanceCap, DepthCap };
const char *to_string(Halt h);

/// `var` held an address inside abstract cell `cell` just before `instr`.
struct VarFact {
  InstrId instr;
  NodeId var;
  NodeId cell;
  auto operator<=>(const VarFact &) const = default;
};

/// The load at `instr` read `value` out of abstract cell `cell`.
struct MemFact {
  InstrId instr;
  NodeId cell;
  NodeId value;
  auto operator<=>(const MemFact &) const = default;
};

/// Which operation of the loading function produced the value a load read:
/// a store of the same activation, the call during which the write happened,
/// or kNone when the write predates the activation (or never happened).
struct LoadSource {
  InstrId load;
  uint32_t object;
  InstrId def;
  auto operator<=>(const LoadSource &) const = default;
};

struct Trace {
  std::vector<VarFact> facts;  // sorted, unique
  std::vector<MemFact> loads;  // sorted, unique
  std::vector<LoadSource> sources;  // sorted, unique
  Halt halt = Halt::Finished;
  uint64_t steps = 0;
  std::string str() const;
};

/// Executes from the entry function. Two-target branches take their first
/// target. Abstract objects are identified by the context-insensitive table.
Trace interpret(std::shared_ptr<const NodeTable> table, const InterpOptions &opts = {});

}  // namespace pta
