// Miniature pointer IR: module representation, parser, validator, printer and
// per-function control-flow graphs.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pta {

inline constexpr int kDefaultMaxField = 8;

enum class Opcode : uint8_t { Alloc, Addr, Copy, Load, Store, Field, Call, ICall, Ret, Br };

const char *opcode_name(Opcode op);

/// One instruction. Operand meaning depends on the opcode:
///   Alloc   dest = alloc symbol
///   Addr    dest = addr @symbol
///   Copy    dest = copy operands[0]
///   Load    dest = load operands[0]
///   Store   store operands[0], operands[1]        (*operands[1] = operands[0])
///   Field   dest = field operands[0], field_index
///   Call    dest = call @symbol(operands...)
///   ICall   dest = icall operands[0](operands[1..])
///   Ret     ret [operands[0]]
///   Br      br targets[0] [, targets[1]]
struct Instruction {
  Opcode op = Opcode::Ret;
  std::string dest;
  std::string symbol;
  std::vector<std::string> operands;
  std::vector<std::string> targets;
  int field_index = 0;
  int line = 0;
  int column = 0;

  bool is_terminator() const { return op == Opcode::Ret || op == Opcode::Br; }
  bool is_call() const { return op == Opcode::Call || op == Opcode::ICall; }
  bool operator==(const Instruction &o) const {
    return op == o.op && dest == o.dest && symbol == o.symbol && operands == o.operands &&
           targets == o.targets && field_index == o.field_index;
  }
};

struct BasicBlock {
  std::string label;
  std::vector<Instruction> instrs;
  int line = 0;
  bool operator==(const BasicBlock &o) const { return label == o.label && instrs == o.instrs; }
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  std::vector<BasicBlock> blocks;
  int line = 0;
  bool operator==(const Function &o) const {
    return name == o.name && params == o.params && blocks == o.blocks;
  }
};

struct GlobalDecl {
  std::string name;
  int line = 0;
  bool operator==(const GlobalDecl &o) const { return name == o.name; }
};

/// Flat, module-wide instruction identifier.
using InstrId = uint32_t;

struct InstrLoc {
  uint32_t function = 0;
  uint32_t block = 0;
  uint32_t index = 0;
};

/// A parsed module. After finalize() the module carries lookup tables: function
/// and global indices, per-function local variable tables, and a flat
/// numbering of every instruction.
class PointerModule {
 public:
  std::vector<GlobalDecl> globals;
  std::vector<Function> functions;
  std::string entry = "main";
  int max_field = kDefaultMaxField;

  /// Rebuilds the lookup tables. Must be called after structural edits.
  void finalize();

  std::optional<uint32_t> function_index(std::string_view name) const;
  std::optional<uint32_t> global_index(std::string_view name) const;
  std::optional<uint32_t> entry_index() const { return function_index(entry); }

  /// Local variables of a function: parameters first, then every other
  /// assigned name in order of first appearance.
  const std::vector<std::string> &locals(uint32_t fn) const { return locals_[fn]; }
  std::optional<uint32_t> local_index(uint32_t fn, std::string_view name) const;

  size_t instruction_count() const { return locs_.size(); }
  const InstrLoc &loc(InstrId id) const { return locs_[id]; }
  const Instruction &instr(InstrId id) const;
  InstrId instr_id(uint32_t fn, uint32_t block, uint32_t index) const {
    return block_base_[fn][block] + index;
  }
  /// First instruction id of a function, or nullopt if the function is empty.
  std::optional<InstrId> entry_instr(uint32_t fn) const;
  uint32_t block_first(uint32_t fn, uint32_t block) const { return block_base_[fn][block]; }
  std::optional<uint32_t> block_index(uint32_t fn, std::string_view label) const;

  /// Human-readable instruction id: "@fn:block:index".
  std::string instr_name(InstrId id) const;

  bool operator==(const PointerModule &o) const {
    return globals == o.globals && functions == o.functions && entry == o.entry;
  }

 private:
  std::unordered_map<std::string, uint32_t> fn_index_;
  std::unordered_map<std::string, uint32_t> global_index_;
  std::vector<std::vector<std::string>> locals_;
  std::vector<std::unordered_map<std::string, uint32_t>> local_index_;
  std::vector<std::unordered_map<std::string, uint32_t>> block_index_;
  std::vector<std::vector<uint32_t>> block_base_;
  std::vector<InstrLoc> locs_;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  int line = 0;
  int column = 0;
  std::string message;

  bool is_error() const { return severity == Severity::Error; }
  std::string str() const;
  bool operator==(const Diagnostic &) const = default;
};

struct ParseResult {
  std::optional<PointerModule> module;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return module.has_value(); }
};

/// Parses and validates. A module is returned iff there are no error
/// diagnostics; warnings are passed through.
ParseResult parse_module(std::string_view text, int max_field = kDefaultMaxField);

/// Checks every structural invariant. Returns diagnostics in a deterministic
/// order; the list is empty iff the module is well formed and every block is
/// reachable.
std::vector<Diagnostic> validate(const PointerModule &m);

std::string pretty_print(const PointerModule &m);

/// Instruction-level control-flow graph of one function. Node i is the i-th
/// instruction of the function in block order; ids are local to the function.
struct CFG {
  uint32_t function = 0;
  InstrId first = 0;  // module-wide id of node 0
  std::vector<std::vector<uint32_t>> succ;
  std::vector<std::vector<uint32_t>> pred;

  size_t size() const { return succ.size(); }
  size_t edge_count() const;
  /// Nodes that lie on some cycle.
  std::vector<bool> on_cycle() const;
  std::vector<bool> reachable_from_entry() const;
};

CFG build_cfg(const PointerModule &m, uint32_t fn);

}  // namespace pta
