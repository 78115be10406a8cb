#include "pta/constraints.hpp"

#include <algorithm>
#include <unordered_set>

#include "pta/error.hpp"

namespace pta {

//===----------------------------------------------------------------------===//
// NodeTable
//===----------------------------------------------------------------------===//

NodeTable::NodeTable(std::shared_ptr<const PointerModule> module) : module_(std::move(module)) {
  ci_vars_.assign(module_->functions.size(), {});
  ci_ret_.assign(module_->functions.size(), kNoNode);
  fn_objects_.assign(module_->functions.size(), kNone);
  global_objects_.assign(module_->globals.size(), kNone);
}

NodeId NodeTable::add_var(uint32_t function, uint32_t local, uint32_t context) {
  NodeId id = static_cast<NodeId>(nodes_.size());
  NodeInfo info;
  info.kind = NodeKind::Var;
  info.function = function;
  info.local = local;
  info.context = context;
  nodes_.push_back(info);
  if (context == 0 && function != kNone) {
    if (local == kRetSlot) {
      ci_ret_[function] = id;
    } else {
      auto &v = ci_vars_[function];
      if (v.size() <= local) v.resize(local + 1, kNoNode);
      v[local] = id;
    }
  }
  return id;
}

uint32_t NodeTable::add_object(ObjectKind kind, uint32_t origin, uint32_t context) {
  uint32_t id = static_cast<uint32_t>(objects_.size());
  ObjectInfo o;
  o.kind = kind;
  o.origin = origin;
  o.context = context;
  o.first_cell = static_cast<NodeId>(nodes_.size());
  objects_.push_back(o);
  for (int f = 0; f <= max_field(); ++f) {
    NodeInfo info;
    info.kind = NodeKind::Cell;
    info.object = id;
    info.field = static_cast<uint32_t>(f);
    info.context = context;
    nodes_.push_back(info);
  }
  if (context == 0) {
    if (kind == ObjectKind::Function) fn_objects_[origin] = id;
    if (kind == ObjectKind::Global) global_objects_[origin] = id;
  }
  return id;
}

NodeId NodeTable::field_offset(NodeId c, int offset) const {
  const NodeInfo &i = nodes_[c];
  long f = static_cast<long>(i.field) + offset;
  if (f > max_field() || f < 0) f = 0;
  return objects_[i.object].first_cell + static_cast<NodeId>(f);
}

std::optional<uint32_t> NodeTable::function_of_object(uint32_t object) const {
  const ObjectInfo &o = objects_[object];
  if (o.kind != ObjectKind::Function) return std::nullopt;
  return o.origin;
}

NodeId NodeTable::var(uint32_t function, uint32_t local) const { return ci_vars_[function][local]; }
NodeId NodeTable::ret(uint32_t function) const { return ci_ret_[function]; }

std::optional<NodeId> NodeTable::var_by_name(uint32_t function, std::string_view local) const {
  auto idx = module_->local_index(function, local);
  if (!idx) return std::nullopt;
  return var(function, *idx);
}

std::string NodeTable::object_name(uint32_t object) const {
  const ObjectInfo &o = objects_[object];
  std::string base;
  switch (o.kind) {
    case ObjectKind::AllocSite: base = module_->instr(o.origin).symbol; break;
    case ObjectKind::Global: base = "@" + module_->globals[o.origin].name; break;
    case ObjectKind::Function: base = "@" + module_->functions[o.origin].name; break;
  }
  if (o.context != 0) base += context_names[o.context];
  return base;
}

std::string NodeTable::cell_name(NodeId c) const {
  const NodeInfo &i = nodes_[c];
  std::string s = object_name(i.object);
  if (i.field != 0) s += "." + std::to_string(i.field);
  return s;
}

std::string NodeTable::node_name(NodeId n) const {
  const NodeInfo &i = nodes_[n];
  if (i.kind == NodeKind::Cell) return "*" + cell_name(n);
  std::string s = "@" + module_->functions[i.function].name + ":";
  s += i.local == kRetSlot ? std::string("ret") : "%" + module_->locals(i.function)[i.local];
  if (i.context != 0) s += context_names[i.context];
  return s;
}

std::shared_ptr<const NodeTable> build_node_table(std::shared_ptr<const PointerModule> m) {
  auto t = std::make_shared<NodeTable>(m);
  for (uint32_t f = 0; f < m->functions.size(); ++f) {
    for (uint32_t l = 0; l < m->locals(f).size(); ++l) t->add_var(f, l, 0);
    t->add_var(f, kRetSlot, 0);
  }
  for (uint32_t g = 0; g < m->globals.size(); ++g) t->add_object(ObjectKind::Global, g, 0);
  for (uint32_t f = 0; f < m->functions.size(); ++f) t->add_object(ObjectKind::Function, f, 0);
  for (InstrId i = 0; i < m->instruction_count(); ++i)
    if (m->instr(i).op == Opcode::Alloc) t->add_object(ObjectKind::AllocSite, i, 0);
  return t;
}

//===----------------------------------------------------------------------===//
// ConstraintSystem
//===----------------------------------------------------------------------===//

void ConstraintSystem::dedup() {
  std::set<Constraint> seen;
  std::vector<Constraint> out;
  out.reserve(constraints.size());
  for (const auto &c : constraints)
    if (seen.insert(c).second) out.push_back(c);
  constraints = std::move(out);
}

std::vector<Constraint> ConstraintSystem::resolve_indirect_call(size_t record, uint32_t target) {
  auto fn = nodes->function_of_object(target);
  if (!fn) throw AnalysisError("indirect call target " + nodes->object_name(target) + " is not a function");
  if (!resolved_.emplace(record, *fn).second) return {};
  const IndirectCall &call = icalls.at(record);
  const FunctionSig &sig = signatures[*fn];
  if (sig.params.size() != call.args.size()) {
    warnings.push_back("arity mismatch: " + nodes->module().instr_name(call.site) + " passes " +
                       std::to_string(call.args.size()) + " arguments to @" +
                       nodes->module().functions[*fn].name + " which expects " +
                       std::to_string(sig.params.size()));
    return {};
  }
  auto rep = [&](NodeId n) { return offline_rep.empty() ? n : offline_rep[n]; };
  std::vector<Constraint> out;
  for (size_t i = 0; i < sig.params.size(); ++i)
    out.push_back({ConstraintKind::Copy, rep(sig.params[i]), call.args[i], 0});
  if (call.dest != kNoNode) out.push_back({ConstraintKind::Copy, call.dest, rep(sig.ret), 0});
  return out;
}

std::string constraint_str(const NodeTable &t, const Constraint &c) {
  switch (c.kind) {
    case ConstraintKind::AddrOf: return "ADDROF " + t.node_name(c.dst) + " " + t.cell_name(c.src);
    case ConstraintKind::Copy: return "COPY " + t.node_name(c.dst) + " " + t.node_name(c.src);
    case ConstraintKind::Load: return "LOAD " + t.node_name(c.dst) + " " + t.node_name(c.src);
    case ConstraintKind::Store: return "STORE " + t.node_name(c.dst) + " " + t.node_name(c.src);
    case ConstraintKind::Field:
      return "FIELD " + t.node_name(c.dst) + " " + t.node_name(c.src) + " " + std::to_string(c.offset);
  }
  return "?";
}

std::vector<std::string> ConstraintSystem::dump() const {
  std::vector<std::string> lines;
  lines.reserve(constraints.size());
  for (const auto &c : constraints) lines.push_back(constraint_str(*nodes, c));
  std::sort(lines.begin(), lines.end());
  return lines;
}

//===----------------------------------------------------------------------===//
// Generation
//===----------------------------------------------------------------------===//

ConstraintSystem generate(std::shared_ptr<const PointerModule> m) { return generate(build_node_table(m)); }

ConstraintSystem generate(std::shared_ptr<const NodeTable> table) {
  const PointerModule &m = table->module();
  ConstraintSystem sys;
  sys.nodes = table;
  sys.dynamic_target.assign(table->size(), false);
  sys.offline_rep.resize(table->size());
  for (NodeId n = 0; n < table->size(); ++n) sys.offline_rep[n] = n;

  sys.signatures.resize(m.functions.size());
  for (uint32_t f = 0; f < m.functions.size(); ++f) {
    for (uint32_t p = 0; p < m.functions[f].params.size(); ++p)
      sys.signatures[f].params.push_back(table->var(f, p));
    sys.signatures[f].ret = table->ret(f);
  }

  std::vector<bool> address_taken(m.functions.size(), false);
  auto var = [&](uint32_t f, const std::string &name) { return *table->var_by_name(f, name); };

  uint32_t next_alloc_object = 0;
  std::vector<uint32_t> alloc_objects;
  for (uint32_t o = 0; o < table->objects().size(); ++o)
    if (table->object(o).kind == ObjectKind::AllocSite) alloc_objects.push_back(o);

  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    const Instruction &in = m.instr(id);
    const uint32_t f = m.loc(id).function;
    switch (in.op) {
      case Opcode::Alloc: {
        uint32_t obj = alloc_objects[next_alloc_object++];
        sys.add({ConstraintKind::AddrOf, var(f, in.dest), table->cell(obj, 0), 0});
        break;
      }
      case Opcode::Addr: {
        uint32_t obj;
        if (auto g = m.global_index(in.symbol)) {
          obj = table->global_object(*g);
        } else {
          uint32_t fn = *m.function_index(in.symbol);
          obj = table->function_object(fn);
          address_taken[fn] = true;
        }
        sys.add({ConstraintKind::AddrOf, var(f, in.dest), table->cell(obj, 0), 0});
        break;
      }
      case Opcode::Copy:
        sys.add({ConstraintKind::Copy, var(f, in.dest), var(f, in.operands[0]), 0});
        break;
      case Opcode::Load:
        sys.add({ConstraintKind::Load, var(f, in.dest), var(f, in.operands[0]), 0});
        break;
      case Opcode::Store:
        sys.add({ConstraintKind::Store, var(f, in.operands[1]), var(f, in.operands[0]), 0});
        break;
      case Opcode::Field:
        sys.add({ConstraintKind::Field, var(f, in.dest), var(f, in.operands[0]), in.field_index});
        break;
      case Opcode::Call: {
        uint32_t callee = *m.function_index(in.symbol);
        const FunctionSig &sig = sys.signatures[callee];
        for (size_t i = 0; i < in.operands.size(); ++i)
          sys.add({ConstraintKind::Copy, sig.params[i], var(f, in.operands[i]), 0});
        sys.add({ConstraintKind::Copy, var(f, in.dest), sig.ret, 0});
        sys.direct_calls.push_back({id, callee, 0});
        break;
      }
      case Opcode::ICall: {
        IndirectCall call;
        call.site = id;
        call.fnptr = var(f, in.operands[0]);
        for (size_t i = 1; i < in.operands.size(); ++i) call.args.push_back(var(f, in.operands[i]));
        call.dest = var(f, in.dest);
        sys.dynamic_target[call.dest] = true;
        sys.icalls.push_back(std::move(call));
        break;
      }
      case Opcode::Ret:
        if (!in.operands.empty()) sys.add({ConstraintKind::Copy, table->ret(f), var(f, in.operands[0]), 0});
        break;
      case Opcode::Br:
        break;
    }
  }
  for (uint32_t f = 0; f < m.functions.size(); ++f)
    if (address_taken[f])
      for (NodeId p : sys.signatures[f].params) sys.dynamic_target[p] = true;
  sys.dedup();
  return sys;
}

}  // namespace pta
