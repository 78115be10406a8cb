#include "pta/steensgaard.hpp"

#include <algorithm>
#include <chrono>

namespace pta {

namespace {

class Unifier {
 public:
  explicit Unifier(size_t n) {
    for (size_t i = 0; i < n; ++i) fresh();
  }

  uint32_t fresh() {
    uint32_t id = static_cast<uint32_t>(parent_.size());
    parent_.push_back(id);
    rank_.push_back(0);
    target_.push_back(kNone);
    return id;
  }

  uint32_t find(uint32_t x) {
    ++work_;
    uint32_t r = x;
    while (parent_[r] != r) r = parent_[r];
    while (parent_[x] != r) {
      uint32_t next = parent_[x];
      parent_[x] = r;
      x = next;
    }
    return r;
  }

  /// Target class of x, created on demand.
  uint32_t target(uint32_t x) {
    x = find(x);
    if (target_[x] == kNone) {
      uint32_t t = fresh();
      target_[x] = t;
    }
    return find(target_[x]);
  }

  void join(uint32_t a, uint32_t b) {
    std::vector<std::pair<uint32_t, uint32_t>> pending{{a, b}};
    while (!pending.empty()) {
      auto [x, y] = pending.back();
      pending.pop_back();
      x = find(x);
      y = find(y);
      if (x == y) continue;
      ++work_;
      if (rank_[x] < rank_[y]) std::swap(x, y);
      if (rank_[x] == rank_[y]) ++rank_[x];
      parent_[y] = x;
      uint32_t tx = target_[x], ty = target_[y];
      if (tx == kNone) {
        target_[x] = ty;
      } else if (ty != kNone) {
        pending.push_back({tx, ty});
      }
    }
  }

  uint64_t work() const { return work_; }
  size_t size() const { return parent_.size(); }
  uint32_t raw_target(uint32_t x) const { return target_[x]; }

 private:
  std::vector<uint32_t> parent_, rank_, target_;
  uint64_t work_ = 0;
};

}  // namespace

UnificationSolution::UnificationSolution(std::shared_ptr<const NodeTable> nodes, std::vector<uint32_t> cls,
                                         std::vector<uint32_t> target, uint64_t work)
    : nodes_(std::move(nodes)), cls_(std::move(cls)), target_(std::move(target)), work_(work) {
  objects_in_.assign(target_.size(), {});
  for (uint32_t o = 0; o < nodes_->objects().size(); ++o) objects_in_[cls_[nodes_->object(o).first_cell]].push_back(o);
}

uint32_t UnificationSolution::class_of(NodeId n) const {
  if (nodes_->is_cell(n)) n = nodes_->object(nodes_->object_of(n)).first_cell;
  return cls_[n];
}

std::vector<uint32_t> UnificationSolution::pointed_objects(NodeId n) const {
  uint32_t t = target_[class_of(n)];
  if (t == kNone) return {};
  return objects_in_[t];
}

size_t UnificationSolution::class_count() const {
  size_t count = 0;
  for (uint32_t i = 0; i < cls_.size(); ++i) count += cls_[i] == i;
  return count;
}

UnificationSolution solve_unify(std::shared_ptr<const PointerModule> mp) {
  const PointerModule &m = *mp;
  auto table = build_node_table(mp);
  const NodeTable &t = *table;
  Unifier u(t.size());
  auto var = [&](uint32_t f, const std::string &name) { return *t.var_by_name(f, name); };
  auto obj = [&](uint32_t o) { return t.object(o).first_cell; };

  std::vector<uint32_t> alloc_object(m.instruction_count(), kNone);
  for (uint32_t o = 0; o < t.objects().size(); ++o)
    if (t.object(o).kind == ObjectKind::AllocSite) alloc_object[t.object(o).origin] = o;

  std::vector<bool> address_taken(m.functions.size(), false);
  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    const Instruction &in = m.instr(id);
    if (in.op == Opcode::Addr)
      if (auto f = m.function_index(in.symbol)) address_taken[*f] = true;
  }

  auto bind_call = [&](uint32_t caller, const Instruction &in, uint32_t callee, size_t first_arg) {
    const Function &fn = m.functions[callee];
    for (size_t i = 0; i < fn.params.size(); ++i)
      u.join(u.target(t.var(callee, static_cast<uint32_t>(i))), u.target(var(caller, in.operands[first_arg + i])));
    u.join(u.target(var(caller, in.dest)), u.target(t.ret(callee)));
  };

  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    const Instruction &in = m.instr(id);
    const uint32_t f = m.loc(id).function;
    switch (in.op) {
      case Opcode::Alloc: u.join(u.target(var(f, in.dest)), obj(alloc_object[id])); break;
      case Opcode::Addr: {
        uint32_t o;
        if (auto g = m.global_index(in.symbol)) {
          o = t.global_object(*g);
        } else {
          o = t.function_object(*m.function_index(in.symbol));
        }
        u.join(u.target(var(f, in.dest)), obj(o));
        break;
      }
      case Opcode::Copy: u.join(u.target(var(f, in.dest)), u.target(var(f, in.operands[0]))); break;
      case Opcode::Load:
        u.join(u.target(var(f, in.dest)), u.target(u.target(var(f, in.operands[0]))));
        break;
      case Opcode::Store:
        u.join(u.target(u.target(var(f, in.operands[1]))), u.target(var(f, in.operands[0])));
        break;
      case Opcode::Field: u.join(u.target(var(f, in.dest)), u.target(var(f, in.operands[0]))); break;
      case Opcode::Call: bind_call(f, in, *m.function_index(in.symbol), 0); break;
      case Opcode::ICall:
        for (uint32_t g = 0; g < m.functions.size(); ++g)
          if (address_taken[g] && m.functions[g].params.size() + 1 == in.operands.size()) bind_call(f, in, g, 1);
        break;
      case Opcode::Ret:
        if (!in.operands.empty()) u.join(u.target(t.ret(f)), u.target(var(f, in.operands[0])));
        break;
      case Opcode::Br: break;
    }
  }

  std::vector<uint32_t> cls(u.size()), target(u.size(), kNone);
  for (uint32_t i = 0; i < u.size(); ++i) cls[i] = u.find(i);
  for (uint32_t i = 0; i < u.size(); ++i)
    if (cls[i] == i && u.raw_target(i) != kNone) target[i] = u.find(u.raw_target(i));
  uint64_t work = u.work();
  return UnificationSolution(table, std::move(cls), std::move(target), work);
}

PointsToSolution project_sets(const UnificationSolution &sol) {
  const NodeTable &t = sol.nodes();
  const PointerModule &m = t.module();
  std::vector<NodeId> rep(t.size());
  std::vector<std::vector<NodeId>> sets(t.size());
  for (NodeId n = 0; n < t.size(); ++n) {
    rep[n] = n;
    for (uint32_t o : sol.pointed_objects(n)) sets[n].push_back(t.object(o).first_cell);
    std::sort(sets[n].begin(), sets[n].end());
  }
  CallGraph cg;
  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    const Instruction &in = m.instr(id);
    if (in.op == Opcode::Call) {
      cg[id].push_back(*m.function_index(in.symbol));
    } else if (in.op == Opcode::ICall) {
      auto &targets = cg[id];
      NodeId fp = *t.var_by_name(m.loc(id).function, in.operands[0]);
      for (NodeId c : sets[fp])
        if (auto fn = t.function_of_object(t.object_of(c)))
          if (m.functions[*fn].params.size() + 1 == in.operands.size()) targets.push_back(*fn);
      std::sort(targets.begin(), targets.end());
    }
  }
  SolverStats stats;
  stats.iterations = sol.work();
  stats.graph_nodes = sol.class_count();
  return PointsToSolution(sol.nodes_ptr(), std::move(rep), std::move(sets), std::move(cg), stats,
                          PointsToSolution::Granularity::Object);
}

}  // namespace pta
