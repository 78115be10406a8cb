#include <algorithm>
#include <set>

#include "pta/error.hpp"
#include "pta/sensitivity.hpp"

namespace pta {

uint32_t ContextTable::intern(std::vector<InstrId> s) {
  if (s.empty()) return 0;
  auto [it, inserted] = index_.emplace(s, static_cast<uint32_t>(strings_.size()));
  if (inserted) strings_.push_back(std::move(s));
  return it->second;
}

uint32_t ContextTable::extend(uint32_t ctx, InstrId site, int k) {
  if (k <= 0) return 0;
  std::vector<InstrId> s = strings_[ctx];
  s.push_back(site);
  if (s.size() > static_cast<size_t>(k)) s.erase(s.begin(), s.end() - k);
  return intern(std::move(s));
}

std::string ContextTable::name(const PointerModule &m, uint32_t id) const {
  if (id == 0) return "";
  std::string s = "[";
  for (size_t i = 0; i < strings_[id].size(); ++i) {
    if (i) s += ",";
    s += m.instr_name(strings_[id][i]);
  }
  return s + "]";
}

std::optional<NodeId> ContextualSolution::var(uint32_t function, uint32_t local, uint32_t context) const {
  auto it = clone_base.find({function, context});
  if (it == clone_base.end()) return std::nullopt;
  const PointerModule &m = table->module();
  if (local == kRetSlot) return it->second + static_cast<NodeId>(m.locals(function).size());
  if (local >= m.locals(function).size()) return std::nullopt;
  return it->second + local;
}

std::span<const NodeId> ContextualSolution::points_to(uint32_t function, uint32_t local, uint32_t context) const {
  auto n = var(function, local, context);
  if (!n) return {};
  return solution->points_to(*n);
}

namespace {

class KcfaBuilder {
 public:
  KcfaBuilder(std::shared_ptr<const PointerModule> m, int k, const KcfaOptions &opts)
      : m_(std::move(m)), k_(k), opts_(opts), table_(std::make_shared<NodeTable>(m_)) {
    for (uint32_t g = 0; g < m_->globals.size(); ++g) table_->add_object(ObjectKind::Global, g, 0);
    for (uint32_t f = 0; f < m_->functions.size(); ++f) table_->add_object(ObjectKind::Function, f, 0);
    address_taken_.assign(m_->functions.size(), false);
    has_clone_.assign(m_->functions.size(), false);
    for (InstrId id = 0; id < m_->instruction_count(); ++id) {
      const Instruction &in = m_->instr(id);
      if (in.op == Opcode::Addr)
        if (auto f = m_->function_index(in.symbol)) address_taken_[*f] = true;
    }
    sys_.nodes = table_;
    sys_.signatures.resize(m_->functions.size());
  }

  ContextualSolution run(const SolverConfig &base) {
    ContextualSolution out;
    out.k = k_;
    auto entry = m_->entry_index();
    if (entry) clone(*entry, 0);
    bool rooted = false;
    std::shared_ptr<PointsToSolution> sol;
    for (;;) {
      drain();
      ++rounds_;
      sol = std::make_shared<PointsToSolution>(solve_round(base));
      if (!requests_.empty()) {
        bind_requests();
        continue;
      }
      if (!rooted) {
        // Unreached functions are analyzed once under the empty context.
        rooted = true;
        bool added = false;
        for (uint32_t f = 0; f < m_->functions.size(); ++f)
          if (!has_clone_[f]) {
            clone(f, 0);
            added = true;
          }
        if (added) continue;
      }
      break;
    }
    table_->context_names.resize(contexts_.size());
    for (uint32_t c = 1; c < contexts_.size(); ++c) table_->context_names[c] = contexts_.name(*m_, c);
    out.contexts = contexts_;
    out.table = table_;
    out.solution = std::move(sol);
    out.function_contexts.assign(m_->functions.size(), {});
    for (const auto &[key, base_node] : clones_) {
      out.function_contexts[key.first].push_back(key.second);
      out.clone_base.emplace(key, base_node);
    }
    for (auto &v : out.function_contexts) std::sort(v.begin(), v.end());
    out.rounds = rounds_;
    out.warnings.assign(warnings_.begin(), warnings_.end());
    return out;
  }

 private:
  struct Pending {
    uint32_t function;
    uint32_t context;
  };

  NodeId clone(uint32_t f, uint32_t ctx) {
    auto it = clones_.find({f, ctx});
    if (it != clones_.end()) return it->second;
    if (clones_.size() >= opts_.max_clones)
      throw ResourceLimitError("context clone limit exceeded (" + std::to_string(opts_.max_clones) +
                               " clones, " + std::to_string(contexts_.size()) + " contexts)");
    NodeId base = static_cast<NodeId>(table_->size());
    const size_t nlocals = m_->locals(f).size();
    for (uint32_t l = 0; l < nlocals; ++l) table_->add_var(f, l, ctx);
    table_->add_var(f, kRetSlot, ctx);
    clones_.emplace(std::make_pair(f, ctx), base);
    has_clone_[f] = true;
    queue_.push_back({f, ctx});
    return base;
  }

  NodeId local(uint32_t f, uint32_t ctx, const std::string &name) const {
    return clones_.at({f, ctx}) + *m_->local_index(f, name);
  }
  NodeId ret_of(uint32_t f, uint32_t ctx) const {
    return clones_.at({f, ctx}) + static_cast<NodeId>(m_->locals(f).size());
  }

  /// Generates constraints for every queued clone.
  void drain() {
    while (!queue_.empty()) {
      Pending p = queue_.front();
      queue_.erase(queue_.begin());
      emit(p.function, p.context);
    }
  }

  void emit(uint32_t f, uint32_t ctx) {
    const Function &fn = m_->functions[f];
    auto var = [&](const std::string &n) { return local(f, ctx, n); };
    auto first = m_->entry_instr(f);
    if (!first) return;
    size_t count = 0;
    for (const auto &b : fn.blocks) count += b.instrs.size();
    for (InstrId id = *first; id < *first + count; ++id) {
      const Instruction &in = m_->instr(id);
      switch (in.op) {
        case Opcode::Alloc: {
          uint32_t obj = table_->add_object(ObjectKind::AllocSite, id, ctx);
          add({ConstraintKind::AddrOf, var(in.dest), table_->cell(obj, 0), 0});
          break;
        }
        case Opcode::Addr: {
          uint32_t obj;
          if (auto g = m_->global_index(in.symbol)) {
            obj = table_->global_object(*g);
          } else {
            obj = table_->function_object(*m_->function_index(in.symbol));
          }
          add({ConstraintKind::AddrOf, var(in.dest), table_->cell(obj, 0), 0});
          break;
        }
        case Opcode::Copy: add({ConstraintKind::Copy, var(in.dest), var(in.operands[0]), 0}); break;
        case Opcode::Load: add({ConstraintKind::Load, var(in.dest), var(in.operands[0]), 0}); break;
        case Opcode::Store: add({ConstraintKind::Store, var(in.operands[1]), var(in.operands[0]), 0}); break;
        case Opcode::Field:
          add({ConstraintKind::Field, var(in.dest), var(in.operands[0]), in.field_index});
          break;
        case Opcode::Call: {
          uint32_t g = *m_->function_index(in.symbol);
          uint32_t callee_ctx = contexts_.extend(ctx, id, k_);
          NodeId base = clone(g, callee_ctx);
          for (size_t i = 0; i < in.operands.size(); ++i)
            add({ConstraintKind::Copy, base + static_cast<NodeId>(i), var(in.operands[i]), 0});
          add({ConstraintKind::Copy, var(in.dest), ret_of(g, callee_ctx), 0});
          sys_.direct_calls.push_back({id, g, ctx});
          break;
        }
        case Opcode::ICall: {
          IndirectCall call;
          call.site = id;
          call.fnptr = var(in.operands[0]);
          for (size_t i = 1; i < in.operands.size(); ++i) call.args.push_back(var(in.operands[i]));
          call.dest = var(in.dest);
          call.context = ctx;
          sys_.icalls.push_back(std::move(call));
          break;
        }
        case Opcode::Ret:
          if (!in.operands.empty()) add({ConstraintKind::Copy, ret_of(f, ctx), var(in.operands[0]), 0});
          break;
        case Opcode::Br: break;
      }
    }
  }

  void add(Constraint c) {
    if (seen_.insert(c).second) sys_.constraints.push_back(c);
  }

  /// Binding of an indirect call to an existing clone, or nullopt after
  /// recording a clone request for the next round.
  std::optional<std::vector<Constraint>> bind(const IndirectCall &call, uint32_t fn,
                                              const std::vector<NodeId> *rep) {
    uint32_t ctx = contexts_.extend(call.context, call.site, k_);
    auto it = clones_.find({fn, ctx});
    if (it == clones_.end()) return std::nullopt;
    auto r = [&](NodeId n) { return rep ? (*rep)[n] : n; };
    std::vector<Constraint> out;
    for (size_t i = 0; i < call.args.size(); ++i)
      out.push_back({ConstraintKind::Copy, r(it->second + static_cast<NodeId>(i)), call.args[i], 0});
    out.push_back({ConstraintKind::Copy, call.dest, r(ret_of(fn, ctx)), 0});
    return out;
  }

  PointsToSolution solve_round(const SolverConfig &base) {
    ConstraintSystem s = sys_;
    s.dynamic_target.assign(table_->size(), false);
    s.offline_rep.resize(table_->size());
    for (NodeId n = 0; n < table_->size(); ++n) s.offline_rep[n] = n;
    for (const auto &[key, base_node] : clones_)
      if (address_taken_[key.first])
        for (NodeId p = 0; p < m_->functions[key.first].params.size(); ++p) s.dynamic_target[base_node + p] = true;
    for (const auto &c : s.icalls) s.dynamic_target[c.dest] = true;
    // Only the arity of a signature is consulted through a custom resolver.
    for (uint32_t f = 0; f < m_->functions.size(); ++f)
      s.signatures[f].params.assign(m_->functions[f].params.size(), 0), s.signatures[f].ret = 0;

    SolveOptions so;
    std::set<std::pair<size_t, uint32_t>> answered;
    so.resolver = [&](ConstraintSystem &sys, size_t record, uint32_t object) -> std::vector<Constraint> {
      auto fn = table_->function_of_object(object);
      if (!fn) throw AnalysisError("indirect call target " + table_->object_name(object) + " is not a function");
      if (!answered.emplace(record, *fn).second) return {};
      const IndirectCall &call = sys.icalls[record];
      if (m_->functions[*fn].params.size() != call.args.size()) {
        warnings_.insert("arity mismatch: " + m_->instr_name(call.site) + " passes " +
                         std::to_string(call.args.size()) + " arguments to @" + m_->functions[*fn].name +
                         " which expects " + std::to_string(m_->functions[*fn].params.size()));
        return {};
      }
      auto b = bind(call, *fn, &sys.offline_rep);
      if (b) return *b;
      requests_.emplace(record, *fn);
      return {};
    };
    return solve(std::move(s), base, so);
  }

  void bind_requests() {
    auto requests = std::move(requests_);
    requests_.clear();
    for (const auto &[record, fn] : requests) {
      const IndirectCall &call = sys_.icalls[record];
      clone(fn, contexts_.extend(call.context, call.site, k_));
      auto binding = bind(call, fn, nullptr);
      for (const Constraint &c : *binding) add(c);
    }
  }

  std::shared_ptr<const PointerModule> m_;
  int k_;
  KcfaOptions opts_;
  std::shared_ptr<NodeTable> table_;
  ContextTable contexts_;
  ConstraintSystem sys_;
  std::set<Constraint> seen_;
  std::map<std::pair<uint32_t, uint32_t>, NodeId> clones_;
  std::vector<bool> has_clone_;
  std::vector<bool> address_taken_;
  std::vector<Pending> queue_;
  std::set<std::pair<size_t, uint32_t>> requests_;
  std::set<std::string> warnings_;
  size_t rounds_ = 0;
};

}  // namespace

ContextualSolution solve_kcfa(std::shared_ptr<const PointerModule> m, int k, const SolverConfig &base,
                              const KcfaOptions &opts) {
  if (k < 0) throw AnalysisError("k must be nonnegative");
  KcfaBuilder b(std::move(m), k, opts);
  return b.run(base);
}

PointsToSolution project_ci(const ContextualSolution &sol) {
  const NodeTable &t = *sol.table;
  auto ci = build_node_table(t.module_ptr());
  const PointerModule &m = t.module();
  std::vector<uint32_t> alloc_object(m.instruction_count(), kNone);
  for (uint32_t o = 0; o < ci->objects().size(); ++o)
    if (ci->object(o).kind == ObjectKind::AllocSite) alloc_object[ci->object(o).origin] = o;

  auto map_object = [&](uint32_t o) {
    const ObjectInfo &info = t.object(o);
    switch (info.kind) {
      case ObjectKind::Global: return ci->global_object(info.origin);
      case ObjectKind::Function: return ci->function_object(info.origin);
      default: return alloc_object[info.origin];
    }
  };
  auto map_node = [&](NodeId n) -> NodeId {
    const NodeInfo &i = t.info(n);
    if (i.kind == NodeKind::Cell) return ci->cell(map_object(i.object), i.field);
    return i.local == kRetSlot ? ci->ret(i.function) : ci->var(i.function, i.local);
  };

  std::vector<std::set<NodeId>> acc(ci->size());
  for (NodeId n = 0; n < t.size(); ++n) {
    auto pts = sol.solution->points_to(n);
    if (pts.empty()) continue;
    auto &dst = acc[map_node(n)];
    for (NodeId c : pts) dst.insert(map_node(c));
  }
  std::vector<NodeId> rep(ci->size());
  std::vector<std::vector<NodeId>> sets(ci->size());
  for (NodeId n = 0; n < ci->size(); ++n) {
    rep[n] = n;
    sets[n].assign(acc[n].begin(), acc[n].end());
  }
  return PointsToSolution(ci, std::move(rep), std::move(sets), sol.solution->call_graph(), sol.solution->stats());
}

}  // namespace pta
