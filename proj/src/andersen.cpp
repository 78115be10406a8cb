#include "pta/andersen.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <unordered_set>

#include "pta/error.hpp"
#include "pta/graph.hpp"

namespace pta {

//===----------------------------------------------------------------------===//
// Configuration
//===----------------------------------------------------------------------===//

const char *to_string(OfflineMode m) {
  switch (m) {
    case OfflineMode::None: return "none";
    case OfflineMode::HVN: return "hvn";
    case OfflineMode::HU: return "hu";
  }
  return "?";
}

const char *to_string(CycleMode m) {
  switch (m) {
    case CycleMode::None: return "none";
    case CycleMode::LCD: return "lcd";
    case CycleMode::HCD: return "hcd";
    case CycleMode::Both: return "both";
  }
  return "?";
}

const char *to_string(Strategy s) {
  switch (s) {
    case Strategy::Naive: return "naive";
    case Strategy::Wave: return "wave";
    case Strategy::Deep: return "deep";
    case Strategy::Diff: return "diff";
  }
  return "?";
}

const char *to_string(WorklistOrder w) {
  switch (w) {
    case WorklistOrder::FIFO: return "fifo";
    case WorklistOrder::LIFO: return "lifo";
    case WorklistOrder::LRF: return "lrf";
    case WorklistOrder::TwoLRF: return "2lrf";
    case WorklistOrder::Topo: return "topo";
  }
  return "?";
}

namespace {
template <class E, size_t N>
std::optional<E> parse_enum(std::string_view s, const E (&values)[N]) {
  for (E v : values)
    if (s == to_string(v)) return v;
  return std::nullopt;
}
}  // namespace

std::optional<OfflineMode> parse_offline(std::string_view s) {
  static const OfflineMode v[] = {OfflineMode::None, OfflineMode::HVN, OfflineMode::HU};
  return parse_enum(s, v);
}
std::optional<CycleMode> parse_cycles(std::string_view s) {
  static const CycleMode v[] = {CycleMode::None, CycleMode::LCD, CycleMode::HCD, CycleMode::Both};
  return parse_enum(s, v);
}
std::optional<Strategy> parse_strategy(std::string_view s) {
  static const Strategy v[] = {Strategy::Naive, Strategy::Wave, Strategy::Deep, Strategy::Diff};
  return parse_enum(s, v);
}
std::optional<WorklistOrder> parse_worklist(std::string_view s) {
  static const WorklistOrder v[] = {WorklistOrder::FIFO, WorklistOrder::LIFO, WorklistOrder::LRF,
                                    WorklistOrder::TwoLRF, WorklistOrder::Topo};
  return parse_enum(s, v);
}
std::optional<SetBackendKind> parse_backend(std::string_view s) {
  if (s == "bitvec") return SetBackendKind::SparseBitVector;
  if (s == "sorted") return SetBackendKind::SortedVector;
  return std::nullopt;
}

std::string SolverConfig::str() const {
  std::string s = to_string(offline);
  s += "/";
  s += to_string(cycles);
  s += "/";
  s += to_string(strategy);
  s += "/";
  s += to_string(worklist);
  s += "/";
  s += backend_name(backend);
  return s;
}

std::vector<SolverConfig> SolverConfig::all() {
  std::vector<SolverConfig> out;
  for (auto off : {OfflineMode::None, OfflineMode::HVN, OfflineMode::HU})
    for (auto cyc : {CycleMode::None, CycleMode::LCD, CycleMode::HCD, CycleMode::Both})
      for (auto st : {Strategy::Naive, Strategy::Wave, Strategy::Deep, Strategy::Diff})
        for (auto wl : {WorklistOrder::FIFO, WorklistOrder::LIFO, WorklistOrder::LRF, WorklistOrder::TwoLRF,
                        WorklistOrder::Topo})
          for (auto be : {SetBackendKind::SparseBitVector, SetBackendKind::SortedVector}) {
            SolverConfig c;
            c.offline = off;
            c.cycles = cyc;
            c.strategy = st;
            c.worklist = wl;
            c.backend = be;
            out.push_back(c);
          }
  return out;
}

std::string SolverStats::str() const {
  std::ostringstream os;
  os << "propagations=" << propagations << ", collapsed=" << collapsed << ", waves=" << waves
     << ", millis=" << millis;
  return os.str();
}

//===----------------------------------------------------------------------===//
// PointsToSolution
//===----------------------------------------------------------------------===//

PointsToSolution::PointsToSolution(std::shared_ptr<const NodeTable> nodes, std::vector<NodeId> rep,
                                   std::vector<std::vector<NodeId>> sets, CallGraph calls, SolverStats stats,
                                   Granularity granularity)
    : nodes_(std::move(nodes)),
      rep_(std::move(rep)),
      sets_(std::move(sets)),
      calls_(std::move(calls)),
      stats_(stats),
      granularity_(granularity) {}

bool PointsToSolution::same_sets(const PointsToSolution &o) const {
  if (rep_.size() != o.rep_.size()) return false;
  for (NodeId n = 0; n < rep_.size(); ++n) {
    auto a = points_to(n), b = o.points_to(n);
    if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) return false;
  }
  return true;
}

//===----------------------------------------------------------------------===//
// Graph primitives
//===----------------------------------------------------------------------===//

std::optional<std::vector<NodeId>> run_lcd_probe(const std::vector<std::vector<NodeId>> &succ, NodeId src,
                                                 NodeId dst) {
  if (src == dst) return std::nullopt;
  // Nodes reachable from dst that can also reach src form, together with
  // src, the SCC through the edge.
  const size_t n = succ.size();
  std::vector<bool> fwd(n, false), bwd(n, false);
  std::vector<NodeId> stack{dst};
  fwd[dst] = true;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId s : succ[v])
      if (!fwd[s]) {
        fwd[s] = true;
        stack.push_back(s);
      }
  }
  if (!fwd[src]) return std::nullopt;
  std::vector<std::vector<NodeId>> pred(n);
  for (NodeId v = 0; v < n; ++v)
    if (fwd[v])
      for (NodeId s : succ[v]) pred[s].push_back(v);
  stack = {src};
  bwd[src] = true;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId p : pred[v])
      if (!bwd[p] && fwd[p]) {
        bwd[p] = true;
        stack.push_back(p);
      }
  }
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v)
    if (fwd[v] && bwd[v]) out.push_back(v);
  return out;
}

CondensedGraph scc_collapse(const std::vector<std::vector<NodeId>> &succ) {
  const uint32_t n = static_cast<uint32_t>(succ.size());
  SCCResult scc = strongly_connected_components(n, [&](uint32_t v) -> const std::vector<NodeId> & { return succ[v]; });
  CondensedGraph g;
  g.component = scc.component;
  g.succ.assign(scc.count, {});
  g.members.assign(scc.count, {});
  for (uint32_t v = 0; v < n; ++v) {
    g.members[scc.component[v]].push_back(v);
    for (NodeId s : succ[v])
      if (scc.component[s] != scc.component[v]) g.succ[scc.component[v]].push_back(scc.component[s]);
  }
  for (auto &s : g.succ) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return g;
}

//===----------------------------------------------------------------------===//
// Solver engine
//===----------------------------------------------------------------------===//

namespace {

template <class Set>
class Engine {
 public:
  Engine(ConstraintSystem sys, const SolverConfig &cfg, const SolveOptions &opts)
      : sys_(std::move(sys)), t_(*sys_.nodes), cfg_(cfg), opts_(opts) {}

  PointsToSolution run() {
    auto start = std::chrono::steady_clock::now();
    if (cfg_.offline != OfflineMode::None) {
      OfflineResult off = cfg_.offline == OfflineMode::HVN ? offline_hvn(sys_) : offline_hu(sys_);
      stats_.offline_merged = off.merged;
      sys_ = std::move(off.system);
    }
    init();
    if (cfg_.strategy == Strategy::Wave) {
      run_wave();
    } else {
      run_worklist();
    }
    stats_.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return finalize();
  }

 private:
  size_t N() const { return t_.size(); }

  NodeId find(NodeId n) {
    NodeId r = n;
    while (parent_[r] != r) r = parent_[r];
    while (parent_[n] != r) {
      NodeId next = parent_[n];
      parent_[n] = r;
      n = next;
    }
    return r;
  }

  void count_propagations(uint64_t k) {
    stats_.propagations += k;
    if (stats_.propagations > cfg_.max_propagations)
      throw SolveLimitError("propagation limit exceeded (" + std::to_string(cfg_.max_propagations) + "); " +
                                stats_.str(),
                            stats_);
  }

  void push(NodeId n) {
    if (wl_) wl_->push(n);
  }

  void trace(NodeId src, NodeId dst, std::span<const uint32_t> keys) {
    if (!opts_.trace) return;
    auto &s = opts_.trace->pushed[{src, dst}];
    s.insert(keys.begin(), keys.end());
  }

  void init() {
    const size_t n = N();
    parent_.resize(n);
    for (NodeId i = 0; i < n; ++i) parent_[i] = sys_.offline_rep[i];
    // Offline reps are roots.
    for (NodeId i = 0; i < n; ++i) parent_[parent_[i]] = parent_[i];
    pts_.assign(n, Set());
    succ_.assign(n, {});
    complex_.assign(n, {});
    icall_of_.assign(n, {});
    hcd_.assign(n, {});
    prop_tok_.resize(n);
    cplx_tok_.resize(n);
    for (NodeId i = 0; i < n; ++i) prop_tok_[i] = cplx_tok_[i] = pts_[i].origin();
    if (cfg_.check_monotone) last_size_.assign(n, 0);

    std::vector<bool> is_rep(n, false);
    for (NodeId i = 0; i < n; ++i) is_rep[find(i)] = true;
    for (NodeId i = 0; i < n; ++i) stats_.graph_nodes += is_rep[i];

    if (cfg_.strategy != Strategy::Wave) {
      Worklist::TopoProvider topo;
      if (cfg_.worklist == WorklistOrder::Topo) topo = [this] { return topo_indices(); };
      wl_.emplace(cfg_.worklist, n, std::move(topo), cfg_.topo_refresh);
    }

    for (const auto &c : sys_.constraints)
      if (c.kind == ConstraintKind::AddrOf) pts_[find(c.dst)].insert(c.src);
    for (const auto &c : sys_.constraints) {
      switch (c.kind) {
        case ConstraintKind::AddrOf: break;
        case ConstraintKind::Copy: add_edge(find(c.src), find(c.dst)); break;
        case ConstraintKind::Load: complex_[find(c.src)].push_back({ConstraintKind::Load, c.dst, 0}); break;
        case ConstraintKind::Store: complex_[find(c.dst)].push_back({ConstraintKind::Store, c.src, 0}); break;
        case ConstraintKind::Field:
          complex_[find(c.src)].push_back({ConstraintKind::Field, c.dst, c.offset});
          break;
      }
    }
    for (size_t r = 0; r < sys_.icalls.size(); ++r) icall_of_[find(sys_.icalls[r].fnptr)].push_back(r);
    for (const auto &d : sys_.direct_calls) calls_.emplace(d.site, d.callee);
    if (cfg_.uses_hcd())
      for (const HcdEntry &e : offline_hcd(sys_)) hcd_[find(e.pointer)].push_back(e.target);
    for (NodeId i = 0; i < n; ++i)
      if (find(i) == i && !pts_[i].empty()) push(i);
  }

  /// Adds the copy edge a->b (representatives) and pushes pts(a) into b.
  bool add_edge(NodeId a, NodeId b) {
    if (a == b) return false;
    if (!edges_.insert((uint64_t{a} << 32) | b).second) return false;
    succ_[a].push_back(b);
    if (!pts_[a].empty()) {
      count_propagations(pts_[a].size());
      if (opts_.trace) trace(a, b, pts_[a].to_vector());
      if (pts_[b].union_with(pts_[a])) {
        push(b);
        return true;
      }
    }
    return true;
  }

  /// Merges the classes of a and b; returns the new representative.
  NodeId unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);  // keep the smaller id as representative
    parent_[b] = a;
    ++stats_.collapsed;
    size_t before = std::max(pts_[a].size(), pts_[b].size());
    pts_[a].union_with(pts_[b]);
    pts_[b] = Set();
    auto append = [](auto &dst, auto &src) {
      dst.insert(dst.end(), src.begin(), src.end());
      src.clear();
      src.shrink_to_fit();
    };
    append(succ_[a], succ_[b]);
    append(complex_[a], complex_[b]);
    append(icall_of_[a], icall_of_[b]);
    append(hcd_[a], hcd_[b]);
    prop_tok_[a] = cplx_tok_[a] = pts_[a].origin();
    if (cfg_.check_monotone && pts_[a].size() < before)
      throw InvariantError("points-to set shrank while collapsing nodes");
    push(a);
    return a;
  }

  /// Normalized successor list of representative n.
  std::vector<NodeId> &successors(NodeId n) {
    auto &s = succ_[n];
    for (auto &m : s) m = find(m);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    s.erase(std::remove(s.begin(), s.end(), n), s.end());
    return s;
  }

  std::vector<uint32_t> topo_indices() {
    const uint32_t n = static_cast<uint32_t>(N());
    std::vector<bool> active(n, false);
    for (NodeId i = 0; i < n; ++i) active[i] = find(i) == i;
    SCCResult scc = strongly_connected_components(
        n, [&](uint32_t v) -> const std::vector<NodeId> & { return successors(v); }, &active);
    std::vector<uint32_t> idx(n, UINT32_MAX);
    for (NodeId i = 0; i < n; ++i)
      if (active[i]) idx[i] = scc.count - 1 - scc.component[i];
    return idx;
  }

  void check_monotone(NodeId n) {
    if (!cfg_.check_monotone) return;
    if (pts_[n].size() < last_size_[n]) throw InvariantError("points-to set shrank during propagation");
    last_size_[n] = pts_[n].size();
  }

  /// Keys of n not yet seen by its complex constraints.
  std::vector<uint32_t> take_complex_keys(NodeId n) {
    std::vector<uint32_t> keys;
    if (cfg_.strategy == Strategy::Naive) {
      keys = pts_[n].to_vector();
    } else {
      auto d = pts_[n].since(cplx_tok_[n]);
      keys.assign(d.begin(), d.end());
    }
    cplx_tok_[n] = pts_[n].snapshot();
    return keys;
  }

  /// Fires hybrid-cycle entries and complex constraints of n for `keys`.
  /// Returns the (possibly new) representative of n.
  NodeId fire(NodeId n, const std::vector<uint32_t> &keys) {
    if (keys.empty()) return n;
    if (!hcd_[n].empty()) {
      std::vector<NodeId> targets = hcd_[n];
      for (uint32_t k : keys)
        for (NodeId t : targets) unite(k, t);
      n = find(n);
    }
    for (size_t ci = 0; ci < complex_[n].size(); ++ci) {
      const ComplexConstraint c = complex_[n][ci];
      for (uint32_t k : keys) {
        switch (c.kind) {
          case ConstraintKind::Load: add_edge(find(k), find(c.other)); break;
          case ConstraintKind::Store: add_edge(find(c.other), find(k)); break;
          case ConstraintKind::Field: {
            NodeId dst = find(c.other);
            count_propagations(1);
            if (pts_[dst].insert(t_.field_offset(k, c.offset))) push(dst);
            break;
          }
          default: break;
        }
      }
    }
    if (!icall_of_[n].empty()) {
      std::vector<uint32_t> records = icall_of_[n];
      for (uint32_t k : keys) {
        uint32_t obj = t_.object_of(k);
        auto fn = t_.function_of_object(obj);
        if (!fn) continue;
        for (uint32_t r : records) {
          const IndirectCall &call = sys_.icalls[r];
          if (call.args.size() == sys_.signatures[*fn].params.size()) calls_.emplace(call.site, *fn);
          std::vector<Constraint> cs =
              opts_.resolver ? opts_.resolver(sys_, r, obj) : sys_.resolve_indirect_call(r, obj);
          for (const Constraint &c : cs) {
            if (c.kind != ConstraintKind::Copy) throw InvariantError("indirect call produced a non-copy constraint");
            add_edge(find(c.src), find(c.dst));
          }
        }
      }
    }
    return find(n);
  }

  /// Pushes pts(n) (or its delta) along copy edges. Returns the representative
  /// of n afterwards (changes if LCD collapsed a cycle through n).
  NodeId propagate(NodeId n, std::vector<NodeId> *changed_out = nullptr) {
    const bool naive = cfg_.strategy == Strategy::Naive;
    std::vector<uint32_t> delta;
    if (!naive) {
      auto d = pts_[n].since(prop_tok_[n]);
      delta.assign(d.begin(), d.end());
      if (delta.empty()) return n;
    } else if (pts_[n].empty()) {
      return n;
    }
    std::vector<NodeId> succs = successors(n);
    for (NodeId m : succs) {
      m = find(m);
      if (m == n) continue;
      bool changed;
      if (naive) {
        count_propagations(pts_[n].size());
        if (opts_.trace) trace(n, m, pts_[n].to_vector());
        changed = pts_[m].union_with(pts_[n]);
      } else {
        count_propagations(delta.size());
        if (opts_.trace) trace(n, m, delta);
        changed = false;
        for (uint32_t k : delta) changed |= pts_[m].insert(k);
      }
      if (changed) {
        push(m);
        if (changed_out) changed_out->push_back(m);
        continue;
      }
      if (cfg_.uses_lcd() && lcd_probed_.insert((uint64_t{n} << 32) | m).second &&
          pts_[n].is_subset_of(pts_[m])) {
        ++stats_.lcd_probes;
        if (auto cycle = probe(n, m)) {
          NodeId r = n;
          for (NodeId v : *cycle) r = unite(r, v);
          return find(r);
        }
      }
    }
    prop_tok_[n] = pts_[n].snapshot();
    return n;
  }

  std::optional<std::vector<NodeId>> probe(NodeId src, NodeId dst) {
    // Restrict the search to representatives reachable from dst.
    std::unordered_map<NodeId, uint32_t> local;
    std::vector<NodeId> order;
    std::vector<NodeId> stack{dst};
    local.emplace(dst, 0);
    order.push_back(dst);
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId s : successors(v)) {
        if (local.emplace(s, static_cast<uint32_t>(order.size())).second) {
          order.push_back(s);
          stack.push_back(s);
        }
      }
    }
    auto it = local.find(src);
    if (it == local.end()) return std::nullopt;
    std::vector<std::vector<NodeId>> sub(order.size());
    for (size_t i = 0; i < order.size(); ++i)
      for (NodeId s : succ_[order[i]]) sub[i].push_back(local.at(s));
    auto cyc = run_lcd_probe(sub, it->second, 0);
    if (!cyc) return std::nullopt;
    std::vector<NodeId> out;
    for (NodeId v : *cyc) out.push_back(order[v]);
    return out;
  }

  void process(NodeId n) {
    n = find(n);
    ++stats_.iterations;
    check_monotone(n);
    n = fire(n, take_complex_keys(n));
    if (cfg_.strategy == Strategy::Deep) {
      deep_propagate(n);
    } else {
      propagate(n);
    }
  }

  void deep_propagate(NodeId n) {
    ++deep_epoch_;
    if (deep_seen_.size() < N()) deep_seen_.assign(N(), 0);
    std::vector<NodeId> stack{n};
    deep_seen_[n] = deep_epoch_;
    while (!stack.empty()) {
      NodeId x = find(stack.back());
      stack.pop_back();
      std::vector<NodeId> changed;
      propagate(x, &changed);
      for (NodeId m : changed) {
        m = find(m);
        if (deep_seen_[m] != deep_epoch_) {
          deep_seen_[m] = deep_epoch_;
          stack.push_back(m);
        }
      }
    }
  }

  void run_worklist() {
    while (!wl_->empty()) {
      NodeId n = wl_->pop();
      if (find(n) != n) continue;
      process(n);
    }
  }

  void run_wave() {
    while (true) {
      ++stats_.waves;
      collapse_cycles();
      std::vector<NodeId> order = topological_order();
      for (NodeId n : order) {
        n = find(n);
        check_monotone(n);
        propagate(n);
      }
      bool changed = false;
      for (NodeId n : order) {
        if (find(n) != n) continue;
        ++stats_.iterations;
        std::vector<uint32_t> keys = take_complex_keys(n);
        if (keys.empty()) continue;
        size_t edges_before = edges_.size(), props_before = stats_.propagations, collapsed_before = stats_.collapsed;
        fire(n, keys);
        changed |= edges_.size() != edges_before || stats_.propagations != props_before ||
                   stats_.collapsed != collapsed_before;
      }
      if (!changed) {
        // Anything still pending (from collapses during propagation) needs
        // another wave.
        for (NodeId n = 0; n < N() && !changed; ++n)
          if (find(n) == n)
            changed = pts_[n].snapshot() != prop_tok_[n] || pts_[n].snapshot() != cplx_tok_[n];
      }
      if (!changed) break;
    }
  }

  void collapse_cycles() {
    const uint32_t n = static_cast<uint32_t>(N());
    std::vector<bool> active(n, false);
    for (NodeId i = 0; i < n; ++i) active[i] = find(i) == i;
    SCCResult scc = strongly_connected_components(
        n, [&](uint32_t v) -> const std::vector<NodeId> & { return successors(v); }, &active);
    std::vector<NodeId> first(scc.count, kNoNode);
    for (NodeId i = 0; i < n; ++i) {
      if (!active[i]) continue;
      uint32_t c = scc.component[i];
      if (first[c] == kNoNode) {
        first[c] = i;
      } else {
        first[c] = unite(first[c], i);
      }
    }
  }

  std::vector<NodeId> topological_order() {
    auto idx = topo_indices();
    std::vector<NodeId> order;
    for (NodeId i = 0; i < N(); ++i)
      if (idx[i] != UINT32_MAX) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return idx[a] < idx[b]; });
    return order;
  }

  PointsToSolution finalize() {
    const size_t n = N();
    std::vector<NodeId> rep(n);
    std::vector<std::vector<NodeId>> sets(n);
    for (NodeId i = 0; i < n; ++i) {
      rep[i] = find(i);
      if (rep[i] == i) sets[i] = pts_[i].to_vector();
    }
    CallGraph cg;
    for (const auto &[site, fn] : calls_) cg[site].push_back(fn);
    for (auto &[site, fns] : cg) {
      std::sort(fns.begin(), fns.end());
      fns.erase(std::unique(fns.begin(), fns.end()), fns.end());
    }
    // Direct call sites with no record (callee list empty) are impossible;
    // indirect sites with no resolved target are listed with no targets.
    for (const auto &c : sys_.icalls) cg.try_emplace(c.site);
    return PointsToSolution(sys_.nodes, std::move(rep), std::move(sets), std::move(cg), stats_);
  }

  struct ComplexConstraint {
    ConstraintKind kind;
    NodeId other;
    int offset;
  };

  ConstraintSystem sys_;
  const NodeTable &t_;
  SolverConfig cfg_;
  SolveOptions opts_;
  SolverStats stats_;

  std::vector<NodeId> parent_;
  std::vector<Set> pts_;
  std::vector<std::vector<NodeId>> succ_;
  std::unordered_set<uint64_t> edges_;
  std::vector<std::vector<ComplexConstraint>> complex_;
  std::vector<std::vector<uint32_t>> icall_of_;
  std::vector<std::vector<NodeId>> hcd_;
  std::vector<SnapshotToken> prop_tok_, cplx_tok_;
  std::unordered_set<uint64_t> lcd_probed_;
  std::vector<size_t> last_size_;
  std::vector<uint64_t> deep_seen_;
  uint64_t deep_epoch_ = 0;
  std::optional<Worklist> wl_;
  std::multimap<InstrId, uint32_t> calls_;
};

}  // namespace

PointsToSolution solve(ConstraintSystem sys, const SolverConfig &cfg, const SolveOptions &opts) {
  switch (cfg.backend) {
    case SetBackendKind::SparseBitVector: return Engine<SparseBitVector>(std::move(sys), cfg, opts).run();
    case SetBackendKind::SortedVector: return Engine<SortedVectorSet>(std::move(sys), cfg, opts).run();
    case SetBackendKind::Bdd: break;
  }
  throw AnalysisError("the BDD points-to set backend is not available");
}

}  // namespace pta
