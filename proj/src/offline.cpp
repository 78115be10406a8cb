// Offline constraint simplification: pointer-equivalence labelling (HVN, HU)
// and the hybrid-cycle table.
#include <algorithm>
#include <map>
#include <unordered_map>

#include "pta/andersen.hpp"
#include "pta/graph.hpp"

namespace pta {

namespace {

// Base label keys. Kinds are kept apart so that e.g. an address label never
// collides with a dereference label.
enum class LabelKind : uint8_t { Addr, Deref, Field, Unique };
using LabelKey = std::tuple<LabelKind, uint32_t, int>;

class LabelInterner {
 public:
  uint32_t base(LabelKind k, uint32_t a, int b = 0) {
    auto [it, fresh] = base_.try_emplace(LabelKey{k, a, b}, next_);
    if (fresh) ++next_;
    return it->second;
  }
  uint32_t unique() { return next_++; }
  uint32_t set(const std::vector<uint32_t> &labels) {
    auto [it, fresh] = sets_.try_emplace(labels, next_);
    if (fresh) ++next_;
    return it->second;
  }

 private:
  uint32_t next_ = 1;  // 0 = empty
  std::map<LabelKey, uint32_t> base_;
  std::map<std::vector<uint32_t>, uint32_t> sets_;
};

struct LabelGraph {
  // Incoming copy predecessors and base labels per node, computed once.
  std::vector<std::vector<NodeId>> preds;
  std::vector<std::vector<NodeId>> succ;  // copy and field edges, for ordering
  std::vector<std::vector<NodeId>> loads;  // node -> pointers it loads from
  std::vector<std::vector<std::pair<NodeId, int>>> fields;  // node -> (src, offset)
  std::vector<std::vector<NodeId>> addrs;  // node -> cells
  std::vector<bool> opaque;  // cells and dynamic targets: unknown contents
  // Copy-edge SCCs share one label. Field edges do not preserve equality, so
  // they only constrain the processing order.
  std::vector<uint32_t> component;  // node -> copy SCC
  std::vector<uint32_t> region;     // node -> SCC over copy and field edges
  std::vector<std::vector<NodeId>> order;  // copy SCCs, dependencies first
};

LabelGraph build_label_graph(const ConstraintSystem &sys) {
  const size_t n = sys.node_count();
  LabelGraph g;
  g.preds.assign(n, {});
  g.succ.assign(n, {});
  g.loads.assign(n, {});
  g.fields.assign(n, {});
  g.addrs.assign(n, {});
  g.opaque.assign(n, false);
  for (NodeId i = 0; i < n; ++i)
    g.opaque[i] = sys.nodes->is_cell(i) || (i < sys.dynamic_target.size() && sys.dynamic_target[i]);
  for (const Constraint &c : sys.constraints) {
    switch (c.kind) {
      case ConstraintKind::AddrOf: g.addrs[c.dst].push_back(c.src); break;
      case ConstraintKind::Copy:
        g.preds[c.dst].push_back(c.src);
        g.succ[c.src].push_back(c.dst);
        break;
      case ConstraintKind::Load: g.loads[c.dst].push_back(c.src); break;
      case ConstraintKind::Store: break;
      case ConstraintKind::Field:
        g.fields[c.dst].push_back({c.src, c.offset});
        g.succ[c.src].push_back(c.dst);
        break;
    }
  }
  std::vector<std::vector<NodeId>> copy_succ(n);
  for (NodeId v = 0; v < n; ++v)
    for (NodeId p : g.preds[v]) copy_succ[p].push_back(v);
  SCCResult copy = strongly_connected_components(
      static_cast<uint32_t>(n), [&](uint32_t v) -> const std::vector<NodeId> & { return copy_succ[v]; });
  SCCResult all = strongly_connected_components(
      static_cast<uint32_t>(n), [&](uint32_t v) -> const std::vector<NodeId> & { return g.succ[v]; });
  g.component = copy.component;
  g.region = all.component;
  // Topological order: by region first, then by copy SCC inside a region
  // (both numberings are reverse topological).
  std::vector<std::pair<std::pair<uint32_t, uint32_t>, uint32_t>> keyed;
  std::vector<bool> seen(copy.count, false);
  for (NodeId v = 0; v < n; ++v) {
    uint32_t c = copy.component[v];
    if (seen[c]) continue;
    seen[c] = true;
    keyed.push_back({{all.count - 1 - all.component[v], copy.count - 1 - c}, c});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<uint32_t> pos(copy.count);
  for (size_t i = 0; i < keyed.size(); ++i) pos[keyed[i].second] = static_cast<uint32_t>(i);
  g.order.assign(keyed.size(), {});
  for (NodeId v = 0; v < n; ++v) g.order[pos[copy.component[v]]].push_back(v);
  return g;
}

/// HVN labels: a node inherits the label of a single source, otherwise the
/// interned set of its sources' labels.
std::vector<uint32_t> hvn_labels(const LabelGraph &g) {
  const size_t n = g.preds.size();
  LabelInterner in;
  std::vector<uint32_t> label(n, 0);
  for (const auto &members : g.order) {
    const uint32_t comp = g.component[members[0]];
    const uint32_t region = g.region[members[0]];
    std::vector<uint32_t> set;
    bool opaque = false;
    for (NodeId v : members) {
      opaque |= g.opaque[v];
      for (NodeId p : g.preds[v])
        if (g.component[p] != comp && label[p] != 0) set.push_back(label[p]);
      for (NodeId c : g.addrs[v]) set.push_back(in.base(LabelKind::Addr, c));
      // Each pointer's dereference is distinct: HVN does not relate *p and *q.
      for (NodeId p : g.loads[v]) set.push_back(in.base(LabelKind::Deref, p));
      for (auto [src, off] : g.fields[v]) {
        if (g.region[src] == region) {
          opaque = true;
        } else if (label[src] != 0) {
          set.push_back(in.base(LabelKind::Field, label[src], off));
        }
      }
    }
    uint32_t l;
    if (opaque) {
      l = in.unique();
    } else {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      l = set.empty() ? 0 : set.size() == 1 ? set[0] : in.set(set);
    }
    for (NodeId v : members) label[v] = l;
  }
  return label;
}

/// One HU round: labels are flattened sets of base labels; dereference and
/// field labels are keyed by the class of the pointer under `prev`.
std::vector<uint32_t> hu_round(const LabelGraph &g, const std::vector<uint32_t> &prev) {
  const size_t n = g.preds.size();
  LabelInterner in;
  std::vector<std::vector<uint32_t>> sets(n);
  std::vector<uint32_t> label(n, 0);
  for (const auto &members : g.order) {
    const uint32_t comp = g.component[members[0]];
    const uint32_t region = g.region[members[0]];
    std::vector<uint32_t> set;
    bool opaque = false;
    for (NodeId v : members) {
      opaque |= g.opaque[v];
      for (NodeId p : g.preds[v])
        if (g.component[p] != comp) set.insert(set.end(), sets[p].begin(), sets[p].end());
      for (NodeId c : g.addrs[v]) set.push_back(in.base(LabelKind::Addr, c));
      for (NodeId p : g.loads[v]) set.push_back(in.base(LabelKind::Deref, prev[p]));
      for (auto [src, off] : g.fields[v]) {
        if (g.region[src] == region) {
          opaque = true;
        } else if (!sets[src].empty()) {
          set.push_back(in.base(LabelKind::Field, prev[src], off));
        }
      }
    }
    if (opaque) {
      set = {in.unique()};
    } else {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    uint32_t l = set.empty() ? 0 : in.set(set);
    for (NodeId v : members) {
      label[v] = l;
      sets[v] = set;
    }
  }
  return label;
}

/// Canonical class ids: each node maps to the smallest node with its label.
std::vector<NodeId> classes_of(const std::vector<uint32_t> &label) {
  std::unordered_map<uint32_t, NodeId> first;
  std::vector<NodeId> cls(label.size());
  for (NodeId v = 0; v < label.size(); ++v) cls[v] = first.try_emplace(label[v], v).first->second;
  return cls;
}

/// Rewrites `sys` so every node is replaced by the representative of its
/// label class.
OfflineResult merge_by_label(const ConstraintSystem &sys, std::vector<uint32_t> labels) {
  OfflineResult out;
  out.system = sys;
  ConstraintSystem &s = out.system;
  std::vector<NodeId> rep = classes_of(labels);
  for (NodeId v = 0; v < rep.size(); ++v) out.merged += rep[v] != v;
  auto r = [&](NodeId n) { return n == kNoNode ? n : rep[n]; };

  std::vector<Constraint> cs;
  cs.reserve(s.constraints.size());
  for (Constraint c : s.constraints) {
    if (c.kind != ConstraintKind::AddrOf) c.src = r(c.src);
    c.dst = r(c.dst);
    if (c.kind == ConstraintKind::Copy && c.src == c.dst) continue;
    cs.push_back(c);
  }
  s.constraints = std::move(cs);
  s.dedup();
  for (auto &call : s.icalls) {
    call.fnptr = r(call.fnptr);
    for (auto &a : call.args) a = r(a);
    call.dest = r(call.dest);
  }
  for (auto &sig : s.signatures) {
    for (auto &p : sig.params) p = r(p);
    sig.ret = r(sig.ret);
  }
  for (auto &o : s.offline_rep) o = rep[o];
  out.labels = std::move(labels);
  return out;
}

}  // namespace

OfflineResult offline_hvn(const ConstraintSystem &sys) {
  LabelGraph g = build_label_graph(sys);
  return merge_by_label(sys, hvn_labels(g));
}

OfflineResult offline_hu(const ConstraintSystem &sys) {
  LabelGraph g = build_label_graph(sys);
  // Starting from the HVN partition keeps every HVN merge: nodes with equal
  // HVN labels receive equal flattened sets in each round.
  std::vector<uint32_t> labels = hvn_labels(g);
  std::vector<NodeId> cls = classes_of(labels);
  for (int round = 0; round < 8; ++round) {
    std::vector<uint32_t> next = hu_round(g, cls);
    std::vector<NodeId> next_cls = classes_of(next);
    labels = std::move(next);
    if (next_cls == cls) break;
    cls = std::move(next_cls);
  }
  return merge_by_label(sys, std::move(labels));
}

std::vector<HcdEntry> offline_hcd(const ConstraintSystem &sys) {
  // A dereference *a closes a cycle when some x = load a reaches some y with
  // store *a = y through copy edges alone. Once k enters pts(a), k and every
  // node on that path share one SCC, so k can be merged with it directly.
  const size_t n = sys.node_count();
  std::vector<std::vector<NodeId>> copy_succ(n), loads_of(n), stores_of(n);
  for (const Constraint &c : sys.constraints) {
    if (c.kind == ConstraintKind::Copy) copy_succ[c.src].push_back(c.dst);
    if (c.kind == ConstraintKind::Load) loads_of[c.src].push_back(c.dst);
    if (c.kind == ConstraintKind::Store) stores_of[c.dst].push_back(c.src);
  }
  std::vector<HcdEntry> out;
  std::vector<uint32_t> seen(n, 0);
  uint32_t epoch = 0;
  std::vector<bool> is_store_src(n, false);
  for (NodeId a = 0; a < n; ++a) {
    if (loads_of[a].empty() || stores_of[a].empty()) continue;
    for (NodeId y : stores_of[a]) is_store_src[y] = true;
    std::vector<NodeId> xs = loads_of[a];
    std::sort(xs.begin(), xs.end());
    std::optional<NodeId> target;
    for (NodeId x : xs) {
      ++epoch;
      std::vector<NodeId> stack{x};
      seen[x] = epoch;
      while (!stack.empty() && !target) {
        NodeId v = stack.back();
        stack.pop_back();
        if (is_store_src[v]) {
          target = std::min(x, v);
          break;
        }
        for (NodeId s : copy_succ[v])
          if (seen[s] != epoch) {
            seen[s] = epoch;
            stack.push_back(s);
          }
      }
      if (target) break;
    }
    for (NodeId y : stores_of[a]) is_store_src[y] = false;
    if (target) out.push_back({a, *target});
  }
  return out;
}

}  // namespace pta
