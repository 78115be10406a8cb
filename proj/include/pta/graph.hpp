// Small graph utilities shared across the analyses.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace pta {

/// Strongly connected components (iterative Tarjan). `succ_of(n)` must return
/// an iterable of successor ids in [0, n). Components are numbered in reverse
/// topological order: every edge goes from a higher-or-equal component to a
/// lower-or-equal one.
struct SCCResult {
  std::vector<uint32_t> component;  // node -> component id
  uint32_t count = 0;
};

template <class SuccFn>
SCCResult strongly_connected_components(uint32_t n, SuccFn &&succ_of,
                                        const std::vector<bool> *active = nullptr) {
  constexpr uint32_t kNone = UINT32_MAX;
  SCCResult res;
  res.component.assign(n, kNone);
  std::vector<uint32_t> index(n, kNone), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<uint32_t> stack;
  uint32_t counter = 0;
  struct Frame {
    uint32_t node;
    std::vector<uint32_t> succs;
    size_t next;
  };
  std::vector<Frame> work;
  for (uint32_t root = 0; root < n; ++root) {
    if (index[root] != kNone || (active && !(*active)[root])) continue;
    auto push = [&](uint32_t v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      Frame f{v, {}, 0};
      for (uint32_t s : succ_of(v)) f.succs.push_back(s);
      work.push_back(std::move(f));
    };
    push(root);
    while (!work.empty()) {
      Frame &fr = work.back();
      if (fr.next < fr.succs.size()) {
        uint32_t s = fr.succs[fr.next++];
        if (active && !(*active)[s]) continue;
        if (index[s] == kNone) {
          push(s);
        } else if (on_stack[s]) {
          low[fr.node] = std::min(low[fr.node], index[s]);
        }
        continue;
      }
      uint32_t v = fr.node;
      work.pop_back();
      if (!work.empty()) low[work.back().node] = std::min(low[work.back().node], low[v]);
      if (low[v] == index[v]) {
        uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          res.component[w] = res.count;
        } while (w != v);
        ++res.count;
      }
    }
  }
  return res;
}

/// Nodes that lie on a cycle: members of a multi-node SCC or carrying a self edge.
template <class SuccFn>
std::vector<bool> nodes_on_cycles(uint32_t n, SuccFn &&succ_of) {
  SCCResult scc = strongly_connected_components(n, succ_of);
  std::vector<uint32_t> size(scc.count, 0);
  for (uint32_t v = 0; v < n; ++v) ++size[scc.component[v]];
  std::vector<bool> out(n, false);
  for (uint32_t v = 0; v < n; ++v) {
    if (size[scc.component[v]] > 1) {
      out[v] = true;
      continue;
    }
    for (uint32_t s : succ_of(v))
      if (s == v) out[v] = true;
  }
  return out;
}

}  // namespace pta
