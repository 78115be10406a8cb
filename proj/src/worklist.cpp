#include <stdexcept>

#include "pta/andersen.hpp"

namespace pta {

Worklist::Worklist(WorklistOrder order, size_t node_count, TopoProvider topo, uint32_t refresh)
    : order_(order),
      queued_(node_count, false),
      last_fired_(node_count, 0),
      seq_(node_count, 0),
      topo_(std::move(topo)),
      refresh_(refresh ? refresh : 1) {}

void Worklist::push(NodeId n) {
  if (queued_[n]) return;
  queued_[n] = true;
  seq_[n] = ++pushes_;
  switch (order_) {
    case WorklistOrder::FIFO: fifo_.push_back(n); break;
    case WorklistOrder::LIFO: lifo_.push_back(n); break;
    case WorklistOrder::LRF: current_.emplace(last_fired_[n], seq_[n], n); break;
    case WorklistOrder::TwoLRF: next_.emplace(last_fired_[n], seq_[n], n); break;
    case WorklistOrder::Topo: {
      uint64_t prio = n < topo_index_.size() ? topo_index_[n] : UINT64_MAX;
      current_.emplace(prio, seq_[n], n);
      break;
    }
  }
}

void Worklist::refresh_topo() {
  if (!topo_) return;
  topo_index_ = topo_();
  std::set<Key> rebuilt;
  for (const auto &[prio, seq, n] : current_) {
    uint64_t p = n < topo_index_.size() ? topo_index_[n] : UINT64_MAX;
    rebuilt.emplace(p, seq, n);
  }
  current_ = std::move(rebuilt);
}

NodeId Worklist::pop() {
  if (empty()) throw std::logic_error("pop from an empty worklist");
  NodeId n = 0;
  switch (order_) {
    case WorklistOrder::FIFO:
      n = fifo_.front();
      fifo_.pop_front();
      break;
    case WorklistOrder::LIFO:
      n = lifo_.back();
      lifo_.pop_back();
      break;
    case WorklistOrder::LRF:
      n = std::get<2>(*current_.begin());
      current_.erase(current_.begin());
      break;
    case WorklistOrder::TwoLRF:
      if (current_.empty()) std::swap(current_, next_);
      n = std::get<2>(*current_.begin());
      current_.erase(current_.begin());
      break;
    case WorklistOrder::Topo:
      if (pops_ % refresh_ == 0) refresh_topo();
      n = std::get<2>(*current_.begin());
      current_.erase(current_.begin());
      break;
  }
  ++pops_;
  queued_[n] = false;
  last_fired_[n] = ++tick_;
  return n;
}

bool Worklist::empty() const { return size() == 0; }

size_t Worklist::size() const {
  switch (order_) {
    case WorklistOrder::FIFO: return fifo_.size();
    case WorklistOrder::LIFO: return lifo_.size();
    case WorklistOrder::TwoLRF: return current_.size() + next_.size();
    default: return current_.size();
  }
}

}  // namespace pta
