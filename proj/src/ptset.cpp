#include "pta/ptset.hpp"

#include <algorithm>
#include <atomic>

namespace pta {

const char *backend_name(SetBackendKind k) {
  switch (k) {
    case SetBackendKind::SparseBitVector: return "bitvec";
    case SetBackendKind::SortedVector: return "sorted";
    case SetBackendKind::Bdd: return "bdd";
  }
  return "?";
}

uint64_t detail::next_set_id() {
  static std::atomic<uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

//===----------------------------------------------------------------------===//
// SparseBitVector
//===----------------------------------------------------------------------===//

bool SparseBitVector::insert(uint32_t k) {
  const uint32_t bi = k / kBlockBits;
  const uint32_t bit = k % kBlockBits;
  auto it = std::lower_bound(blocks_.begin(), blocks_.end(), bi,
                             [](const Block &b, uint32_t i) { return b.index < i; });
  if (it == blocks_.end() || it->index != bi) it = blocks_.insert(it, Block{bi, {0, 0}});
  uint64_t &w = it->words[bit / 64];
  const uint64_t mask = uint64_t{1} << (bit % 64);
  if (w & mask) return false;
  w |= mask;
  ++count_;
  record(k);
  return true;
}

bool SparseBitVector::contains(uint32_t k) const {
  const uint32_t bi = k / kBlockBits;
  const uint32_t bit = k % kBlockBits;
  auto it = std::lower_bound(blocks_.begin(), blocks_.end(), bi,
                             [](const Block &b, uint32_t i) { return b.index < i; });
  if (it == blocks_.end() || it->index != bi) return false;
  return (it->words[bit / 64] >> (bit % 64)) & 1;
}

void SparseBitVector::clear() {
  blocks_.clear();
  count_ = 0;
  reset_log();
}

bool SparseBitVector::union_with(const SparseBitVector &o) {
  if (this == &o || o.blocks_.empty()) return false;
  std::vector<Block> merged;
  merged.reserve(blocks_.size() + o.blocks_.size());
  bool changed = false;
  size_t i = 0, j = 0;
  auto log_bits = [&](uint32_t index, int w, uint64_t bits) {
    while (bits) {
      int t = __builtin_ctzll(bits);
      record(index * kBlockBits + static_cast<uint32_t>(w * 64 + t));
      ++count_;
      bits &= bits - 1;
    }
  };
  while (i < blocks_.size() || j < o.blocks_.size()) {
    if (j == o.blocks_.size() || (i < blocks_.size() && blocks_[i].index < o.blocks_[j].index)) {
      merged.push_back(blocks_[i++]);
    } else if (i == blocks_.size() || o.blocks_[j].index < blocks_[i].index) {
      const Block &b = o.blocks_[j++];
      for (int w = 0; w < 2; ++w) log_bits(b.index, w, b.words[w]);
      merged.push_back(b);
      changed = true;
    } else {
      Block b = blocks_[i++];
      const Block &ob = o.blocks_[j++];
      for (int w = 0; w < 2; ++w) {
        uint64_t fresh = ob.words[w] & ~b.words[w];
        if (fresh) {
          changed = true;
          log_bits(b.index, w, fresh);
          b.words[w] |= fresh;
        }
      }
      merged.push_back(b);
    }
  }
  if (changed) blocks_ = std::move(merged);
  return changed;
}

bool SparseBitVector::is_subset_of(const SparseBitVector &o) const {
  if (count_ > o.count_) return false;
  size_t j = 0;
  for (const Block &b : blocks_) {
    while (j < o.blocks_.size() && o.blocks_[j].index < b.index) ++j;
    if (j == o.blocks_.size() || o.blocks_[j].index != b.index) return false;
    for (int w = 0; w < 2; ++w)
      if (b.words[w] & ~o.blocks_[j].words[w]) return false;
  }
  return true;
}

bool SparseBitVector::intersects(const SparseBitVector &o) const {
  size_t i = 0, j = 0;
  while (i < blocks_.size() && j < o.blocks_.size()) {
    if (blocks_[i].index < o.blocks_[j].index) {
      ++i;
    } else if (o.blocks_[j].index < blocks_[i].index) {
      ++j;
    } else {
      if ((blocks_[i].words[0] & o.blocks_[j].words[0]) || (blocks_[i].words[1] & o.blocks_[j].words[1]))
        return true;
      ++i;
      ++j;
    }
  }
  return false;
}

std::vector<uint32_t> SparseBitVector::to_vector() const {
  std::vector<uint32_t> out;
  out.reserve(count_);
  for_each([&](uint32_t k) { out.push_back(k); });
  return out;
}

bool SparseBitVector::operator==(const SparseBitVector &o) const {
  if (count_ != o.count_ || blocks_.size() != o.blocks_.size()) return false;
  for (size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].index != o.blocks_[i].index || blocks_[i].words[0] != o.blocks_[i].words[0] ||
        blocks_[i].words[1] != o.blocks_[i].words[1])
      return false;
  return true;
}

//===----------------------------------------------------------------------===//
// SortedVectorSet
//===----------------------------------------------------------------------===//

bool SortedVectorSet::insert(uint32_t k) {
  auto it = std::lower_bound(elems_.begin(), elems_.end(), k);
  if (it != elems_.end() && *it == k) return false;
  elems_.insert(it, k);
  record(k);
  return true;
}

bool SortedVectorSet::contains(uint32_t k) const {
  return std::binary_search(elems_.begin(), elems_.end(), k);
}

void SortedVectorSet::clear() {
  elems_.clear();
  reset_log();
}

bool SortedVectorSet::union_with(const SortedVectorSet &o) {
  if (this == &o || o.elems_.empty()) return false;
  std::vector<uint32_t> merged;
  merged.reserve(elems_.size() + o.elems_.size());
  size_t i = 0, j = 0;
  bool changed = false;
  while (i < elems_.size() || j < o.elems_.size()) {
    if (j == o.elems_.size() || (i < elems_.size() && elems_[i] < o.elems_[j])) {
      merged.push_back(elems_[i++]);
    } else if (i == elems_.size() || o.elems_[j] < elems_[i]) {
      record(o.elems_[j]);
      merged.push_back(o.elems_[j++]);
      changed = true;
    } else {
      merged.push_back(elems_[i++]);
      ++j;
    }
  }
  if (changed) elems_ = std::move(merged);
  return changed;
}

bool SortedVectorSet::is_subset_of(const SortedVectorSet &o) const {
  if (elems_.size() > o.elems_.size()) return false;
  return std::includes(o.elems_.begin(), o.elems_.end(), elems_.begin(), elems_.end());
}

bool SortedVectorSet::intersects(const SortedVectorSet &o) const {
  size_t i = 0, j = 0;
  while (i < elems_.size() && j < o.elems_.size()) {
    if (elems_[i] < o.elems_[j]) ++i;
    else if (o.elems_[j] < elems_[i]) ++j;
    else return true;
  }
  return false;
}

}  // namespace pta
