// Points-to set representations.
//
// Both backends store a set of dense integer keys, iterate in ascending key
// order and keep an insertion log so that a consumer can ask for "everything
// added since snapshot T" (difference propagation).
#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pta {

enum class SetBackendKind {
  SparseBitVector,
  SortedVector,
  Bdd,  // reserved, not implemented
};

const char *backend_name(SetBackendKind k);

/// Identifies a position in one set's insertion history.
struct SnapshotToken {
  uint64_t set_id = 0;
  uint32_t position = 0;
  bool operator==(const SnapshotToken &) const = default;
};

class StaleTokenError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

uint64_t next_set_id();

/// Insertion history shared by both backends.
class InsertionLog {
 public:
  InsertionLog() : id_(next_set_id()) {}
  InsertionLog(const InsertionLog &o) : id_(next_set_id()), log_(o.log_) {}
  InsertionLog(InsertionLog &&o) noexcept : id_(o.id_), log_(std::move(o.log_)) { o.id_ = next_set_id(); }
  InsertionLog &operator=(const InsertionLog &o) {
    if (this != &o) {
      id_ = next_set_id();
      log_ = o.log_;
    }
    return *this;
  }
  InsertionLog &operator=(InsertionLog &&o) noexcept {
    if (this != &o) {
      id_ = o.id_;
      log_ = std::move(o.log_);
      o.id_ = next_set_id();
      o.log_.clear();
    }
    return *this;
  }

  SnapshotToken snapshot() const { return {id_, static_cast<uint32_t>(log_.size())}; }
  SnapshotToken origin() const { return {id_, 0}; }

  /// Keys inserted after `token`; throws if the token belongs to another set.
  std::span<const uint32_t> since(SnapshotToken token) const {
    if (token.set_id != id_ || token.position > log_.size())
      throw StaleTokenError("snapshot token was not issued by this set");
    return std::span<const uint32_t>(log_).subspan(token.position);
  }

 protected:
  void record(uint32_t k) { log_.push_back(k); }
  void reset_log() {
    log_.clear();
    id_ = next_set_id();
  }

 private:
  uint64_t id_;
  std::vector<uint32_t> log_;
};

}  // namespace detail

/// Sparse bitvector: sorted list of 128-bit blocks.
class SparseBitVector : public detail::InsertionLog {
 public:
  static constexpr uint32_t kBlockBits = 128;

  bool insert(uint32_t k);
  bool contains(uint32_t k) const;
  size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  void clear();

  /// this = this ∪ o. Returns true iff this grew.
  bool union_with(const SparseBitVector &o);
  bool is_subset_of(const SparseBitVector &o) const;
  bool intersects(const SparseBitVector &o) const;

  template <class F>
  void for_each(F &&f) const {
    for (const Block &b : blocks_)
      for (int w = 0; w < 2; ++w) {
        uint64_t bits = b.words[w];
        while (bits) {
          int t = __builtin_ctzll(bits);
          f(b.index * kBlockBits + static_cast<uint32_t>(w * 64 + t));
          bits &= bits - 1;
        }
      }
  }
  std::vector<uint32_t> to_vector() const;

  bool operator==(const SparseBitVector &o) const;

 private:
  struct Block {
    uint32_t index;
    uint64_t words[2];
  };
  std::vector<Block> blocks_;
  size_t count_ = 0;
};

/// Sorted vector of keys. Used as the reference backend.
class SortedVectorSet : public detail::InsertionLog {
 public:
  bool insert(uint32_t k);
  bool contains(uint32_t k) const;
  size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  void clear();

  bool union_with(const SortedVectorSet &o);
  bool is_subset_of(const SortedVectorSet &o) const;
  bool intersects(const SortedVectorSet &o) const;

  template <class F>
  void for_each(F &&f) const {
    for (uint32_t k : elems_) f(k);
  }
  std::vector<uint32_t> to_vector() const { return elems_; }
  const std::vector<uint32_t> &elements() const { return elems_; }

  bool operator==(const SortedVectorSet &o) const { return elems_ == o.elems_; }

 private:
  std::vector<uint32_t> elems_;
};

template <class S>
concept PointsToSetBackend = requires(S s, const S cs, uint32_t k) {
  { s.insert(k) } -> std::same_as<bool>;
  { cs.contains(k) } -> std::same_as<bool>;
  { cs.size() } -> std::convertible_to<size_t>;
  { s.union_with(cs) } -> std::same_as<bool>;
  { cs.is_subset_of(cs) } -> std::same_as<bool>;
  { cs.snapshot() } -> std::same_as<SnapshotToken>;
  { cs.to_vector() } -> std::same_as<std::vector<uint32_t>>;
};

template <PointsToSetBackend S>
bool union_into(S &dst, const S &src) {
  return dst.union_with(src);
}

/// dst absorbs the keys added to src after `since`. Returns whether dst grew
/// and the token to use next time.
template <PointsToSetBackend S>
std::pair<bool, SnapshotToken> diff_union_into(S &dst, const S &src, SnapshotToken since) {
  if (&dst == &src) return {false, src.snapshot()};
  bool changed = false;
  for (uint32_t k : src.since(since)) changed |= dst.insert(k);
  return {changed, src.snapshot()};
}

}  // namespace pta
