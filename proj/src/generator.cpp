#include "pta/generator.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

namespace pta {

namespace {

enum Kind { kAlloc, kAddr, kCopy, kLoad, kStore, kField, kCall, kICall };

struct FnPlan {
  std::string name;
  size_t params = 0;
  size_t budget = 0;
};

class Generator {
 public:
  explicit Generator(const GenOptions &o) : o_(o), rng_(o.seed) {}

  std::string run() {
    size_t size = std::max<size_t>(o_.size, 2);
    size_t nfn = o_.functions ? o_.functions : size / 40 + 1;
    nfn = std::max<size_t>(1, std::min(nfn, size / 2));
    plan_.resize(nfn);
    for (size_t i = 0; i < nfn; ++i) {
      plan_[i].name = i == 0 ? "main" : "f" + std::to_string(i);
      plan_[i].params = i == 0 ? 0 : draw(3);
      plan_[i].budget = size / nfn + (i < size % nfn ? 1 : 0);
    }
    for (size_t g = 0; g < o_.globals; ++g) out_ << "global @g" << g << "\n";
    if (o_.globals) out_ << "\n";
    for (size_t i = 0; i < nfn; ++i) {
      if (i) out_ << "\n";
      function(i);
    }
    return out_.str();
  }

 private:
  uint64_t draw(uint64_t n) { return n ? rng_() % n : 0; }
  bool chance(unsigned per_mille) { return draw(1000) < per_mille; }
  template <class T>
  const T &pick(const std::vector<T> &v) { return v[draw(v.size())]; }

  void emit(const std::string &text) {
    out_ << "  " << text << "\n";
    ++emitted_;
  }

  Kind kind() {
    unsigned total = 0;
    for (unsigned w : o_.weights) total += w;
    uint64_t r = draw(total);
    for (int k = 0; k < 8; ++k) {
      if (r < o_.weights[k]) return static_cast<Kind>(k);
      r -= o_.weights[k];
    }
    return kAlloc;
  }

  // Callees allowed from function `self`.
  std::vector<size_t> callees(size_t self) {
    std::vector<size_t> out;
    const bool back = !o_.deterministic && o_.recursion && chance(o_.recursion_density);
    for (size_t j = 1; j < plan_.size(); ++j) {
      if (o_.call_window && (j > self + o_.call_window || j + o_.call_window < self)) continue;
      if (j > self || back) out.push_back(j);
    }
    return out;
  }

  std::string dest() {
    if (pool_.size() < o_.vars_per_function && (pool_.empty() || chance(600))) {
      std::string v = "%v" + std::to_string(pool_.size());
      pool_.push_back(v);
      return v;
    }
    return pick(pool_);
  }

  void define(const std::string &v, bool nonnull) {
    if (std::find(defined_.begin(), defined_.end(), v) == defined_.end()) defined_.push_back(v);
    auto it = std::find(nonnull_.begin(), nonnull_.end(), v);
    if (nonnull && it == nonnull_.end()) nonnull_.push_back(v);
    if (!nonnull && it != nonnull_.end()) nonnull_.erase(it);
  }

  bool is_nonnull(const std::string &v) const {
    return std::find(nonnull_.begin(), nonnull_.end(), v) != nonnull_.end();
  }

  // A variable to dereference: prefer ones known to hold an address.
  const std::string &pointer() { return !nonnull_.empty() && !chance(100) ? pick(nonnull_) : pick(defined_); }

  std::string args(size_t n) {
    std::string s;
    for (size_t i = 0; i < n; ++i) s += (i ? ", " : "") + pick(defined_);
    return s;
  }

  std::string object() { return "O" + std::to_string(next_object_++); }

  void alloc() {
    std::string d = dest();
    emit(d + " = alloc " + object());
    define(d, true);
  }

  // Emits one instruction, or two when a helper definition is needed (fresh
  // struct base, dedicated function pointer). `room` is the number of
  // instructions still available.
  void instruction(size_t self, size_t room) {
    Kind k = defined_.empty() ? kAlloc : kind();
    std::vector<size_t> cs = callees(self);
    if ((k == kCall || k == kICall) && cs.empty()) k = kAlloc;
    if (k == kAddr && o_.globals == 0 && (o_.deterministic || plan_.size() == 1)) k = kAlloc;
    if (k == kICall && o_.deterministic && room < 2) k = kAlloc;
    switch (k) {
      case kAlloc: alloc(); break;
      case kAddr: {
        // Function addresses flow only through dedicated pointers in
        // deterministic programs.
        bool global = o_.globals && (o_.deterministic || plan_.size() == 1 || chance(600));
        std::string sym = global ? "@g" + std::to_string(draw(o_.globals)) : "@" + plan_[draw(plan_.size())].name;
        std::string d = dest();
        emit(d + " = addr " + sym);
        define(d, true);
        break;
      }
      case kCopy: {
        std::string s = pick(defined_);
        bool nn = is_nonnull(s);
        std::string d = dest();
        emit(d + " = copy " + s);
        define(d, nn);
        break;
      }
      case kLoad: {
        std::string p = pointer();
        std::string d = dest();
        emit(d + " = load " + p);
        define(d, false);
        break;
      }
      case kStore: {
        std::string v = pick(defined_);
        emit("store " + v + ", " + pointer());
        break;
      }
      case kField: {
        // Field addresses mostly come from a dedicated, once-allocated base,
        // as with a struct local; arbitrary bases are rare because additive
        // offsets through copy cycles reach every field of every object.
        std::string p;
        if (room >= 2 && chance(980)) {
          p = "%s" + std::to_string(struct_count_++);
          emit(p + " = alloc " + object());
          defined_.push_back(p);
          nonnull_.push_back(p);
        } else {
          p = pointer();
        }
        bool nn = is_nonnull(p);
        std::string d = dest();
        uint64_t idx = draw(std::min<uint64_t>(static_cast<uint64_t>(o_.max_field), 3) + 1);
        emit(d + " = field " + p + ", " + std::to_string(idx));
        define(d, nn);
        break;
      }
      case kCall: {
        const FnPlan &f = plan_[pick(cs)];
        std::string a = args(f.params);
        std::string d = dest();
        emit(d + " = call @" + f.name + "(" + a + ")");
        define(d, false);
        break;
      }
      case kICall: {
        std::string fp;
        size_t nargs;
        if (o_.deterministic) {
          const FnPlan &f = plan_[pick(cs)];
          fp = "%fp" + std::to_string(fp_count_++);
          emit(fp + " = addr @" + f.name);
          defined_.push_back(fp);
          nargs = f.params;
        } else {
          if (room >= 2 && chance(500)) {
            fp = dest();
            emit(fp + " = addr @" + plan_[pick(cs)].name);
            define(fp, true);
          } else {
            fp = pick(defined_);
          }
          nargs = draw(3);
        }
        std::string a = args(nargs);
        std::string d = dest();
        emit(d + " = icall " + fp + "(" + a + ")");
        define(d, false);
        break;
      }
    }
  }

  void function(size_t self) {
    const FnPlan &f = plan_[self];
    pool_.clear();
    defined_.clear();
    nonnull_.clear();
    fp_count_ = 0;
    struct_count_ = 0;
    emitted_ = 0;
    out_ << "func @" << f.name << "(";
    for (size_t p = 0; p < f.params; ++p) {
      std::string v = "%a" + std::to_string(p);
      out_ << (p ? ", " : "") << v;
      defined_.push_back(v);
    }
    out_ << ") {\n";
    const size_t budget = std::max<size_t>(f.budget, 1);
    const size_t bs = std::max<size_t>(1, o_.block_size);
    for (size_t b = 0;; ++b) {
      out_ << "b" << b << ":\n";
      // Leave one slot for this block's terminator.
      size_t room = budget - emitted_ - 1;
      size_t n = std::min<size_t>(room, 1 + draw(2 * bs - 1));
      size_t target = emitted_ + n;
      while (emitted_ < target) instruction(self, target - emitted_);
      if (emitted_ + 1 >= budget) {
        if (!defined_.empty() && chance(700)) {
          emit("ret " + pick(defined_));
        } else {
          emit("ret");
        }
        break;
      }
      if (!o_.deterministic && chance(o_.branch_density)) {
        emit("br b" + std::to_string(b + 1) + ", b" + std::to_string(draw(b + 2)));
      } else {
        emit("br b" + std::to_string(b + 1));
      }
    }
    out_ << "}\n";
  }

  const GenOptions &o_;
  std::mt19937_64 rng_;
  std::ostringstream out_;
  std::vector<FnPlan> plan_;
  std::vector<std::string> pool_, defined_, nonnull_;
  size_t next_object_ = 0;
  size_t fp_count_ = 0;
  size_t struct_count_ = 0;
  size_t emitted_ = 0;
};

}  // namespace

GenOptions bench_profile(uint64_t seed, size_t size) {
  GenOptions g;
  g.seed = seed;
  g.size = size;
  g.functions = size / 12 + 1;
  g.vars_per_function = 16;
  g.call_window = 4;
  return g;
}

std::string generate_program(const GenOptions &opts) { return Generator(opts).run(); }

}  // namespace pta
