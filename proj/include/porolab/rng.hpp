#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace porolab {

// Seeded generator with hand-rolled bounded draws. std::uniform_*_distribution
// is implementation-defined, so outputs are derived from raw mt19937_64 words
// to keep experiment reruns byte-identical.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t u64() { return eng_(); }

  size_t index(size_t n) { return static_cast<size_t>(u64() % n); }

  double real01() {
    return static_cast<double>(u64() >> 11) * (1.0 / 9007199254740992.0);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

  std::vector<size_t> distinct_indices(size_t count, size_t n) {
    std::vector<size_t> out;
    if (count >= n) {
      out.resize(n);
      for (size_t i = 0; i < n; ++i) out[i] = i;
      return out;
    }
    std::vector<bool> used(n, false);
    out.reserve(count);
    while (out.size() < count) {
      const size_t i = index(n);
      if (!used[i]) {
        used[i] = true;
        out.push_back(i);
      }
    }
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace porolab
