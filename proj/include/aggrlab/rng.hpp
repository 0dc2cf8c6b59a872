#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace aggrlab {

namespace detail {

// splitmix64 finalizer; the sole mixing primitive of the generator.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t key, std::uint64_t v) {
  return mix64(key ^ (v + 0x9e3779b97f4a7c15ULL + (key << 6) + (key >> 2)));
}

inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Counter-based generator: output block i is mix64(key + i).  Substreams
// derive a fresh key from (key, label), so (trial, purpose)-scoped streams
// are independent of draw order elsewhere.  Reproducible across platforms;
// no libstdc++ distributions are used anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(detail::mix64(seed)), counter_(0) {}

  Rng substream(std::string_view label) const {
    return Rng(FromKey{}, detail::combine(key_, detail::hash_label(label)));
  }
  Rng substream(std::uint64_t a) const {
    return Rng(FromKey{}, detail::combine(key_, a));
  }
  Rng substream(std::uint64_t a, std::uint64_t b) const {
    return Rng(FromKey{}, detail::combine(detail::combine(key_, a), b));
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + ++counter_); }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the n used here (n << 2^64).
    unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  // Index drawn using a precomputed inclusive prefix-sum table.
  std::size_t categorical_from_cdf(const std::vector<double>& cdf) {
    double u = next_double() * cdf.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (u < cdf[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key), counter_(0) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace aggrlab
