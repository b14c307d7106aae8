#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "silverqa/common.hpp"

namespace silverqa {

// SplitMix64 generator. std::uniform_*_distribution and std::shuffle are
// implementation-defined, so every random draw in this project goes through
// this class to keep results bit-identical across compilers and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound). bound must be > 0.
  uint64_t below(uint64_t bound) {
    using u128 = unsigned __int128;
    uint64_t x = next_u64();
    u128 m = static_cast<u128>(x) * static_cast<u128>(bound);
    auto lo = static_cast<uint64_t>(m);
    if (lo < bound) {
      uint64_t threshold = (0ULL - bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<u128>(x) * static_cast<u128>(bound);
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in the open interval (0, 1); both endpoints unreachable.
  double open_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  // Fisher-Yates with explicit draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// Stable per-stage seed derivation so subcommands sharing one master seed
// do not consume each other's streams.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
  return fnv1a64(tag) ^ (master * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
}

}  // namespace silverqa
