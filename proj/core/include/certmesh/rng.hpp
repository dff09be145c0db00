#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace certmesh {

// splitmix64 step; used both as a standalone mixer and to derive seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent substream seed from a base seed and up to two tags.
// Pure function of its inputs, so derivation order never matters.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a,
                                 std::uint64_t tag_b = 0) {
  std::uint64_t s = base;
  std::uint64_t x = splitmix64(s);
  s = x ^ (tag_a * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  x = splitmix64(s);
  s = x ^ (tag_b * 0xda942042e4dd58b5ULL + 0xc2b2ae3d27d4eb4fULL);
  return splitmix64(s);
}

// Deterministic random source. The engine is std::mt19937_64 (bit-exact by
// the standard); all distributions are derived from raw engine output here
// rather than std::*_distribution, whose mappings are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    // Debiased multiply-shift (Lemire); deterministic given the engine.
    while (true) {
      std::uint64_t x = next_u64();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= static_cast<std::uint64_t>(-static_cast<std::int64_t>(n)) % n) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  std::vector<std::uint8_t> bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; i += 8) {
      std::uint64_t x = next_u64();
      for (std::size_t j = 0; j < 8 && i + j < n; ++j) {
        out[i + j] = static_cast<std::uint8_t>(x >> (8 * j));
      }
    }
    return out;
  }

  // Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct elements sampled from v, order of first pick preserved.
  template <class T>
  std::vector<T> sample(std::vector<T> v, std::size_t k) {
    if (k > v.size()) k = v.size();
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(v[i], v[i + below(v.size() - i)]);
    }
    v.resize(k);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace certmesh
