#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

// Seeded randomness for the whole toolkit. The mt19937_64 engine is
// bit-reproducible by the standard; the distributions here are hand-rolled
// because the standard library's are implementation-defined, and model files
// must be byte-identical across runs and platforms.

namespace gazeload {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (base, index). Used to give each
// participant / tree / grid cell / epoch its own stream so parallel order and
// input order cannot change results.
inline uint64_t mix_seed(uint64_t base, uint64_t index) {
  uint64_t s = base;
  (void)splitmix64(s);
  s ^= 0x9E3779B97F4A7C15ULL * (index + 1);
  return splitmix64(s);
}

inline uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b) {
  return mix_seed(mix_seed(base, a), b);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform in [0, n), rejection-sampled so the sequence has no modulo bias
  uint64_t bounded(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller; caches the second deviate
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0,1] so log() is finite
    double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Permutation of [0, n) that depends only on (seed, epoch) — never on the
// data it will index.
inline std::vector<size_t> epoch_permutation(size_t n, uint64_t seed, uint64_t epoch) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(mix_seed(seed, 0xE70C0000ULL + epoch));
  rng.shuffle(idx);
  return idx;
}

}  // namespace gazeload
