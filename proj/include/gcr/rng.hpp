#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace gcr {

// splitmix64 finalizer; used to derive independent substreams from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Named substream derivation: all randomness in the project flows from a
/// single seed through derive_seed(seed, tag, indices...), so parallel
/// execution over scenes/iterations/coordinates cannot change results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return splitmix64(seed ^ hash_tag(tag));
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t i) {
  return splitmix64(derive_seed(seed, tag) ^ splitmix64(i));
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t i, std::uint64_t j) {
  return splitmix64(derive_seed(seed, tag, i) ^ splitmix64(~j));
}

/// mt19937_64 with hand-rolled uniform/normal draws. The standard
/// distributions are implementation-defined; these are not, so seeded
/// results are stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // modulo bias is irrelevant for n << 2^64
    return engine_() % n;
  }

  /// Standard normal via Box-Muller (one value per call, fixed draw order).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gcr
