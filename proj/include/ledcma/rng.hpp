#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "ledcma/linalg.hpp"

namespace ledcma {

/// SplitMix64 finalizer; used to decorrelate derived seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the child stream `name` of `master`. Named streams keep e.g. the
/// TPA norm draws from shifting the sampling noise.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return mix_seed(master ^ mix_seed(h));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) + mix_seed(index + 0x632BE59BD9B4E019ULL));
}

/// A seeded random stream. Copyable; a copy replays the same sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  Vector normal_vector(Index n) {
    Vector out(n);
    for (Index i = 0; i < n; ++i) out(i) = normal();
    return out;
  }

  Vector uniform_vector(Index n, double lo, double hi) {
    Vector out(n);
    for (Index i = 0; i < n; ++i) out(i) = uniform(lo, hi);
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Well-known stream names used by the harness.
namespace streams {
inline constexpr std::string_view kRotation = "rotation";
inline constexpr std::string_view kInitialMean = "initial-mean";
inline constexpr std::string_view kSampling = "sampling";
inline constexpr std::string_view kTpa = "tpa";
}  // namespace streams

}  // namespace ledcma
