// Deterministic cross-platform RNG. SplitMix64 (Steele, Lea & Flood 2014)
// with the standard constants; uniforms take the top 53 bits, normals use
// Box-Muller. None of this depends on libstdc++ distribution internals, so
// fixtures generated from a seed are identical across platforms.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace transtmle {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mu = 0.0, double sigma = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mu + sigma * spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mu + sigma * r * std::cos(theta);
  }

  // Index into a discrete distribution given by (possibly unnormalized)
  // nonnegative weights.
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stream derivation for replication i: one SplitMix64 scramble of
// (seed XOR golden-ratio * (i+1)). Independent replications get
// well-separated states without sharing a sequence.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng h(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  return h.next_u64();
}

}  // namespace transtmle
