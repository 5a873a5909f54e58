#pragma once

// Seeded, platform-stable random streams for the photon-counting simulator.
//
// Engine: std::mt19937_64 (bit-exact across standard libraries). Uniform
// doubles are built from the top 53 bits rather than through
// std::uniform_real_distribution, whose output is implementation-defined.
// Poisson variates use multiplicative inversion below mean 10 and Hormann's
// PTRS transformed rejection (1993) above it.

#include <cstdint>
#include <random>

namespace qdm::rng {

/// One SplitMix64 step (Steele, Lea & Flood 2014).
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Independent stream seed for `stream` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

/// Poisson sampler with the per-mean constants precomputed.
class PoissonSampler {
 public:
  explicit PoissonSampler(double mean);

  double mean() const noexcept { return mean_; }
  std::int64_t operator()(Generator& gen) const;

 private:
  double mean_;
  double exp_neg_mean_ = 0.0;  // inversion branch
  double log_mean_ = 0.0;      // PTRS constants below
  double a_ = 0.0;
  double b_ = 0.0;
  double log_inv_alpha_ = 0.0;
  double v_r_ = 0.0;
};

/// ln(k!) with a table for small k.
double log_factorial(std::int64_t k);

}  // namespace qdm::rng
