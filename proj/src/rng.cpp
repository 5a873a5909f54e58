#include "qdm/rng.hpp"

#include "qdm/error.hpp"

#include <array>
#include <cmath>

namespace qdm::rng {

namespace {

constexpr std::size_t kTableSize = 2048;
constexpr double kPtrsThreshold = 10.0;

const std::array<double, kTableSize>& factorial_table() {
  static const auto table = [] {
    std::array<double, kTableSize> t{};
    for (std::size_t k = 0; k < kTableSize; ++k) t[k] = std::lgamma(static_cast<double>(k) + 1.0);
    return t;
  }();
  return table;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  std::uint64_t s = master;
  const std::uint64_t base = splitmix64(s);
  std::uint64_t t = base ^ (stream * 0xD1B54A32D192ED03ULL);
  return splitmix64(t);
}

double log_factorial(std::int64_t k) {
  if (k < 0) throw DomainError("log_factorial of a negative number");
  if (static_cast<std::size_t>(k) < kTableSize) return factorial_table()[static_cast<std::size_t>(k)];
  return std::lgamma(static_cast<double>(k) + 1.0);
}

PoissonSampler::PoissonSampler(double mean) : mean_(mean) {
  if (!std::isfinite(mean) || mean < 0.0) throw DomainError("Poisson mean must be finite and >= 0");
  if (mean < kPtrsThreshold) {
    exp_neg_mean_ = std::exp(-mean);
    return;
  }
  const double smu = std::sqrt(mean);
  log_mean_ = std::log(mean);
  b_ = 0.931 + 2.53 * smu;
  a_ = -0.059 + 0.02483 * b_;
  log_inv_alpha_ = std::log(1.1239 + 1.1328 / (b_ - 3.4));
  v_r_ = 0.9277 - 3.6224 / (b_ - 2.0);
}

std::int64_t PoissonSampler::operator()(Generator& gen) const {
  if (mean_ < kPtrsThreshold) {
    if (mean_ == 0.0) return 0;
    std::int64_t k = 0;
    double prod = gen.uniform();
    while (prod > exp_neg_mean_) {
      ++k;
      prod *= gen.uniform();
    }
    return k;
  }
  while (true) {
    const double u = gen.uniform() - 0.5;
    const double v = gen.uniform();
    const double us = 0.5 - std::fabs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a_ / us + b_) * u + mean_ + 0.43));
    if (us >= 0.07 && v <= v_r_) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + log_inv_alpha_ - std::log(a_ / (us * us) + b_) <=
        -mean_ + static_cast<double>(k) * log_mean_ - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace qdm::rng
