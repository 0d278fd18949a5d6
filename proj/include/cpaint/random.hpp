#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace cpaint {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

/// Uniform on [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Dirichlet draw via normalized Gamma variates.
Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& concentration,
                                 Rng& rng);

/// Index drawn from unnormalized log weights. Normalizes with log-sum-exp;
/// throws ContractViolation if no weight is finite.
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng);

double log_sum_exp(std::span<const double> values);

}  // namespace cpaint
