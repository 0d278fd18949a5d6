#include "cpaint/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpaint/error.hpp"

namespace cpaint {

Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& concentration,
                                 Rng& rng) {
  Eigen::VectorXd draw(concentration.size());
  for (Eigen::Index d = 0; d < concentration.size(); ++d) {
    std::gamma_distribution<double> gamma(concentration[d], 1.0);
    draw[d] = gamma(rng);
  }
  const double total = draw.sum();
  CPAINT_REQUIRE(total > 0.0, "sample_dirichlet: all gamma variates underflowed");
  draw /= total;
  // Keep every coordinate strictly positive so derived concentrations stay valid.
  constexpr double kFloor = std::numeric_limits<double>::min();
  draw = draw.cwiseMax(kFloor);
  return draw;
}

double log_sum_exp(std::span<const double> values) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : values) max = std::max(max, v);
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) {
    throw ContractViolation("sample_log_categorical: no finite weight (numerical fault)");
  }
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double p = std::exp(log_weights[i] - norm);
    if (p > 0.0) last_positive = i;
    cumulative += p;
    if (u < cumulative) return i;
  }
  // Rounding left cumulative slightly below one.
  return last_positive;
}

}  // namespace cpaint
