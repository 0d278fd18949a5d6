#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpaint/error.hpp"
#include "cpaint/random.hpp"

namespace cpaint {

using CountVector = Eigen::VectorXi;

/// log Gamma(x) for x > 0. Reentrant (safe across chain threads).
double log_gamma(double x);

/// One row of the count table: all sherds from one depth increment of one
/// spatial unit. `ru` is empty when the table was aggregated above RU level.
struct UnitKey {
  std::string site;
  std::string eu;
  std::string ru;
  int level = 0;

  auto operator<=>(const UnitKey&) const = default;
  bool operator==(const UnitKey&) const = default;
};

struct UnitLevel {
  UnitKey key;
  CountVector counts;

  long total() const { return counts.cast<long>().sum(); }
};

/// Unit-levels x decoration-type counts. Construction validates dimensions,
/// non-negativity and key uniqueness.
class CountTable {
 public:
  CountTable() = default;
  CountTable(std::vector<std::string> decoration_labels, std::vector<UnitLevel> units);

  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  int dimension() const { return static_cast<int>(labels_.size()); }

  const std::vector<UnitLevel>& units() const { return units_; }
  const UnitLevel& unit(std::size_t i) const { return units_[i]; }
  const std::vector<std::string>& decoration_labels() const { return labels_; }

  /// Row totals N̄ in unit order.
  Eigen::VectorXi totals() const;

  /// 64-bit FNV-1a over a canonical serialization of labels, keys and counts.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> labels_;
  std::vector<UnitLevel> units_;
};

/// Dirichlet-multinomial concentration vector for one cultural period.
class ComponentParams {
 public:
  ComponentParams() = default;
  explicit ComponentParams(Eigen::VectorXd alpha);

  const Eigen::VectorXd& alpha() const { return alpha_; }
  double alpha_bar() const { return alpha_bar_; }
  int dimension() const { return static_cast<int>(alpha_.size()); }

  bool operator==(const ComponentParams& other) const { return alpha_ == other.alpha_; }

 private:
  Eigen::VectorXd alpha_;
  double alpha_bar_ = 0.0;
};

/// G0: total concentration ~ Exponential(mean exp_mean), proportions ~
/// uniform Dirichlet on the D-simplex.
struct BaseMeasureConfig {
  double exp_mean = 1.0;
  int dimension = 1;

  void validate() const;
};

/// log DM(counts | alpha) without the multinomial coefficient, i.e.
///   log Γ(Ā) − log Γ(N̄ + Ā) + Σ_d [log Γ(s_d + α_d) − log Γ(α_d)].
double dm_log_likelihood(const Eigen::Ref<const CountVector>& counts, const ComponentParams& params);

ComponentParams sample_base_measure(const BaseMeasureConfig& base, Rng& rng);

/// log density of (Ā, q) under G0 = log Exp(Ā; mean) + log Γ(D).
double base_measure_log_density(const ComponentParams& params, const BaseMeasureConfig& base);

/// α / Ā.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> expected_frequencies(
    const Eigen::MatrixBase<Derived>& alpha) {
  return alpha / alpha.sum();
}

inline Eigen::VectorXd expected_frequencies(const ComponentParams& params) {
  return params.alpha() / params.alpha_bar();
}

/// Precomputed per-component terms so repeated likelihood evaluations cost
/// one log-Gamma per non-zero count.
class DmLikelihoodCache {
 public:
  DmLikelihoodCache() = default;
  explicit DmLikelihoodCache(const ComponentParams& params);

  double log_likelihood(const Eigen::Ref<const CountVector>& counts, long total) const;

 private:
  Eigen::VectorXd alpha_;
  Eigen::VectorXd log_gamma_alpha_;
  double alpha_bar_ = 0.0;
  double log_gamma_alpha_bar_ = 0.0;
};

}  // namespace cpaint
