#include "cpaint/model.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <math.h>

namespace cpaint {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

CountTable::CountTable(std::vector<std::string> decoration_labels, std::vector<UnitLevel> units)
    : labels_(std::move(decoration_labels)), units_(std::move(units)) {
  const int dim = dimension();
  std::set<UnitKey> seen;
  for (const auto& u : units_) {
    if (u.counts.size() != dim) {
      throw ContractViolation("CountTable: unit-level count vector has length " +
                              std::to_string(u.counts.size()) + ", expected " +
                              std::to_string(dim));
    }
    if (u.counts.size() > 0 && u.counts.minCoeff() < 0) {
      throw ContractViolation("CountTable: negative count");
    }
    if (u.key.level < 0) throw ContractViolation("CountTable: negative level");
    if (!seen.insert(u.key).second) {
      throw ContractViolation("CountTable: duplicate unit key " + u.key.site + "/" + u.key.eu +
                              "/" + u.key.ru + "/" + std::to_string(u.key.level));
    }
  }
}

Eigen::VectorXi CountTable::totals() const {
  Eigen::VectorXi out(static_cast<Eigen::Index>(units_.size()));
  for (std::size_t i = 0; i < units_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = units_[i].counts.sum();
  }
  return out;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
  void str(const std::string& s) {
    const std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
};

}  // namespace

std::uint64_t CountTable::fingerprint() const {
  Fnv1a f;
  f.i64(static_cast<std::int64_t>(labels_.size()));
  for (const auto& l : labels_) f.str(l);
  f.i64(static_cast<std::int64_t>(units_.size()));
  for (const auto& u : units_) {
    f.str(u.key.site);
    f.str(u.key.eu);
    f.str(u.key.ru);
    f.i64(u.key.level);
    for (Eigen::Index d = 0; d < u.counts.size(); ++d) f.i64(u.counts[d]);
  }
  return f.h;
}

ComponentParams::ComponentParams(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
  CPAINT_REQUIRE(alpha_.size() >= 1, "ComponentParams: empty concentration vector");
  for (Eigen::Index d = 0; d < alpha_.size(); ++d) {
    if (!(alpha_[d] > 0.0) || !std::isfinite(alpha_[d])) {
      throw ContractViolation("ComponentParams: concentration must be positive and finite");
    }
  }
  alpha_bar_ = alpha_.sum();
}

void BaseMeasureConfig::validate() const {
  CPAINT_REQUIRE(exp_mean > 0.0 && std::isfinite(exp_mean), "BaseMeasureConfig: exp_mean must be > 0");
  CPAINT_REQUIRE(dimension >= 1, "BaseMeasureConfig: dimension must be >= 1");
}

double dm_log_likelihood(const Eigen::Ref<const CountVector>& counts, const ComponentParams& params) {
  CPAINT_REQUIRE(params.dimension() > 0, "dm_log_likelihood: uninitialized parameters");
  CPAINT_REQUIRE(counts.size() == params.dimension(), "dm_log_likelihood: dimension mismatch");
  const auto& alpha = params.alpha();
  long total = 0;
  double acc = 0.0;
  for (Eigen::Index d = 0; d < counts.size(); ++d) {
    const int s = counts[d];
    CPAINT_REQUIRE(s >= 0, "dm_log_likelihood: negative count");
    if (s == 0) continue;
    total += s;
    acc += log_gamma(s + alpha[d]) - log_gamma(alpha[d]);
  }
  if (total == 0) return 0.0;
  const double abar = params.alpha_bar();
  return acc + log_gamma(abar) - log_gamma(static_cast<double>(total) + abar);
}

ComponentParams sample_base_measure(const BaseMeasureConfig& base, Rng& rng) {
  base.validate();
  std::exponential_distribution<double> exponential(1.0 / base.exp_mean);
  double abar = exponential(rng);
  // An exact zero has probability zero but would break the positivity invariant.
  if (!(abar > 0.0)) abar = std::numeric_limits<double>::min();
  const Eigen::VectorXd q = sample_dirichlet(Eigen::VectorXd::Ones(base.dimension), rng);
  Eigen::VectorXd alpha = (abar * q).cwiseMax(std::numeric_limits<double>::min());
  return ComponentParams(std::move(alpha));
}

double base_measure_log_density(const ComponentParams& params, const BaseMeasureConfig& base) {
  base.validate();
  CPAINT_REQUIRE(params.dimension() == base.dimension, "base_measure_log_density: dimension mismatch");
  const double abar = params.alpha_bar();
  CPAINT_REQUIRE(abar > 0.0, "base_measure_log_density: alpha_bar must be > 0");
  return -std::log(base.exp_mean) - abar / base.exp_mean + log_gamma(base.dimension);
}

DmLikelihoodCache::DmLikelihoodCache(const ComponentParams& params)
    : alpha_(params.alpha()),
      log_gamma_alpha_(params.alpha().unaryExpr([](double a) { return log_gamma(a); })),
      alpha_bar_(params.alpha_bar()),
      log_gamma_alpha_bar_(log_gamma(params.alpha_bar())) {}

double DmLikelihoodCache::log_likelihood(const Eigen::Ref<const CountVector>& counts,
                                         long total) const {
  if (total == 0) return 0.0;
  double acc = log_gamma_alpha_bar_ - log_gamma(static_cast<double>(total) + alpha_bar_);
  for (Eigen::Index d = 0; d < counts.size(); ++d) {
    const int s = counts[d];
    if (s != 0) acc += log_gamma(s + alpha_[d]) - log_gamma_alpha_[d];
  }
  return acc;
}

}  // namespace cpaint
