#pragma once

#include <span>
#include <string>
#include <vector>

#include "cpaint/postprocess.hpp"

namespace cpaint {

struct TraceSeries {
  std::vector<double> values;
  std::string label;

  TraceSeries() = default;
  TraceSeries(std::vector<double> v, std::string l = {});

  std::size_t size() const { return values.size(); }
};

/// Per-sample log-likelihood trace of a chain.
TraceSeries likelihood_trace(const ChainRecord& chain);

/// Biased sample autocovariances for lags 0..n-1 (FFT-based).
Eigen::VectorXd autocovariance(std::span<const double> values);

/// Biased sample autocorrelation at `lag`.
double autocorrelation(const TraceSeries& series, std::size_t lag);

/// n / (1 + 2 Σ ρ_t) with Geyer's initial positive sequence truncation,
/// capped at n.
double effective_sample_size(const TraceSeries& series);

/// Long-run variance estimate (spectral density at frequency zero, scaled so
/// that iid data return their variance): mean periodogram over the lowest
/// max(1, floor(window * n)) nonzero Fourier frequencies.
double spectral_density_at_zero(std::span<const double> values, double window = 0.04);

/// Geweke Z comparing the first frac_a of the chain against the last frac_b.
double geweke_z(const TraceSeries& series, double frac_a = 0.1, double frac_b = 0.5);

struct PairAgreement {
  int chain_a = 0;
  int chain_b = 0;
  double mean_abs_incidence_diff = 0.0;
  int modal_k_a = 0;
  int modal_k_b = 0;
  bool modal_k_agree = false;
  /// Largest KL between Hungarian-matched expected-frequency vectors of the
  /// two chains' maximum-likelihood samples.
  double max_matched_kl = 0.0;
};

struct RunAgreement {
  std::vector<PairAgreement> pairs;
};

/// Pairwise agreement between independent chains on the same data.
RunAgreement compare_runs(std::span<const ChainRecord> chains, int min_members = 5);

}  // namespace cpaint
