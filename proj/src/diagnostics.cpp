#include "cpaint/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

namespace cpaint {

TraceSeries::TraceSeries(std::vector<double> v, std::string l)
    : values(std::move(v)), label(std::move(l)) {
  for (double x : values) {
    if (!std::isfinite(x)) throw InputError("TraceSeries: non-finite value in '" + label + "'");
  }
}

TraceSeries likelihood_trace(const ChainRecord& chain) {
  std::vector<double> v;
  v.reserve(chain.samples.size());
  for (const auto& s : chain.samples) v.push_back(s.log_likelihood);
  return TraceSeries(std::move(v), "log_likelihood");
}

namespace {

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

Eigen::VectorXd autocovariance(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  const double mean = mean_of(values);
  const std::size_t nfft = next_pow2(2 * n);
  std::vector<std::complex<double>> centered(nfft, 0.0), spectrum;
  for (std::size_t t = 0; t < n; ++t) centered[t] = values[t] - mean;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, centered);
  for (auto& z : spectrum) z = std::norm(z);
  std::vector<std::complex<double>> acov;
  fft.inv(acov, spectrum);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) out[static_cast<Eigen::Index>(k)] = acov[k].real() / static_cast<double>(n);
  return out;
}

double autocorrelation(const TraceSeries& series, std::size_t lag) {
  const std::size_t n = series.size();
  CPAINT_REQUIRE(lag < n, "autocorrelation: lag must be < series length");
  const double mean = mean_of(series.values);
  double c0 = 0.0;
  for (double v : series.values) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw DegenerateSeries("autocorrelation: constant series");
  if (lag == 0) return 1.0;
  double ck = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) ck += (series.values[t] - mean) * (series.values[t + lag] - mean);
  return ck / c0;
}

double effective_sample_size(const TraceSeries& series) {
  const std::size_t n = series.size();
  if (n < 10) throw DegenerateSeries("effective_sample_size: need at least 10 values");
  const Eigen::VectorXd acov = autocovariance(series.values);
  if (!(acov[0] > 0.0)) throw DegenerateSeries("effective_sample_size: constant series");
  const Eigen::VectorXd rho = acov / acov[0];
  // Geyer: sum pairs Γ_k = ρ_{2k} + ρ_{2k+1} while they stay positive.
  double pair_sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double gamma_k = rho[static_cast<Eigen::Index>(2 * k)] + rho[static_cast<Eigen::Index>(2 * k + 1)];
    if (gamma_k <= 0.0) break;
    pair_sum += gamma_k;
  }
  const double tau = -1.0 + 2.0 * pair_sum;
  return static_cast<double>(n) / std::max(tau, 1.0);
}

double spectral_density_at_zero(std::span<const double> values, double window) {
  const std::size_t n = values.size();
  if (n < 2) throw DegenerateSeries("spectral_density_at_zero: need at least two values");
  const double mean = mean_of(values);
  std::vector<std::complex<double>> centered(n), spectrum;
  for (std::size_t t = 0; t < n; ++t) centered[t] = values[t] - mean;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, centered);
  const std::size_t max_freq = std::max<std::size_t>(1, n / 2);
  const std::size_t width = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(window * static_cast<double>(n))), 1, max_freq);
  double acc = 0.0;
  for (std::size_t j = 1; j <= width; ++j) acc += std::norm(spectrum[j]) / static_cast<double>(n);
  return acc / static_cast<double>(width);
}

double geweke_z(const TraceSeries& series, double frac_a, double frac_b) {
  CPAINT_REQUIRE(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0,
                 "geweke_z: segment fractions must be positive and non-overlapping");
  const std::size_t n = series.size();
  const auto len_a = static_cast<std::size_t>(std::floor(frac_a * static_cast<double>(n)));
  const auto len_b = static_cast<std::size_t>(std::floor(frac_b * static_cast<double>(n)));
  if (len_a < 2 || len_b < 2) throw DegenerateSeries("geweke_z: segments too short");
  const std::span<const double> all(series.values);
  const auto a = all.first(len_a);
  const auto b = all.last(len_b);
  const double var_a = spectral_density_at_zero(a) / static_cast<double>(len_a);
  const double var_b = spectral_density_at_zero(b) / static_cast<double>(len_b);
  const double denom = var_a + var_b;
  if (!(denom > 0.0)) throw DegenerateSeries("geweke_z: segments have zero variance");
  return (mean_of(a) - mean_of(b)) / std::sqrt(denom);
}

RunAgreement compare_runs(std::span<const ChainRecord> chains, int min_members) {
  if (chains.size() < 2) throw InputError("compare_runs: need at least two chains");
  for (const auto& c : chains) {
    if (c.data_fingerprint != chains.front().data_fingerprint) {
      throw InputError("compare_runs: chains were fit to different data");
    }
  }
  std::vector<IncidenceMatrix> incidence;
  std::vector<int> modes;
  std::vector<std::vector<Eigen::VectorXd>> freqs;
  for (const auto& c : chains) {
    incidence.push_back(incidence_matrix(c));
    modes.push_back(modal_k(c, min_members));
    const auto& best = c.samples[max_likelihood_index(c)];
    const auto sizes = cluster_sizes(best);
    std::vector<Eigen::VectorXd> f;
    for (std::size_t label = 0; label < sizes.size(); ++label) {
      if (sizes[label] > 0) f.push_back(expected_frequencies(best.components[label]));
    }
    freqs.push_back(std::move(f));
  }

  RunAgreement report;
  for (std::size_t a = 0; a < chains.size(); ++a) {
    for (std::size_t b = a + 1; b < chains.size(); ++b) {
      PairAgreement pair;
      pair.chain_a = static_cast<int>(a);
      pair.chain_b = static_cast<int>(b);
      pair.mean_abs_incidence_diff = (incidence[a].values - incidence[b].values).cwiseAbs().mean();
      pair.modal_k_a = modes[a];
      pair.modal_k_b = modes[b];
      pair.modal_k_agree = modes[a] == modes[b];

      const bool a_rows = freqs[a].size() <= freqs[b].size();
      const auto& rows = a_rows ? freqs[a] : freqs[b];
      const auto& cols = a_rows ? freqs[b] : freqs[a];
      Eigen::MatrixXd cost(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
          cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kl_divergence(rows[i], cols[j]);
        }
      }
      const auto match = min_cost_assignment(cost);
      for (std::size_t i = 0; i < match.size(); ++i) {
        pair.max_matched_kl = std::max(pair.max_matched_kl, cost(static_cast<Eigen::Index>(i), match[i]));
      }
      report.pairs.push_back(pair);
    }
  }
  return report;
}

}  // namespace cpaint
