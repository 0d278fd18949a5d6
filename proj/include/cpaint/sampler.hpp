#pragma once

#include <cstdint>
#include <vector>

#include "cpaint/model.hpp"

namespace cpaint {

struct SamplerConfig {
  double gamma = 1.0;  // DP concentration, fixed
  int m = 3;           // fresh auxiliary components per assignment update
  long iterations = 1000;
  double burn_in_fraction = 0.30;
  long thin = 100;
  int grid_points = 200;
  double grid_low = 1e-3;
  double grid_high = 1e3;
  std::uint64_t seed = 1;
  BaseMeasureConfig base;

  void validate() const;
  long burn_in() const;
  /// Number of samples a run of this configuration stores.
  long stored_samples() const;
};

/// Live sampler state. Labels are 0-based indices into `components`.
struct ChainState {
  std::vector<int> assignments;
  std::vector<ComponentParams> components;
  std::vector<int> occupancy;
  long iteration = 0;

  int num_components() const { return static_cast<int>(components.size()); }
};

struct ChainSample {
  long iteration = 0;
  std::vector<int> assignments;  // 0-based
  std::vector<ComponentParams> components;
  double log_likelihood = 0.0;

  int num_components() const { return static_cast<int>(components.size()); }
};

struct ChainRecord {
  std::vector<ChainSample> samples;
  SamplerConfig config;
  std::uint64_t data_fingerprint = 0;
  int chain_index = 0;
  // Set by aggregate_small_clusters: labels >= k_primary form the residual
  // period. Zero means the chain holds raw sampler labels.
  int k_primary = 0;
};

/// Throws ContractViolation unless labels are contiguous, every component is
/// occupied, and occupancy matches the assignment vector.
void check_state(const ChainState& state, std::size_t num_units);

/// All units in one component drawn from G0.
ChainState initial_state(const CountTable& data, const SamplerConfig& config, Rng& rng);

/// One collapsed-Gibbs pass over all unit-levels in index order with m fresh
/// candidate components per visit. Empty components are purged on the fly so
/// labels stay contiguous.
void gibbs_sweep_assignments(ChainState& state, const CountTable& data,
                             const SamplerConfig& config, Rng& rng);

/// Auxiliary table counts -> conjugate Dirichlet draw of the proportions ->
/// griddy Gibbs draw of the total concentration, for every component.
void update_component_params(ChainState& state, const CountTable& data,
                             const SamplerConfig& config, Rng& rng);

/// Number of occupied tables when `customers` arrive at a Pólya urn with
/// concentration `concentration`.
int sample_table_count(int customers, double concentration, Rng& rng);

/// Σ_i log DM(s_i | A_{c_i}).
double data_log_likelihood(const std::vector<int>& assignments,
                           const std::vector<ComponentParams>& components, const CountTable& data);

/// log probability of a partition under the CRP with concentration gamma.
double crp_log_partition_probability(const std::vector<int>& assignments, double gamma);

/// CRP partition term + Σ_k log G0(A_k) + data log-likelihood.
double joint_log_density(const ChainSample& sample, const CountTable& data,
                         const SamplerConfig& config);

/// Σ_{i=1..N} γ / (γ + i − 1).
double crp_expected_clusters(long n, double gamma);

ChainRecord run_chain(const CountTable& data, const SamplerConfig& config, int chain_index = 0);

/// Independent chains with RNG streams derived from (seed, chain index);
/// `workers` threads (0 = one per chain). Results are in chain order and do
/// not depend on the worker count.
std::vector<ChainRecord> run_chains(const CountTable& data, const SamplerConfig& config,
                                    int num_chains, int workers = 0);

}  // namespace cpaint
