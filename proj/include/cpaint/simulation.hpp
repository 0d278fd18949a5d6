#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cpaint/sampler.hpp"

namespace cpaint {

struct SimulationConfig {
  int n_cps = 5;
  int n_sites = 5;
  int levels_per_site = 20;
  int dimension = 15;
  int counts_per_unit = 1000;
  double rho = 0.1;  // probability of switching CP between successive levels
  double f = 0.0;    // fraction of each unit-level swapped with its neighbours
  std::uint64_t seed = 1;

  void validate() const;
  int total_units() const { return n_sites * levels_per_site; }
};

struct SimulationTruth {
  std::vector<int> true_assignments;  // 0-based CP per unit-level
  std::vector<ComponentParams> true_params;
  SimulationConfig config;
};

/// Draws parameters, CP sequences and counts. Sites are "S1".."Sn" with a
/// single excavation unit each; levels are 0-based.
std::pair<CountTable, SimulationTruth> simulate_dataset(const SimulationConfig& config);

/// Exchanges round(f·N̄) randomly chosen sherds of every level with its
/// neighbours in the same site (half up, half down for interior levels).
CountTable apply_mixing(const CountTable& data, const SimulationTruth& truth, double f, Rng& rng);

struct RunMetrics {
  double kl_divergence = 0.0;
  double mean_correlation = 0.0;
  int modal_k = 0;
};

/// Pearson correlation of two equal-length vectors.
double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y);

RunMetrics evaluate_run(const ChainRecord& chain, const SimulationTruth& truth);

struct StudyRow {
  std::size_t cell = 0;
  int replicate = 0;
  SimulationConfig config;
  RunMetrics metrics;
};

struct StudyCellSummary {
  std::size_t cell = 0;
  SimulationConfig config;
  int replicates = 0;
  double mean_kl = 0.0;
  double mean_correlation = 0.0;
  double mean_modal_k = 0.0;
  int modal_k_hits = 0;  // replicates whose modal K equals n_cps
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::vector<StudyCellSummary> cells;
};

/// Runs `reps` seeded replicates per grid cell. Replicate r of cell c uses
/// simulation seed derive_seed(cell.seed, r) and sampler seed derived from
/// that, so rows are reproducible independently of execution order.
StudyReport run_study(const std::vector<SimulationConfig>& grid, int reps,
                      const SamplerConfig& sampler, int workers = 1);

/// Cartesian product of the given value lists over a template config.
std::vector<SimulationConfig> make_grid(const SimulationConfig& base, const std::vector<int>& dimensions,
                                        const std::vector<int>& counts, const std::vector<double>& rhos,
                                        const std::vector<double>& fs);

/// D ∈ {3,7,15,25} × counts ∈ {50,250,1000,5000,25000} × ρ ∈ {0,0.1,0.5} ×
/// f ∈ {0,0.1,0.5}.
std::vector<SimulationConfig> full_grid(const SimulationConfig& base);

}  // namespace cpaint
