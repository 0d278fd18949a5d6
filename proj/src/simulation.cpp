#include "cpaint/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "cpaint/postprocess.hpp"

namespace cpaint {

void SimulationConfig::validate() const {
  CPAINT_REQUIRE(n_cps >= 1, "SimulationConfig: n_cps must be >= 1");
  CPAINT_REQUIRE(n_sites >= 1, "SimulationConfig: n_sites must be >= 1");
  CPAINT_REQUIRE(levels_per_site >= 1, "SimulationConfig: levels_per_site must be >= 1");
  CPAINT_REQUIRE(dimension >= 1, "SimulationConfig: D must be >= 1");
  CPAINT_REQUIRE(counts_per_unit >= 1, "SimulationConfig: counts_per_unit must be >= 1");
  CPAINT_REQUIRE(rho >= 0.0 && rho <= 1.0, "SimulationConfig: rho must be in [0, 1]");
  CPAINT_REQUIRE(f >= 0.0 && f <= 0.5, "SimulationConfig: f must be in [0, 0.5]");
}

namespace {

// Pólya-urn draw of `total` sherds from DM(alpha).
CountVector polya_urn_counts(const Eigen::VectorXd& alpha, int total, Rng& rng) {
  const Eigen::Index dim = alpha.size();
  Eigen::VectorXd weights = alpha;
  double weight_sum = alpha.sum();
  CountVector counts = CountVector::Zero(dim);
  for (int n = 0; n < total; ++n) {
    const double u = uniform01(rng) * weight_sum;
    double acc = 0.0;
    Eigen::Index pick = dim - 1;
    for (Eigen::Index d = 0; d < dim; ++d) {
      acc += weights[d];
      if (u < acc) {
        pick = d;
        break;
      }
    }
    ++counts[pick];
    weights[pick] += 1.0;
    weight_sum += 1.0;
  }
  return counts;
}

// Removes `n` sherds uniformly without replacement from `pool`.
CountVector draw_without_replacement(CountVector& pool, int n, Rng& rng) {
  CountVector out = CountVector::Zero(pool.size());
  long remaining = pool.cast<long>().sum();
  for (int k = 0; k < n && remaining > 0; ++k) {
    long u = static_cast<long>(uniform01(rng) * static_cast<double>(remaining));
    for (Eigen::Index d = 0; d < pool.size(); ++d) {
      if (u < pool[d]) {
        --pool[d];
        ++out[d];
        break;
      }
      u -= pool[d];
    }
    --remaining;
  }
  return out;
}

}  // namespace

std::pair<CountTable, SimulationTruth> simulate_dataset(const SimulationConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, 0x51));
  SimulationTruth truth;
  truth.config = config;

  std::exponential_distribution<double> exponential(1.0);
  for (int k = 0; k < config.n_cps; ++k) {
    Eigen::VectorXd alpha(config.dimension);
    for (int d = 0; d < config.dimension; ++d) {
      alpha[d] = std::max(exponential(rng), std::numeric_limits<double>::min());
    }
    truth.true_params.emplace_back(std::move(alpha));
  }

  std::uniform_int_distribution<int> any_cp(0, config.n_cps - 1);
  std::uniform_int_distribution<int> other_cp(0, std::max(0, config.n_cps - 2));
  std::vector<UnitLevel> units;
  for (int site = 0; site < config.n_sites; ++site) {
    int cp = any_cp(rng);
    for (int level = 0; level < config.levels_per_site; ++level) {
      if (level > 0 && config.n_cps > 1 && uniform01(rng) < config.rho) {
        const int shift = other_cp(rng);
        cp = shift >= cp ? shift + 1 : shift;
      }
      truth.true_assignments.push_back(cp);
      UnitLevel u;
      u.key = UnitKey{"S" + std::to_string(site + 1), "1", "", level};
      u.counts = polya_urn_counts(truth.true_params[static_cast<std::size_t>(cp)].alpha(),
                                  config.counts_per_unit, rng);
      units.push_back(std::move(u));
    }
  }

  std::vector<std::string> labels;
  for (int d = 0; d < config.dimension; ++d) labels.push_back("T" + std::to_string(d + 1));
  CountTable table(std::move(labels), std::move(units));
  if (config.f > 0.0) {
    Rng mix_rng(derive_seed(config.seed, 0x4d));
    table = apply_mixing(table, truth, config.f, mix_rng);
  }
  return {std::move(table), std::move(truth)};
}

CountTable apply_mixing(const CountTable& data, const SimulationTruth& truth, double f, Rng& rng) {
  CPAINT_REQUIRE(f >= 0.0 && f <= 0.5, "apply_mixing: f must be in [0, 0.5]");
  CPAINT_REQUIRE(truth.true_assignments.empty() || truth.true_assignments.size() == data.size(),
                 "apply_mixing: truth does not match data");
  if (f == 0.0) return data;

  // Group unit indices by site, ordered by level.
  std::map<std::string, std::vector<std::size_t>> sites;
  for (std::size_t i = 0; i < data.size(); ++i) sites[data.unit(i).key.site].push_back(i);

  std::vector<UnitLevel> units = data.units();
  for (auto& [site, idx] : sites) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return data.unit(a).key.level < data.unit(b).key.level;
    });
    const std::size_t n = idx.size();
    if (n < 2) continue;
    std::vector<CountVector> incoming(n, CountVector::Zero(data.dimension()));
    for (std::size_t p = 0; p < n; ++p) {
      CountVector& pool = units[idx[p]].counts;
      const int n_swap = static_cast<int>(std::lround(f * static_cast<double>(pool.sum())));
      if (p == 0) {
        incoming[1] += draw_without_replacement(pool, n_swap, rng);
      } else if (p == n - 1) {
        incoming[n - 2] += draw_without_replacement(pool, n_swap, rng);
      } else {
        const int half = n_swap / 2;
        incoming[p - 1] += draw_without_replacement(pool, half, rng);
        incoming[p + 1] += draw_without_replacement(pool, half, rng);
      }
    }
    for (std::size_t p = 0; p < n; ++p) units[idx[p]].counts += incoming[p];
  }
  return CountTable(data.decoration_labels(), std::move(units));
}

double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y) {
  CPAINT_REQUIRE(x.size() == y.size() && x.size() >= 2, "pearson_correlation: need equal lengths >= 2");
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  if (!(denom > 0.0)) return 0.0;
  return xc.dot(yc) / denom;
}

RunMetrics evaluate_run(const ChainRecord& chain, const SimulationTruth& truth) {
  if (chain.samples.empty()) throw InputError("evaluate_run: chain has no samples");
  const auto& best = chain.samples[max_likelihood_index(chain)];
  const std::size_t n = truth.true_assignments.size();
  CPAINT_REQUIRE(best.assignments.size() == n, "evaluate_run: chain and truth disagree on unit count");

  const auto n_true = static_cast<Eigen::Index>(truth.true_params.size());
  const auto n_inf = static_cast<Eigen::Index>(best.components.size());
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(n_true, n_inf);
  for (std::size_t i = 0; i < n; ++i) overlap(truth.true_assignments[i], best.assignments[i]) += 1.0;

  // Best match maximizing overlap; Hungarian wants rows <= cols.
  std::vector<int> true_to_inferred(static_cast<std::size_t>(n_true), -1);
  if (n_true <= n_inf) {
    const auto match = min_cost_assignment(-overlap);
    for (Eigen::Index t = 0; t < n_true; ++t) true_to_inferred[static_cast<std::size_t>(t)] = match[static_cast<std::size_t>(t)];
  } else {
    const auto match = min_cost_assignment(-overlap.transpose());
    for (Eigen::Index j = 0; j < n_inf; ++j) true_to_inferred[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] = static_cast<int>(j);
  }

  // Posterior membership in the maximum-likelihood sample's label frame.
  const ChainRecord aligned = relabel_chain(chain);
  std::vector<std::map<int, double>> membership(n);
  for (const auto& s : aligned.samples) {
    for (std::size_t i = 0; i < n; ++i) membership[i][s.assignments[i]] += 1.0;
  }
  const double n_samples = static_cast<double>(aligned.samples.size());

  constexpr double kFloor = 1e-6;
  RunMetrics metrics;
  for (std::size_t i = 0; i < n; ++i) {
    const int target = true_to_inferred[static_cast<std::size_t>(truth.true_assignments[i])];
    double p = 0.0;
    if (target >= 0) {
      const auto it = membership[i].find(target);
      if (it != membership[i].end()) p = it->second / n_samples;
    }
    metrics.kl_divergence += -std::log(std::max(p, kFloor));
  }

  double corr_sum = 0.0;
  int matched = 0;
  for (Eigen::Index t = 0; t < n_true; ++t) {
    const int j = true_to_inferred[static_cast<std::size_t>(t)];
    if (j < 0 || overlap.row(t).sum() == 0.0) continue;
    if (truth.true_params[static_cast<std::size_t>(t)].dimension() < 2) continue;
    corr_sum += pearson_correlation(expected_frequencies(truth.true_params[static_cast<std::size_t>(t)]),
                                    expected_frequencies(best.components[static_cast<std::size_t>(j)]));
    ++matched;
  }
  metrics.mean_correlation = matched > 0 ? corr_sum / matched : 0.0;
  metrics.modal_k = modal_k(chain, 5);
  return metrics;
}

StudyReport run_study(const std::vector<SimulationConfig>& grid, int reps,
                      const SamplerConfig& sampler, int workers) {
  if (grid.empty()) throw InputError("run_study: empty grid");
  CPAINT_REQUIRE(reps >= 1, "run_study: reps must be >= 1");
  const std::size_t tasks = grid.size() * static_cast<std::size_t>(reps);
  std::vector<StudyRow> rows(tasks);

  auto run_task = [&](std::size_t task) {
    const std::size_t cell = task / static_cast<std::size_t>(reps);
    const int rep = static_cast<int>(task % static_cast<std::size_t>(reps));
    SimulationConfig sim = grid[cell];
    sim.seed = derive_seed(grid[cell].seed, static_cast<std::uint64_t>(rep));
    auto [data, truth] = simulate_dataset(sim);
    SamplerConfig cfg = sampler;
    cfg.base.dimension = sim.dimension;
    cfg.seed = derive_seed(sim.seed, 0x5a);
    const ChainRecord chain = run_chain(data, cfg);
    rows[task] = StudyRow{cell, rep, sim, evaluate_run(chain, truth)};
  };

  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(tasks)));
  if (threads == 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t task = next++; task < tasks; task = next++) {
          try {
            run_task(task);
          } catch (...) {
            errors[task] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  StudyReport report;
  report.rows = std::move(rows);
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    StudyCellSummary s;
    s.cell = cell;
    s.config = grid[cell];
    for (const auto& row : report.rows) {
      if (row.cell != cell) continue;
      ++s.replicates;
      s.mean_kl += row.metrics.kl_divergence;
      s.mean_correlation += row.metrics.mean_correlation;
      s.mean_modal_k += row.metrics.modal_k;
      if (row.metrics.modal_k == grid[cell].n_cps) ++s.modal_k_hits;
    }
    s.mean_kl /= s.replicates;
    s.mean_correlation /= s.replicates;
    s.mean_modal_k /= s.replicates;
    report.cells.push_back(s);
  }
  return report;
}

std::vector<SimulationConfig> make_grid(const SimulationConfig& base, const std::vector<int>& dimensions,
                                        const std::vector<int>& counts, const std::vector<double>& rhos,
                                        const std::vector<double>& fs) {
  std::vector<SimulationConfig> grid;
  std::uint64_t cell = 0;
  for (int d : dimensions) {
    for (int c : counts) {
      for (double rho : rhos) {
        for (double f : fs) {
          SimulationConfig cfg = base;
          cfg.dimension = d;
          cfg.counts_per_unit = c;
          cfg.rho = rho;
          cfg.f = f;
          cfg.seed = derive_seed(base.seed, cell++);
          cfg.validate();
          grid.push_back(cfg);
        }
      }
    }
  }
  return grid;
}

std::vector<SimulationConfig> full_grid(const SimulationConfig& base) {
  return make_grid(base, {3, 7, 15, 25}, {50, 250, 1000, 5000, 25000}, {0.0, 0.1, 0.5}, {0.0, 0.1, 0.5});
}

}  // namespace cpaint
