#include "cpaint/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace cpaint {

void SamplerConfig::validate() const {
  CPAINT_REQUIRE(gamma > 0.0 && std::isfinite(gamma), "SamplerConfig: gamma must be > 0");
  CPAINT_REQUIRE(m >= 1, "SamplerConfig: m must be >= 1");
  CPAINT_REQUIRE(iterations >= 1, "SamplerConfig: iterations must be >= 1");
  CPAINT_REQUIRE(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0,
                 "SamplerConfig: burn_in_fraction must be in [0, 1)");
  CPAINT_REQUIRE(thin >= 1, "SamplerConfig: thin must be >= 1");
  CPAINT_REQUIRE(grid_points >= 1, "SamplerConfig: grid_points must be >= 1");
  CPAINT_REQUIRE(grid_low > 0.0 && grid_low < grid_high, "SamplerConfig: need 0 < grid_low < grid_high");
  base.validate();
}

long SamplerConfig::burn_in() const {
  return static_cast<long>(std::floor(static_cast<double>(iterations) * burn_in_fraction));
}

long SamplerConfig::stored_samples() const { return (iterations - burn_in()) / thin; }

void check_state(const ChainState& state, std::size_t num_units) {
  CPAINT_REQUIRE(state.assignments.size() == num_units, "ChainState: assignment count mismatch");
  const int k = state.num_components();
  CPAINT_REQUIRE(state.occupancy.size() == static_cast<std::size_t>(k),
                 "ChainState: occupancy/components size mismatch");
  std::vector<int> counted(static_cast<std::size_t>(k), 0);
  for (int c : state.assignments) {
    CPAINT_REQUIRE(c >= 0 && c < k, "ChainState: label out of range");
    ++counted[static_cast<std::size_t>(c)];
  }
  for (int j = 0; j < k; ++j) {
    CPAINT_REQUIRE(counted[static_cast<std::size_t>(j)] >= 1, "ChainState: empty component");
    CPAINT_REQUIRE(counted[static_cast<std::size_t>(j)] == state.occupancy[static_cast<std::size_t>(j)],
                   "ChainState: stale occupancy");
  }
}

ChainState initial_state(const CountTable& data, const SamplerConfig& config, Rng& rng) {
  ChainState state;
  state.assignments.assign(data.size(), 0);
  state.components.push_back(sample_base_measure(config.base, rng));
  state.occupancy.push_back(static_cast<int>(data.size()));
  return state;
}

void gibbs_sweep_assignments(ChainState& state, const CountTable& data,
                             const SamplerConfig& config, Rng& rng) {
  const std::size_t n = data.size();
  CPAINT_REQUIRE(state.assignments.size() == n, "gibbs_sweep_assignments: state/data size mismatch");
  const Eigen::VectorXi totals = data.totals();
  const int m = config.m;
  const double log_fresh_weight = std::log(config.gamma / m);

  std::vector<DmLikelihoodCache> caches;
  caches.reserve(state.components.size() + static_cast<std::size_t>(m));
  for (const auto& c : state.components) caches.emplace_back(c);

  std::vector<ComponentParams> fresh(static_cast<std::size_t>(m));
  std::vector<DmLikelihoodCache> fresh_caches(static_cast<std::size_t>(m));
  std::vector<double> log_weights;

  for (std::size_t i = 0; i < n; ++i) {
    const int current = state.assignments[i];
    const auto cur = static_cast<std::size_t>(current);
    int first_draw = 0;
    if (--state.occupancy[cur] == 0) {
      // Singleton: its parameters become the first fresh candidate.
      fresh[0] = std::move(state.components[cur]);
      fresh_caches[0] = std::move(caches[cur]);
      first_draw = 1;
      const std::size_t last = state.components.size() - 1;
      if (cur != last) {
        state.components[cur] = std::move(state.components[last]);
        caches[cur] = std::move(caches[last]);
        state.occupancy[cur] = state.occupancy[last];
        for (int& a : state.assignments) {
          if (a == static_cast<int>(last)) a = current;
        }
      }
      state.components.pop_back();
      caches.pop_back();
      state.occupancy.pop_back();
      state.assignments[i] = -1;
    }
    for (int h = first_draw; h < m; ++h) {
      fresh[static_cast<std::size_t>(h)] = sample_base_measure(config.base, rng);
      fresh_caches[static_cast<std::size_t>(h)] = DmLikelihoodCache(fresh[static_cast<std::size_t>(h)]);
    }

    const auto& counts = data.unit(i).counts;
    const long total = totals[static_cast<Eigen::Index>(i)];
    const std::size_t k = state.components.size();
    log_weights.resize(k + static_cast<std::size_t>(m));
    for (std::size_t c = 0; c < k; ++c) {
      log_weights[c] = std::log(static_cast<double>(state.occupancy[c])) +
                       caches[c].log_likelihood(counts, total);
    }
    for (int h = 0; h < m; ++h) {
      log_weights[k + static_cast<std::size_t>(h)] =
          log_fresh_weight + fresh_caches[static_cast<std::size_t>(h)].log_likelihood(counts, total);
    }

    const std::size_t pick = sample_log_categorical(log_weights, rng);
    if (pick < k) {
      state.assignments[i] = static_cast<int>(pick);
      ++state.occupancy[pick];
    } else {
      const std::size_t h = pick - k;
      state.components.push_back(std::move(fresh[h]));
      caches.push_back(std::move(fresh_caches[h]));
      state.occupancy.push_back(1);
      state.assignments[i] = static_cast<int>(k);
    }
  }
}

int sample_table_count(int customers, double concentration, Rng& rng) {
  if (customers <= 0) return 0;
  // Customer j+1 opens a new table with probability p_j = a / (a + j). The
  // p_j decrease in j, so candidates are proposed by geometric skips under
  // the current bound and thinned by p_candidate / p_bound.
  const double a = concentration;
  int tables = 1;
  int j = 1;
  while (j < customers) {
    const double bound = a / (a + j);
    if (!(bound > 0.0)) break;
    if (bound > 0.25) {
      if (uniform01(rng) < bound) ++tables;
      ++j;
      continue;
    }
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    const double skip = std::floor(std::log(u) / std::log1p(-bound));
    if (skip >= static_cast<double>(customers - j)) break;
    const int base = j;
    j += static_cast<int>(skip);
    if (uniform01(rng) * (a + j) < a + base) ++tables;
    ++j;
  }
  return tables;
}

namespace {

struct AlphaBarGrid {
  std::vector<double> edges;
  std::vector<double> mids;
  std::vector<double> log_widths;

  explicit AlphaBarGrid(const SamplerConfig& config) {
    const int g = config.grid_points;
    const double log_lo = std::log(config.grid_low);
    const double log_hi = std::log(config.grid_high);
    edges.resize(static_cast<std::size_t>(g) + 1);
    for (int j = 0; j <= g; ++j) {
      edges[static_cast<std::size_t>(j)] = std::exp(log_lo + (log_hi - log_lo) * j / g);
    }
    edges.front() = config.grid_low;
    edges.back() = config.grid_high;
    for (int j = 0; j < g; ++j) {
      const double lo = edges[static_cast<std::size_t>(j)];
      const double hi = edges[static_cast<std::size_t>(j) + 1];
      mids.push_back(std::sqrt(lo * hi));
      log_widths.push_back(std::log(hi - lo));
    }
  }
};

}  // namespace

void update_component_params(ChainState& state, const CountTable& data,
                             const SamplerConfig& config, Rng& rng) {
  const int k = state.num_components();
  const int dim = data.dimension();
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < state.assignments.size(); ++i) {
    members[static_cast<std::size_t>(state.assignments[i])].push_back(i);
  }
  const AlphaBarGrid grid(config);
  std::vector<double> log_weights(grid.mids.size());

  for (int c = 0; c < k; ++c) {
    const auto& group = members[static_cast<std::size_t>(c)];
    if (group.empty()) throw ContractViolation("update_component_params: empty component");
    const Eigen::VectorXd& alpha = state.components[static_cast<std::size_t>(c)].alpha();

    Eigen::VectorXd tables = Eigen::VectorXd::Zero(dim);
    std::map<long, int> totals;  // N̄ -> number of members with that total
    for (std::size_t i : group) {
      const auto& counts = data.unit(i).counts;
      long total = 0;
      for (int d = 0; d < dim; ++d) {
        total += counts[d];
        tables[d] += sample_table_count(counts[d], alpha[d], rng);
      }
      if (total > 0) ++totals[total];
    }

    const Eigen::VectorXd q = sample_dirichlet(tables.array() + 1.0, rng);

    // Full conditional of Ā given the table counts:
    //   exp(−Ā/mean) · Ā^{Σt} · Π_i Γ(Ā)/Γ(N̄_i + Ā)
    const double table_total = tables.sum();
    for (std::size_t g = 0; g < grid.mids.size(); ++g) {
      const double abar = grid.mids[g];
      const double lg_abar = log_gamma(abar);
      double lw = -abar / config.base.exp_mean + table_total * std::log(abar);
      for (const auto& [total, count] : totals) {
        lw += count * (lg_abar - log_gamma(static_cast<double>(total) + abar));
      }
      log_weights[g] = lw + grid.log_widths[g];
    }
    const std::size_t cell = sample_log_categorical(log_weights, rng);
    const double lo = grid.edges[cell];
    const double hi = grid.edges[cell + 1];
    const double abar = lo + uniform01(rng) * (hi - lo);

    Eigen::VectorXd new_alpha = (abar * q).cwiseMax(std::numeric_limits<double>::min());
    state.components[static_cast<std::size_t>(c)] = ComponentParams(std::move(new_alpha));
  }
}

double data_log_likelihood(const std::vector<int>& assignments,
                           const std::vector<ComponentParams>& components, const CountTable& data) {
  CPAINT_REQUIRE(assignments.size() == data.size(), "data_log_likelihood: size mismatch");
  double ll = 0.0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    ll += dm_log_likelihood(data.unit(i).counts, components.at(static_cast<std::size_t>(assignments[i])));
  }
  return ll;
}

double crp_log_partition_probability(const std::vector<int>& assignments, double gamma) {
  std::map<int, long> sizes;
  for (int a : assignments) ++sizes[a];
  const double n = static_cast<double>(assignments.size());
  double lp = static_cast<double>(sizes.size()) * std::log(gamma) + log_gamma(gamma) -
              log_gamma(gamma + n);
  for (const auto& [label, size] : sizes) lp += log_gamma(static_cast<double>(size));
  return lp;
}

double joint_log_density(const ChainSample& sample, const CountTable& data,
                         const SamplerConfig& config) {
  double lp = crp_log_partition_probability(sample.assignments, config.gamma);
  for (const auto& c : sample.components) lp += base_measure_log_density(c, config.base);
  return lp + data_log_likelihood(sample.assignments, sample.components, data);
}

double crp_expected_clusters(long n, double gamma) {
  CPAINT_REQUIRE(n >= 1, "crp_expected_clusters: n must be >= 1");
  CPAINT_REQUIRE(gamma > 0.0, "crp_expected_clusters: gamma must be > 0");
  double sum = 0.0;
  for (long i = 1; i <= n; ++i) sum += gamma / (gamma + static_cast<double>(i - 1));
  return sum;
}

ChainRecord run_chain(const CountTable& data, const SamplerConfig& config, int chain_index) {
  config.validate();
  if (data.empty()) throw InputError("run_chain: empty data");
  CPAINT_REQUIRE(data.dimension() == config.base.dimension,
                 "run_chain: base measure dimension does not match data");
  const Eigen::VectorXi totals = data.totals();
  for (Eigen::Index i = 0; i < totals.size(); ++i) {
    if (totals[i] < 1) {
      throw InputError("run_chain: unit-level " + std::to_string(i + 1) +
                       " has no observations; filter zero rows first");
    }
  }

  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(chain_index)));
  ChainRecord record;
  record.config = config;
  record.data_fingerprint = data.fingerprint();
  record.chain_index = chain_index;
  record.samples.reserve(static_cast<std::size_t>(config.stored_samples()));

  const long burn_in = config.burn_in();
  ChainState state = initial_state(data, config, rng);
  for (long it = 1; it <= config.iterations; ++it) {
    gibbs_sweep_assignments(state, data, config, rng);
    update_component_params(state, data, config, rng);
    state.iteration = it;
#ifndef NDEBUG
    check_state(state, data.size());
#endif
    if (it > burn_in && (it - burn_in) % config.thin == 0) {
      ChainSample sample;
      sample.iteration = it;
      sample.assignments = state.assignments;
      sample.components = state.components;
      sample.log_likelihood = data_log_likelihood(state.assignments, state.components, data);
      record.samples.push_back(std::move(sample));
    }
  }
  return record;
}

std::vector<ChainRecord> run_chains(const CountTable& data, const SamplerConfig& config,
                                    int num_chains, int workers) {
  CPAINT_REQUIRE(num_chains >= 1, "run_chains: need at least one chain");
  std::vector<ChainRecord> records(static_cast<std::size_t>(num_chains));
  const int threads = workers <= 0 ? num_chains : std::min(workers, num_chains);
  if (threads == 1) {
    for (int c = 0; c < num_chains; ++c) records[static_cast<std::size_t>(c)] = run_chain(data, config, c);
    return records;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(num_chains));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int c = next++; c < num_chains; c = next++) {
        try {
          records[static_cast<std::size_t>(c)] = run_chain(data, config, c);
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

}  // namespace cpaint
