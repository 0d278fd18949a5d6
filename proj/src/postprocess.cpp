#include "cpaint/postprocess.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace cpaint {

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  CPAINT_REQUIRE(n <= m, "min_cost_assignment: need rows <= cols");
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Potentials formulation, 1-based with a sentinel column 0.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return row_to_col;
}

IncidenceMatrix incidence_matrix(const ChainRecord& chain) {
  if (chain.samples.empty()) throw InputError("incidence_matrix: chain has no samples");
  const auto n = static_cast<Eigen::Index>(chain.samples.front().assignments.size());
  Eigen::MatrixXd shared = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : chain.samples) {
    CPAINT_REQUIRE(static_cast<Eigen::Index>(s.assignments.size()) == n,
                   "incidence_matrix: samples disagree on unit count");
    for (Eigen::Index i = 0; i < n; ++i) {
      const int ci = s.assignments[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (ci == s.assignments[static_cast<std::size_t>(j)]) shared(i, j) += 1.0;
      }
    }
  }
  shared /= static_cast<double>(chain.samples.size());
  IncidenceMatrix out;
  out.values = shared.triangularView<Eigen::StrictlyUpper>();
  out.values += shared.triangularView<Eigen::StrictlyUpper>().transpose();
  out.values.diagonal().setOnes();
  return out;
}

double medoid_cost(const Eigen::MatrixXd& dissimilarity, const std::vector<int>& medoids) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < dissimilarity.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int med : medoids) best = std::min(best, dissimilarity(i, med));
    cost += best;
  }
  return cost;
}

KMedoidsResult cluster_incidence(const IncidenceMatrix& matrix, int k, std::uint64_t seed) {
  const int n = static_cast<int>(matrix.size());
  if (k < 1 || k > n) {
    throw InputError("cluster_incidence: k=" + std::to_string(k) + " must be in [1, " +
                     std::to_string(n) + "]");
  }
  Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(n, n) - matrix.values;
  dist.diagonal().setZero();

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x6b6d));
  std::shuffle(order.begin(), order.end(), rng);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> medoids;
  std::vector<char> is_medoid(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, kInf);

  // BUILD: greedily add the medoid that lowers total cost the most.
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_cost = kInf;
    for (int c : order) {
      if (is_medoid[static_cast<std::size_t>(c)]) continue;
      const double cost = nearest.cwiseMin(dist.col(c)).sum();
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    medoids.push_back(best);
    is_medoid[static_cast<std::size_t>(best)] = 1;
    nearest = nearest.cwiseMin(dist.col(best));
  }

  // SWAP: apply the best improving (medoid, non-medoid) exchange until none.
  for (;;) {
    Eigen::VectorXd first(n), second(n);
    std::vector<int> first_pos(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      double a = kInf, b = kInf;
      int pos = 0;
      for (int mpos = 0; mpos < k; ++mpos) {
        const double d = dist(i, medoids[static_cast<std::size_t>(mpos)]);
        if (d < a) {
          b = a;
          a = d;
          pos = mpos;
        } else if (d < b) {
          b = d;
        }
      }
      first[i] = a;
      second[i] = b;
      first_pos[static_cast<std::size_t>(i)] = pos;
    }
    const double current = first.sum();
    double best_cost = current;
    int best_pos = -1, best_h = -1;
    for (int mpos = 0; mpos < k; ++mpos) {
      for (int h : order) {
        if (is_medoid[static_cast<std::size_t>(h)]) continue;
        double cost = 0.0;
        for (int i = 0; i < n; ++i) {
          const double others =
              first_pos[static_cast<std::size_t>(i)] == mpos ? second[i] : first[i];
          cost += std::min(others, dist(i, h));
        }
        if (cost < best_cost - 1e-12) {
          best_cost = cost;
          best_pos = mpos;
          best_h = h;
        }
      }
    }
    if (best_pos < 0) break;
    is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(best_pos)])] = 0;
    medoids[static_cast<std::size_t>(best_pos)] = best_h;
    is_medoid[static_cast<std::size_t>(best_h)] = 1;
  }

  KMedoidsResult result;
  result.medoids = medoids;
  result.assignments.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int mpos = 1; mpos < k; ++mpos) {
      if (dist(i, medoids[static_cast<std::size_t>(mpos)]) <
          dist(i, medoids[static_cast<std::size_t>(best)])) {
        best = mpos;
      }
    }
    result.assignments[static_cast<std::size_t>(i)] = best;
  }
  result.total_cost = medoid_cost(dist, medoids);
  return result;
}

std::vector<int> cluster_sizes(const ChainSample& sample) {
  int max_label = -1;
  for (int a : sample.assignments) max_label = std::max(max_label, a);
  std::vector<int> sizes(static_cast<std::size_t>(max_label + 1), 0);
  for (int a : sample.assignments) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

int count_large_clusters(const ChainSample& sample, int min_members) {
  const auto sizes = cluster_sizes(sample);
  return static_cast<int>(
      std::count_if(sizes.begin(), sizes.end(), [&](int s) { return s >= min_members; }));
}

int select_primary_k(const ChainRecord& chain, int min_members) {
  if (chain.samples.empty()) throw InputError("select_primary_k: chain has no samples");
  int best = std::numeric_limits<int>::max();
  for (const auto& s : chain.samples) best = std::min(best, count_large_clusters(s, min_members));
  return best;
}

int modal_k(const ChainRecord& chain, int min_members) {
  if (chain.samples.empty()) throw InputError("modal_k: chain has no samples");
  std::map<int, long> freq;
  for (const auto& s : chain.samples) ++freq[count_large_clusters(s, min_members)];
  int mode = 0;
  long best = -1;
  for (const auto& [k, count] : freq) {
    if (count > best) {
      best = count;
      mode = k;
    }
  }
  return mode;
}

std::vector<long> k_histogram(const ChainRecord& chain) {
  std::vector<long> hist;
  for (const auto& s : chain.samples) {
    const auto sizes = cluster_sizes(s);
    const auto k = static_cast<std::size_t>(
        std::count_if(sizes.begin(), sizes.end(), [](int v) { return v > 0; }));
    if (hist.size() <= k) hist.resize(k + 1, 0);
    ++hist[k];
  }
  return hist;
}

ChainRecord aggregate_small_clusters(const ChainRecord& chain, int k_primary) {
  CPAINT_REQUIRE(k_primary >= 1, "aggregate_small_clusters: k_primary must be >= 1");
  const int old_residual = chain.k_primary > 0 ? chain.k_primary : -1;
  ChainRecord out = chain;
  out.k_primary = k_primary;
  for (auto& s : out.samples) {
    const auto sizes = cluster_sizes(s);
    std::vector<int> ranked;
    for (int label = 0; label < static_cast<int>(sizes.size()); ++label) {
      if (sizes[static_cast<std::size_t>(label)] > 0 && label != old_residual) ranked.push_back(label);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
      return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
    });

    std::vector<int> remap(sizes.size(), k_primary);
    std::vector<ComponentParams> components;
    const auto n_primary = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k_primary));
    for (std::size_t r = 0; r < n_primary; ++r) {
      remap[static_cast<std::size_t>(ranked[r])] = static_cast<int>(r);
      components.push_back(s.components.at(static_cast<std::size_t>(ranked[r])));
    }
    const bool old_residual_present =
        old_residual >= 0 && old_residual < static_cast<int>(sizes.size()) &&
        sizes[static_cast<std::size_t>(old_residual)] > 0;
    if (old_residual_present) {
      components.push_back(s.components.at(static_cast<std::size_t>(old_residual)));
    } else if (ranked.size() > n_primary) {
      // The residual carries the parameters of its largest constituent.
      components.push_back(s.components.at(static_cast<std::size_t>(ranked[n_primary])));
    }
    for (int& a : s.assignments) a = remap[static_cast<std::size_t>(a)];
    s.components = std::move(components);
  }
  return out;
}

std::size_t max_likelihood_index(const ChainRecord& chain) {
  if (chain.samples.empty()) throw InputError("chain has no samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < chain.samples.size(); ++i) {
    if (chain.samples[i].log_likelihood > chain.samples[best].log_likelihood) best = i;
  }
  return best;
}

namespace {

// Labels in a sample eligible for permutation, with their frequency vectors.
struct PrimaryLabels {
  std::vector<int> labels;
  std::vector<Eigen::VectorXd> freqs;
};

PrimaryLabels primary_labels(const ChainSample& s, int k_primary) {
  PrimaryLabels out;
  const auto sizes = cluster_sizes(s);
  for (int label = 0; label < static_cast<int>(sizes.size()); ++label) {
    if (sizes[static_cast<std::size_t>(label)] == 0) continue;
    if (k_primary > 0 && label >= k_primary) continue;
    out.labels.push_back(label);
    out.freqs.push_back(expected_frequencies(s.components.at(static_cast<std::size_t>(label))));
  }
  return out;
}

}  // namespace

ChainRecord relabel_chain(const ChainRecord& chain) {
  if (chain.samples.empty()) return chain;
  const int k_primary = chain.k_primary;
  const std::size_t ref_index = max_likelihood_index(chain);
  const PrimaryLabels ref = primary_labels(chain.samples[ref_index], k_primary);

  ChainRecord out = chain;
  for (auto& s : out.samples) {
    const PrimaryLabels cur = primary_labels(s, k_primary);
    const std::size_t r = ref.labels.size();
    const std::size_t c = cur.labels.size();
    const std::size_t size = std::max(r, c);
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size),
                                                 static_cast<Eigen::Index>(size));
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t b = 0; b < c; ++b) {
        cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            kl_divergence(ref.freqs[a], cur.freqs[b]);
      }
    }
    const std::vector<int> row_to_col = min_cost_assignment(cost);

    // new label for each current primary label (by position in cur.labels)
    std::vector<int> target(c, -1);
    for (std::size_t a = 0; a < r; ++a) {
      const auto b = static_cast<std::size_t>(row_to_col[a]);
      if (b < c) target[b] = ref.labels[a];
    }
    std::vector<char> taken;
    for (int t : target) {
      if (t < 0) continue;
      if (taken.size() <= static_cast<std::size_t>(t)) taken.resize(static_cast<std::size_t>(t) + 1, 0);
      taken[static_cast<std::size_t>(t)] = 1;
    }
    // Unmatched labels take the lowest free labels, in their current order.
    int next_free = 0;
    for (std::size_t b = 0; b < c; ++b) {
      if (target[b] >= 0) continue;
      while (static_cast<std::size_t>(next_free) < taken.size() && taken[static_cast<std::size_t>(next_free)]) {
        ++next_free;
      }
      target[b] = next_free++;
    }

    const int old_label_count = static_cast<int>(s.components.size());
    std::vector<int> remap(static_cast<std::size_t>(std::max(old_label_count, 1)), -1);
    for (int label = 0; label < old_label_count; ++label) remap[static_cast<std::size_t>(label)] = label;
    int max_label = -1;
    for (std::size_t b = 0; b < c; ++b) {
      remap[static_cast<std::size_t>(cur.labels[b])] = target[b];
      max_label = std::max(max_label, target[b]);
    }
    const int residual = k_primary > 0 && old_label_count > k_primary ? k_primary : -1;
    if (residual >= 0) max_label = std::max(max_label, residual);
    std::vector<ComponentParams> components(static_cast<std::size_t>(max_label + 1));
    for (std::size_t b = 0; b < c; ++b) {
      components[static_cast<std::size_t>(target[b])] =
          s.components[static_cast<std::size_t>(cur.labels[b])];
    }
    if (residual >= 0) {
      components[static_cast<std::size_t>(residual)] = s.components[static_cast<std::size_t>(residual)];
    }
    for (int& a : s.assignments) a = remap[static_cast<std::size_t>(a)];
    s.components = std::move(components);
  }
  return out;
}

PaintingMatrix painting(const ChainRecord& chain, const CountTable& data) {
  if (chain.samples.empty()) throw InputError("painting: chain has no samples");
  const auto n = static_cast<Eigen::Index>(data.size());
  int cols = 0;
  if (chain.k_primary > 0) {
    cols = chain.k_primary + 1;
  } else {
    for (const auto& s : chain.samples) {
      for (int a : s.assignments) cols = std::max(cols, a + 1);
    }
  }
  PaintingMatrix p;
  p.has_residual = chain.k_primary > 0;
  p.values = Eigen::MatrixXd::Zero(n, cols);
  for (const auto& s : chain.samples) {
    CPAINT_REQUIRE(static_cast<Eigen::Index>(s.assignments.size()) == n,
                   "painting: chain and data disagree on unit count");
    for (Eigen::Index i = 0; i < n; ++i) p.values(i, s.assignments[static_cast<std::size_t>(i)]) += 1.0;
  }
  p.values /= static_cast<double>(chain.samples.size());
  p.weights = data.totals().cast<double>();
  for (const auto& u : data.units()) p.keys.push_back(u.key);
  return p;
}

Dendrogram single_linkage(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw InputError("single_linkage: need at least two points");
  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) dist(i, j) = (points.row(i) - points.row(j)).norm();
  }
  // cluster id and size for each active slot; slot distances updated by min.
  std::vector<int> id(static_cast<std::size_t>(n));
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::iota(id.begin(), id.end(), 0);

  Dendrogram tree;
  tree.leaves = n;
  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    Dendrogram::Merge merge;
    merge.left = std::min(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
    merge.right = std::max(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
    merge.height = best;
    merge.size = size[static_cast<std::size_t>(bi)] + size[static_cast<std::size_t>(bj)];
    tree.merges.push_back(merge);

    for (int k = 0; k < n; ++k) {
      const double d = std::min(dist(bi, k), dist(bj, k));
      dist(bi, k) = d;
      dist(k, bi) = d;
    }
    id[static_cast<std::size_t>(bi)] = n + step;
    size[static_cast<std::size_t>(bi)] = merge.size;
    active[static_cast<std::size_t>(bj)] = 0;
  }
  return tree;
}

Dendrogram cluster_components(const std::vector<ComponentParams>& params) {
  if (params.size() < 2) throw InputError("cluster_components: need at least two components");
  const int dim = params.front().dimension();
  Eigen::MatrixXd points(static_cast<Eigen::Index>(params.size()), dim);
  for (std::size_t k = 0; k < params.size(); ++k) {
    CPAINT_REQUIRE(params[k].dimension() == dim, "cluster_components: dimension mismatch");
    points.row(static_cast<Eigen::Index>(k)) = expected_frequencies(params[k]).transpose();
  }
  return single_linkage(points);
}

}  // namespace cpaint
