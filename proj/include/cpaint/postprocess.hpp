#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cpaint/sampler.hpp"

namespace cpaint {

/// Fraction of stored samples in which units i and j share a label.
struct IncidenceMatrix {
  Eigen::MatrixXd values;

  Eigen::Index size() const { return values.rows(); }
};

/// Posterior membership fractions per unit-level. When the source chain was
/// aggregated, the final column is the residual cultural period.
struct PaintingMatrix {
  std::vector<UnitKey> keys;
  Eigen::MatrixXd values;
  Eigen::VectorXd weights;  // N̄ per row
  bool has_residual = false;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

struct KMedoidsResult {
  std::vector<int> assignments;  // 0-based group per unit
  std::vector<int> medoids;      // unit index of each group's medoid
  double total_cost = 0.0;
};

/// Agglomerative merge tree. Leaves are 0..n-1; merge i creates node n+i.
struct Dendrogram {
  struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
    int size = 0;
  };
  int leaves = 0;
  std::vector<Merge> merges;
};

/// KL(p || q) between two points of the simplex; terms with p_d = 0 vanish.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  Scalar acc(0);
  for (Eigen::Index d = 0; d < p.size(); ++d) {
    if (p[d] > Scalar(0)) acc += p[d] * std::log(p[d] / q[d]);
  }
  return acc;
}

/// Minimum-cost assignment (Hungarian / Kuhn-Munkres). Requires rows <= cols;
/// returns the column chosen for each row.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

IncidenceMatrix incidence_matrix(const ChainRecord& chain);

/// PAM k-medoids on dissimilarity 1 − incidence. The seed only orders
/// candidates, so exact-cost ties resolve deterministically.
KMedoidsResult cluster_incidence(const IncidenceMatrix& matrix, int k, std::uint64_t seed);

/// Total PAM cost of a medoid set on a dissimilarity matrix.
double medoid_cost(const Eigen::MatrixXd& dissimilarity, const std::vector<int>& medoids);

/// Cluster sizes of one sample, indexed by label.
std::vector<int> cluster_sizes(const ChainSample& sample);

/// Number of clusters with at least `min_members` members.
int count_large_clusters(const ChainSample& sample, int min_members);

/// Minimum over samples of count_large_clusters.
int select_primary_k(const ChainRecord& chain, int min_members = 5);

/// Most frequent count_large_clusters value (ties -> smaller K).
int modal_k(const ChainRecord& chain, int min_members = 5);

/// Histogram of per-sample K (all clusters), index = K.
std::vector<long> k_histogram(const ChainRecord& chain);

/// Per sample: the k_primary largest clusters take labels 0..k_primary-1 in
/// size order; everything else merges into residual label k_primary.
ChainRecord aggregate_small_clusters(const ChainRecord& chain, int k_primary);

/// Aligns each sample's primary labels to the maximum-likelihood sample by
/// minimizing summed KL between expected-frequency vectors.
ChainRecord relabel_chain(const ChainRecord& chain);

/// Index of the sample with the largest stored log-likelihood (first on ties).
std::size_t max_likelihood_index(const ChainRecord& chain);

PaintingMatrix painting(const ChainRecord& chain, const CountTable& data);

/// Single-linkage agglomeration of the rows of `points` (Euclidean).
Dendrogram single_linkage(const Eigen::MatrixXd& points);

/// Single-linkage over the components' expected-frequency vectors.
Dendrogram cluster_components(const std::vector<ComponentParams>& params);

}  // namespace cpaint
