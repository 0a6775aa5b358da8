#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "netcv/clustering.hpp"
#include "netcv/graph.hpp"
#include "netcv/svd.hpp"

namespace netcv {

/// Row-normalized singular vectors. Rows with norm below 1e-12 are left at
/// zero and listed in zero_rows.
struct SphericalEmbedding {
  Eigen::MatrixXd rows;
  std::vector<double> rownorms;
  NodeSet zero_rows;
};

inline constexpr double zero_row_threshold = 1e-12;

inline SphericalEmbedding spherical_embed(const Eigen::MatrixXd& u) {
  SphericalEmbedding out{u, std::vector<double>(static_cast<std::size_t>(u.rows())), {}};
  std::vector<std::size_t> zeros;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double norm = u.row(i).norm();
    out.rownorms[static_cast<std::size_t>(i)] = norm;
    if (norm < zero_row_threshold) {
      out.rows.row(i).setZero();
      zeros.push_back(static_cast<std::size_t>(i));
    } else {
      out.rows.row(i) /= norm;
    }
  }
  out.zero_rows = NodeSet(std::move(zeros), static_cast<std::size_t>(u.rows()));
  return out;
}

inline SphericalEmbedding spherical_embed(const SingularBasis& basis) { return spherical_embed(basis.U); }

/// k-means on the rows of an already computed basis.
inline Membership cluster_basis(const SingularBasis& basis, int k, Rng& rng, const ClusterOptions& opt = {}) {
  return kmeans(basis.U, k, rng, opt).labels;
}

/// SVD of the rectangle, then k-means on the n rows of the top-K right
/// singular vectors. Labels every node, fitted or held out.
template <PairMatrix Source>
Membership spectral_cluster_rect(const RectView<Source>& rect, int k, Rng& rng, const ClusterOptions& opt = {}) {
  if (k < 1) throw Error("spectral_cluster_rect: K must be at least 1");
  return cluster_basis(top_k_right_singular(rect, k), k, rng, opt);
}

struct SphericalClusters {
  Membership labels;
  std::vector<double> psi_hat_prime;  // row norms of the singular-vector matrix
  std::size_t zero_rows = 0;
};

/// Spherical k-median on the nonzero rows; zero rows join the largest
/// cluster (smallest label on ties).
inline SphericalClusters spherical_cluster_basis(const SingularBasis& basis, int k, Rng& rng,
                                                 const ClusterOptions& opt = {}) {
  if (k < 1) throw Error("spherical clustering: K must be at least 1");
  SphericalEmbedding emb = spherical_embed(basis);
  const auto n = static_cast<std::size_t>(emb.rows.rows());
  std::vector<std::size_t> keep;
  keep.reserve(n - emb.zero_rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!emb.zero_rows.contains(i)) keep.push_back(i);
  }
  if (keep.size() < static_cast<std::size_t>(k)) throw Error("spherical clustering: fewer nonzero rows than clusters");

  Eigen::MatrixXd pts(static_cast<Eigen::Index>(keep.size()), emb.rows.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    pts.row(static_cast<Eigen::Index>(r)) = emb.rows.row(static_cast<Eigen::Index>(keep[r]));
  }
  const ClusterResult fit = kmedian_spherical(pts, k, rng, opt);

  const auto sizes = fit.labels.sizes();
  int largest = 0;
  for (int c = 1; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > sizes[static_cast<std::size_t>(largest)]) largest = c;
  }
  std::vector<int> labels(n, largest);
  for (std::size_t r = 0; r < keep.size(); ++r) labels[keep[r]] = fit.labels[r];
  return {Membership(std::move(labels), k), std::move(emb.rownorms), emb.zero_rows.size()};
}

template <PairMatrix Source>
SphericalClusters spherical_spectral_cluster_rect(const RectView<Source>& rect, int k, Rng& rng,
                                                  const ClusterOptions& opt = {}) {
  if (k < 1) throw Error("spherical_spectral_cluster_rect: K must be at least 1");
  return spherical_cluster_basis(top_k_right_singular(rect, k), k, rng, opt);
}

}  // namespace netcv
