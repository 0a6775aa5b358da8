#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <string>

#include <Eigen/Dense>
#include <lapacke.h>

#include "netcv/graph.hpp"
#include "netcv/random.hpp"

namespace netcv {

/// Top right singular vectors (as columns of U) and their singular values.
struct SingularBasis {
  Eigen::MatrixXd U;      // n x K, orthonormal columns
  Eigen::VectorXd sigma;  // nonincreasing

  int k() const noexcept { return static_cast<int>(U.cols()); }

  /// The leading `k` columns.
  SingularBasis leading(int k) const {
    if (k < 0 || k > this->k()) throw Error("SingularBasis: requested more columns than available");
    return {U.leftCols(k), sigma.head(k)};
  }
};

struct SvdOptions {
  // Above this smaller dimension, switch from the dense decomposition to
  // subspace iteration on M^T M.
  Eigen::Index dense_limit = 2000;
  double tolerance = 1e-10;
  int max_iterations = 300;
};

namespace detail {

// Flip each column so its largest-magnitude entry (first on ties) is positive.
inline void fix_signs(Eigen::MatrixXd& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double a = std::abs(u(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (u.rows() > 0 && u(arg, c) < 0.0) u.col(c) = -u.col(c);
  }
}

#ifdef NETCV_OPENBLAS
extern "C" void openblas_set_num_threads(int);
#endif

inline void single_threaded_blas() {
#ifdef NETCV_OPENBLAS
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
#endif
}

// LAPACK dgesdd, falling back to dgesvd if divide and conquer fails.
inline SingularBasis dense_right_singular(const Eigen::MatrixXd& m, int k) {
  single_threaded_blas();
  const auto rows = static_cast<lapack_int>(m.rows());
  const auto cols = static_cast<lapack_int>(m.cols());
  const lapack_int s = std::min(rows, cols);
  Eigen::VectorXd sigma(s);
  Eigen::MatrixXd u(rows, s), vt(s, cols);
  Eigen::MatrixXd work = m;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, work.data(), rows, sigma.data(), u.data(),
                                   rows, vt.data(), s);
  if (info > 0) {
    work = m;
    Eigen::VectorXd superb(std::max<lapack_int>(s - 1, 1));
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'N', 'S', rows, cols, work.data(), rows, sigma.data(), nullptr, 1,
                          vt.data(), s, superb.data());
  }
  if (info != 0) throw Error("top_k_right_singular: LAPACK SVD failed (info " + std::to_string(info) + ")");
  return {vt.topRows(k).transpose(), sigma.head(k)};
}

// Subspace iteration with Rayleigh-Ritz on M^T M.
inline SingularBasis iterative_right_singular(const Eigen::MatrixXd& m, int k, const SvdOptions& opt) {
  const Eigen::Index n = m.cols();
  const Eigen::Index block = std::min<Eigen::Index>(std::min(m.rows(), n), k + 8);
  Rng rng(derive_seed(0x5bd1e995ULL, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(n)}));
  Eigen::MatrixXd x(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);

  Eigen::VectorXd previous = Eigen::VectorXd::Zero(block);
  Eigen::MatrixXd ritz_vectors;
  Eigen::VectorXd ritz_values;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXd mq = m * q;
    const Eigen::MatrixXd z = m.transpose() * mq;
    const Eigen::MatrixXd h = q.transpose() * z;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    // Eigen sorts ascending; reverse to descending.
    ritz_values = es.eigenvalues().reverse();
    ritz_vectors = q * es.eigenvectors().rowwise().reverse();

    const double scale = std::max(ritz_values(0), 1e-300);
    const double change = (ritz_values.head(k) - previous.head(k)).cwiseAbs().maxCoeff() / scale;
    previous = ritz_values;
    if (it > 0 && change < opt.tolerance) break;

    Eigen::HouseholderQR<Eigen::MatrixXd> next(z);
    q = next.householderQ() * Eigen::MatrixXd::Identity(n, block);
  }
  Eigen::VectorXd sigma = ritz_values.head(k).cwiseMax(0.0).cwiseSqrt();
  return {ritz_vectors.leftCols(k), sigma};
}

}  // namespace detail

/// Leading `k` right singular vectors of a rectangular matrix. Columns are
/// sign-normalized so equal inputs always give equal outputs.
inline SingularBasis top_k_right_singular(const Eigen::MatrixXd& m, int k, const SvdOptions& opt = {}) {
  if (k < 0 || k > std::min(m.rows(), m.cols())) {
    throw Error("top_k_right_singular: K exceeds the smaller matrix dimension");
  }
  if (k == 0) return {Eigen::MatrixXd(m.cols(), 0), Eigen::VectorXd(0)};
  SingularBasis basis = std::min(m.rows(), m.cols()) <= opt.dense_limit
                            ? detail::dense_right_singular(m, k)
                            : detail::iterative_right_singular(m, k, opt);
  detail::fix_signs(basis.U);
  return basis;
}

template <PairMatrix Source>
Eigen::MatrixXd to_dense(const RectView<Source>& view) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(view.rows()), static_cast<Eigen::Index>(view.cols()));
  for (std::size_t r = 0; r < view.rows(); ++r) {
    for (std::size_t j = 0; j < view.cols(); ++j) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = view(r, j);
    }
  }
  return m;
}

template <PairMatrix Source>
SingularBasis top_k_right_singular(const RectView<Source>& view, int k, const SvdOptions& opt = {}) {
  return top_k_right_singular(to_dense(view), k, opt);
}

}  // namespace netcv
