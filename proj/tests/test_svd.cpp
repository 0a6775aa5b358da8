#include <catch2/catch_amalgamated.hpp>

#include "netcv/block_models.hpp"
#include "netcv/svd.hpp"

using namespace netcv;
using Catch::Approx;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

double orthonormality_error(const Eigen::MatrixXd& u) {
  return (u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("identity matrix", "[svd]") {
  const auto basis = top_k_right_singular(Eigen::MatrixXd::Identity(3, 3), 2);
  CHECK(basis.sigma(0) == Approx(1.0));
  CHECK(basis.sigma(1) == Approx(1.0));
  for (int c = 0; c < 2; ++c) {
    // Each column is a standard basis vector.
    CHECK(basis.U.col(c).cwiseAbs().maxCoeff() == Approx(1.0));
    CHECK(basis.U.col(c).sum() == Approx(1.0));
  }
}

TEST_CASE("rank-one outer product", "[svd]") {
  Eigen::VectorXd u(3), v(4);
  u << 1, 2, 2;
  v << 0.5, -0.5, 0.5, 0.5;
  u.normalize();
  const auto basis = top_k_right_singular(u * v.transpose(), 1);
  CHECK(basis.sigma(0) == Approx(1.0));
  // The largest-magnitude entry is made positive; entries tie so the first wins.
  CHECK((basis.U.col(0) - v).norm() == Approx(0.0).margin(1e-12));
}

TEST_CASE("population SBM slice has rank K", "[svd]") {
  const SbmParams params(block_membership({20, 20}), BlockMatrix::planted(2, 0.6, 0.2));
  const auto p = expected_P(params);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < 40; i += 3) rows.push_back(i);
  const auto basis = top_k_right_singular(RectView(p, NodeSet(rows, 40)), 3);
  CHECK(basis.sigma(1) > 1e-3);
  CHECK(basis.sigma(2) <= 1e-10 * basis.sigma(0));
}

TEST_CASE("orthonormal basis and reference singular values on random 50x80", "[svd][property]") {
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    const auto m = random_matrix(50, 80, rng);
    const auto basis = top_k_right_singular(m, 10);
    CHECK(orthonormality_error(basis.U) <= 1e-8);
    const Eigen::JacobiSVD<Eigen::MatrixXd> reference(m);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(basis.sigma(i) - reference.singularValues()(i)) <= 1e-6);
    for (int i = 1; i < 10; ++i) CHECK(basis.sigma(i) <= basis.sigma(i - 1));
    // Right singular vectors: M^T M u = sigma^2 u.
    const Eigen::MatrixXd residual =
        m.transpose() * (m * basis.U) - basis.U * basis.sigma.cwiseAbs2().asDiagonal();
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("iterative path agrees with the dense decomposition", "[svd]") {
  Rng rng(12);
  // Planted rank-3 signal plus noise gives a clear gap after the third value.
  const Eigen::MatrixXd signal = random_matrix(60, 3, rng) * random_matrix(3, 90, rng) * 5.0;
  const Eigen::MatrixXd m = signal + 0.05 * random_matrix(60, 90, rng);
  const auto dense = top_k_right_singular(m, 3);
  SvdOptions opt;
  opt.dense_limit = 0;
  const auto iterative = top_k_right_singular(m, 3, opt);
  CHECK(orthonormality_error(iterative.U) <= 1e-8);
  for (int i = 0; i < 3; ++i) CHECK(iterative.sigma(i) == Approx(dense.sigma(i)).epsilon(1e-8));
  const Eigen::MatrixXd projector_gap =
      dense.U * dense.U.transpose() - iterative.U * iterative.U.transpose();
  CHECK(projector_gap.norm() <= 1e-6);
}

TEST_CASE("sign convention makes results reproducible", "[svd]") {
  Rng rng(13);
  const auto m = random_matrix(20, 30, rng);
  const auto a = top_k_right_singular(m, 4);
  const auto b = top_k_right_singular(m, 4);
  CHECK(a.U == b.U);
  for (int c = 0; c < 4; ++c) {
    Eigen::Index arg;
    a.U.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(a.U(arg, c) > 0.0);
  }
}

TEST_CASE("K larger than the smaller dimension is an error", "[svd]") {
  CHECK_THROWS_AS(top_k_right_singular(Eigen::MatrixXd::Identity(3, 5), 4), Error);
}

TEST_CASE("leading columns of a wider basis equal a direct call", "[svd]") {
  Rng rng(14);
  const auto m = random_matrix(30, 40, rng);
  const auto wide = top_k_right_singular(m, 6);
  const auto narrow = top_k_right_singular(m, 2);
  CHECK(wide.leading(2).U == narrow.U);
  CHECK(wide.leading(2).sigma == narrow.sigma);
}

TEST_CASE("rows of disjoint cliques with repeated singular values", "[svd]") {
  // Three 20-node cliques; the rectangle keeps 15, 15 and 10 rows of them.
  const SbmParams params(block_membership({20, 20, 20}), BlockMatrix::planted(3, 1.0, 0.0));
  Rng rng(61);
  const auto a = sample(params, rng);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < 60; ++i) {
    if (i % 20 < (i < 40 ? 15u : 10u)) rows.push_back(i);
  }
  const auto m = to_dense(RectView(a, NodeSet(rows, 60)));
  const auto basis = top_k_right_singular(m, 4);
  const Eigen::MatrixXd residual = m.transpose() * (m * basis.U) - basis.U * basis.sigma.cwiseAbs2().asDiagonal();
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(orthonormality_error(basis.U) <= 1e-8);
  const Eigen::JacobiSVD<Eigen::MatrixXd> reference(m);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(basis.sigma(i) - reference.singularValues()(i)) <= 1e-8);
}
