#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "netcv/block_models.hpp"
#include "netcv/matching.hpp"
#include "netcv/spectral.hpp"

using namespace netcv;
using Catch::Approx;

namespace {

Membership balanced(std::size_t n, int k) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), n / static_cast<std::size_t>(k));
  sizes.back() += n % static_cast<std::size_t>(k);
  return block_membership(sizes);
}

NodeSet fitting_rows(std::size_t n, Rng& rng) { return partition_nodes(n, 3, rng).complement(0); }

double misclustered(const Membership& estimate, const Membership& truth) {
  return static_cast<double>(hamming_up_to_permutation(estimate, truth)) / static_cast<double>(truth.n());
}

}  // namespace

TEST_CASE("spherical_embed", "[spectral]") {
  Eigen::MatrixXd u(3, 2);
  u << 3, 4, 0, 0, 0.6, 0.8;
  const auto emb = spherical_embed(u);
  CHECK(emb.rows(0, 0) == Approx(0.6));
  CHECK(emb.rows(0, 1) == Approx(0.8));
  CHECK(emb.rownorms[0] == Approx(5.0));
  REQUIRE(emb.zero_rows.size() == 1);
  CHECK(emb.zero_rows[0] == 1);
  CHECK(emb.rows.row(1).norm() == 0.0);
  CHECK(emb.rows(2, 0) == Approx(0.6));
  CHECK(emb.rows(2, 1) == Approx(0.8));

  const auto again = spherical_embed(emb.rows);
  CHECK((again.rows - emb.rows).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("spherical_embed rows have unit norm", "[spectral][property]") {
  Rng rng(21);
  Eigen::MatrixXd u(50, 4);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) u(i, j) = rng.uniform(-2, 2);
  }
  u.row(7).setZero();
  const auto emb = spherical_embed(u);
  for (Eigen::Index i = 0; i < 50; ++i) {
    if (i == 7) continue;
    CHECK(emb.rows.row(i).norm() == Approx(1.0).epsilon(1e-14));
  }
  CHECK(emb.zero_rows.size() == 1);
}

TEST_CASE("spectral_cluster_rect: noiseless recovery for K up to 6", "[spectral][property]") {
  Rng rng(31);
  for (int k = 1; k <= 6; ++k) {
    for (std::size_t n : {std::size_t(12) * static_cast<std::size_t>(k), std::size_t(120)}) {
      const SbmParams params(balanced(n, k), BlockMatrix::planted(k, 0.5, 0.1));
      const auto p = expected_P(params);
      const RectView rect(p, fitting_rows(n, rng));
      INFO("K=" << k << " n=" << n);
      CHECK(hamming_up_to_permutation(spectral_cluster_rect(rect, k, rng), params.g) == 0);
    }
  }
}

TEST_CASE("spectral_cluster_rect with K=1 labels every node alike", "[spectral]") {
  Rng rng(32);
  const SbmParams params(balanced(60, 2), BlockMatrix::planted(2, 0.5, 0.1));
  const auto a = sample(params, rng);
  const auto g = spectral_cluster_rect(RectView(a, fitting_rows(60, rng)), 1, rng);
  CHECK(g.n() == 60);
  CHECK(g.sizes() == std::vector<std::size_t>{60});
}

TEST_CASE("kmeans objective is at most the true-centroid objective on population input", "[spectral][property]") {
  Rng rng(33);
  for (int k = 2; k <= 5; ++k) {
    const SbmParams params(balanced(100, k), BlockMatrix::planted(k, 0.4, 0.15));
    const auto p = expected_P(params);
    const auto basis = top_k_right_singular(RectView(p, fitting_rows(100, rng)), k);
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, k);
    const auto sizes = params.g.sizes();
    for (std::size_t i = 0; i < 100; ++i) centers.row(params.g[i]) += basis.U.row(static_cast<Eigen::Index>(i));
    double truth = 0.0;
    for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < 100; ++i) {
      truth += (basis.U.row(static_cast<Eigen::Index>(i)) - centers.row(params.g[i])).squaredNorm();
    }
    CHECK(kmeans(basis.U, k, rng).objective <= truth + 1e-12);
  }
}

TEST_CASE("spherical clustering: noiseless DCBM recovery and row norms", "[spectral][property]") {
  Rng rng(34);
  for (int k = 1; k <= 5; ++k) {
    const auto g = balanced(120, k);
    std::vector<double> raw(120);
    for (auto& x : raw) x = rng.uniform(0.2, 1.0);
    const DcbmParams params(g, BlockMatrix::planted(k, 0.5, 0.1), DegreeParams::normalized(raw, g));
    const auto p = expected_P(params);
    const auto res = spherical_spectral_cluster_rect(RectView(p, fitting_rows(120, rng)), k, rng);
    INFO("K=" << k);
    CHECK(hamming_up_to_permutation(res.labels, g) == 0);
    CHECK(res.zero_rows == 0);

    // Row norms are proportional to psi inside each community.
    std::vector<double> ratio(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < 120; ++i) {
      const double r = res.psi_hat_prime[i] / params.psi[i];
      auto& ref = ratio[static_cast<std::size_t>(g[i])];
      if (ref == 0.0) ref = r;
      CHECK(r == Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("spherical and plain clustering agree on noiseless SBM", "[spectral]") {
  Rng rng(35);
  for (int k = 2; k <= 4; ++k) {
    const SbmParams params(balanced(90, k), BlockMatrix::planted(k, 0.45, 0.05));
    const auto p = expected_P(params);
    const RectView rect(p, fitting_rows(90, rng));
    const auto plain = spectral_cluster_rect(rect, k, rng);
    const auto spherical = spherical_spectral_cluster_rect(rect, k, rng);
    CHECK(hamming_up_to_permutation(plain, spherical.labels) == 0);
  }
}

TEST_CASE("spherical clustering sends zero rows to the largest cluster", "[spectral]") {
  SingularBasis basis;
  basis.U.resize(6, 2);
  basis.U << 1, 0, 1, 0.01, 0.99, 0, 0, 1, 0, 0, 0.02, 1;
  basis.sigma = Eigen::Vector2d(2.0, 1.0);
  Rng rng(36);
  const auto res = spherical_cluster_basis(basis, 2, rng);
  CHECK(res.zero_rows == 1);
  CHECK(res.labels[4] == res.labels[0]);
  CHECK(res.psi_hat_prime[4] == 0.0);
}

TEST_CASE("spectral_cluster_rect on SBM samples, n=600", "[spectral][montecarlo]") {
  const SbmParams params(balanced(600, 2), BlockMatrix::planted(2, 0.6, 0.2));
  int good = 0;
  for (std::uint64_t run = 0; run < 50; ++run) {
    Rng rng(derive_seed(600, {run}));
    const auto a = sample(params, rng);
    const auto g = spectral_cluster_rect(RectView(a, fitting_rows(600, rng)), 2, rng);
    good += misclustered(g, params.g) <= 0.02;
  }
  INFO("runs with at most 2% misclustered: " << good);
  CHECK(good >= 48);
}

TEST_CASE("spherical spectral clustering on DCBM samples, n=1200", "[spectral][montecarlo]") {
  int good = 0;
  for (std::uint64_t run = 0; run < 50; ++run) {
    Rng rng(derive_seed(1200, {run}));
    const auto params = std::get<DcbmParams>(sim3_params(1200, 2, ModelType::dcbm, rng));
    const auto a = sample(params, rng);
    const auto res = spherical_spectral_cluster_rect(RectView(a, fitting_rows(1200, rng)), 2, rng);
    good += misclustered(res.labels, params.g) <= 0.05;
  }
  INFO("runs with at most 5% misclustered: " << good);
  CHECK(good >= 45);
}
