#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "netcv/block_models.hpp"
#include "netcv/ncv.hpp"

using namespace netcv;
using Catch::Approx;

namespace {

AdjacencyMatrix planted_graph(std::size_t n, int k, double r, std::uint64_t seed) {
  Rng rng(seed);
  return sample(sim1_params(n, k, n / static_cast<std::size_t>(k), r), rng);
}

AdjacencyMatrix permuted(const AdjacencyMatrix& a, const std::vector<std::size_t>& perm) {
  AdjacencyBuilder b(a.n());
  for (const auto& [i, j] : a.edges()) b.set_edge(perm[i], perm[j]);
  return std::move(b).build();
}

}  // namespace

TEST_CASE("loss values", "[ncv][loss]") {
  CHECK(loss(LossKind::squared, 1, 0.5) == 0.25);
  CHECK(loss(LossKind::negloglik, 1, 0.5) == Approx(std::log(2.0)));
  CHECK(loss(LossKind::squared, 0, 0.0) == 0.0);
  CHECK(loss(LossKind::negloglik, 0, 0.0) == Approx(-std::log1p(-1e-6)));
  CHECK(std::isfinite(loss(LossKind::negloglik, 1, 0.0)));
  CHECK(parse_loss_kind("l2") == LossKind::squared);
  CHECK(parse_loss_kind("nll") == LossKind::negloglik);
  CHECK_THROWS_AS(parse_loss_kind("hinge"), Error);
}

TEST_CASE("candidate order and grid", "[ncv]") {
  CHECK(Candidate{ModelType::sbm, 2} < Candidate{ModelType::dcbm, 2});
  CHECK(Candidate{ModelType::dcbm, 1} < Candidate{ModelType::sbm, 2});
  const auto grid = candidate_grid({ModelType::dcbm, ModelType::sbm}, 2);
  REQUIRE(grid.size() == 4);
  CHECK(grid[0] == Candidate{ModelType::sbm, 1});
  CHECK(grid[1] == Candidate{ModelType::dcbm, 1});
  CHECK(to_string(grid[3]) == "dcbm:2");
}

TEST_CASE("noiseless planted SBM has near-zero squared loss for the true K", "[ncv]") {
  const SbmParams params(block_membership({20, 20, 20}), BlockMatrix::planted(3, 1.0, 0.0));
  Rng rng(61);
  const auto a = sample(params, rng);
  const auto part = partition_nodes(60, 3, rng);
  for (std::size_t v = 0; v < 3; ++v) {
    const double l = fold_fit_validate(a, part, v, {ModelType::sbm, 3}, LossKind::squared, rng);
    CHECK(l <= 60.0 * 60.0 * 1e-12);
  }
}

TEST_CASE("fold loss sums ordered pairs", "[ncv]") {
  const auto a = planted_graph(90, 2, 0.2, 62);
  Rng rng(63);
  const auto part = partition_nodes(90, 3, rng);
  const NodeSet fit_rows = part.complement(1);
  const auto basis = top_k_right_singular(RectView(a, fit_rows), 2);
  Rng crng(64);
  const Fit fit = fit_candidate(a, fit_rows, part.folds[1], basis, {ModelType::sbm, 2}, crng);
  double unordered = 0.0;
  const auto& held = part.folds[1];
  for (std::size_t x = 0; x < held.size(); ++x) {
    for (std::size_t y = x + 1; y < held.size(); ++y) {
      unordered += loss(LossKind::negloglik, a(held[x], held[y]), predict_P(fit, held[x], held[y]));
    }
  }
  CHECK(held_out_loss(a, held, fit, LossKind::negloglik) == Approx(2.0 * unordered).epsilon(1e-12));
}

TEST_CASE("K=1 loses to K=2 on a two-block graph, n=600", "[ncv][montecarlo]") {
  const auto params = sim1_params(600, 2, 300, 0.2);
  int wins = 0;
  for (std::uint64_t run = 0; run < 50; ++run) {
    Rng rng(derive_seed(62, {run}));
    const auto a = sample(params, rng);
    const auto part = partition_nodes(600, 3, rng);
    Rng r1(derive_seed(63, {run, 1})), r2(derive_seed(63, {run, 2}));
    const double one = fold_fit_validate(a, part, 0, {ModelType::sbm, 1}, LossKind::squared, r1);
    const double two = fold_fit_validate(a, part, 0, {ModelType::sbm, 2}, LossKind::squared, r2);
    wins += one > two;
  }
  INFO("runs where K=1 lost: " << wins);
  CHECK(wins >= 48);
}

TEST_CASE("ncv report invariants", "[ncv][property]") {
  const auto a = planted_graph(150, 3, 0.15, 65);
  NcvOptions opt;
  opt.loss = LossKind::squared;
  const auto cands = candidate_grid({ModelType::sbm, ModelType::dcbm}, 5);
  const auto report = ncv_select(a, cands, opt, 66);
  REQUIRE(report.candidates.size() == cands.size());
  CHECK(report.V == 3);

  Rng split(derive_seed(66, {0}));
  const auto part = partition_nodes(150, 3, split);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : report.candidates) {
    CHECK(r.total == std::accumulate(r.fold_losses.begin(), r.fold_losses.end(), 0.0));
    for (std::size_t v = 0; v < 3; ++v) {
      const double size = static_cast<double>(part.folds[v].size());
      CHECK(r.fold_losses[v] >= 0.0);
      CHECK(r.fold_losses[v] <= size * (size - 1.0));
    }
    best = std::min(best, r.total);
  }
  CHECK(report.result(report.selected).total == best);
  CHECK(report.selected.K == 3);
}

TEST_CASE("evaluated pairs are about a 1/V fraction", "[ncv]") {
  Rng rng(67);
  for (std::size_t folds : {2, 3, 5}) {
    const auto part = partition_nodes(300, folds, rng);
    double pairs = 0.0;
    for (const auto& f : part.folds) pairs += static_cast<double>(f.size() * (f.size() - 1));
    const double fraction = pairs / (300.0 * 299.0);
    CHECK(std::abs(fraction - 1.0 / static_cast<double>(folds)) <= 0.01);
  }
}

TEST_CASE("ncv_select matches per-fold evaluation with the same streams", "[ncv]") {
  const auto a = planted_graph(120, 2, 0.2, 68);
  NcvOptions opt;
  const auto cands = candidate_grid({ModelType::sbm, ModelType::dcbm}, 3);
  const auto report = ncv_select(a, cands, opt, 69);
  Rng split(derive_seed(69, {0}));
  const auto part = partition_nodes(120, 3, split);
  for (const auto& c : cands) {
    for (std::size_t v = 0; v < 3; ++v) {
      Rng rng(detail::candidate_stream(69, v, c));
      const double direct = fold_fit_validate(a, part, v, c, opt.loss, rng);
      INFO(to_string(c) << " fold " << v);
      CHECK(direct == Approx(report.result(c).fold_losses[v]).epsilon(1e-10));
    }
  }
}

TEST_CASE("ncv_select is identical for any thread count", "[ncv][determinism]") {
  const auto a = planted_graph(150, 3, 0.1, 70);
  const auto cands = candidate_grid({ModelType::sbm, ModelType::dcbm}, 4);
  NcvOptions one, four;
  four.threads = 4;
  const auto x = ncv_select(a, cands, one, 71);
  const auto y = ncv_select(a, cands, four, 71);
  REQUIRE(x.candidates.size() == y.candidates.size());
  for (std::size_t i = 0; i < x.candidates.size(); ++i) CHECK(x.candidates[i].fold_losses == y.candidates[i].fold_losses);
  CHECK(x.selected == y.selected);
}

TEST_CASE("relabeling nodes leaves fold losses unchanged", "[ncv][property]") {
  const auto a = planted_graph(120, 2, 0.25, 72);
  Rng rng(73);
  std::vector<std::size_t> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<std::size_t>(perm));
  const auto b = permuted(a, perm);

  const auto part = partition_nodes(120, 3, rng);
  FoldPartition moved{120, {}};
  for (const auto& f : part.folds) {
    std::vector<std::size_t> ids;
    for (std::size_t i : f) ids.push_back(perm[i]);
    std::sort(ids.begin(), ids.end());
    moved.folds.emplace_back(ids, 120);
  }
  for (const Candidate c : {Candidate{ModelType::sbm, 1}, Candidate{ModelType::sbm, 2}, Candidate{ModelType::dcbm, 2}}) {
    for (std::size_t v = 0; v < 3; ++v) {
      Rng r1(74), r2(74);
      const double before = fold_fit_validate(a, part, v, c, LossKind::negloglik, r1);
      const double after = fold_fit_validate(b, moved, v, c, LossKind::negloglik, r2);
      CHECK(after == Approx(before).epsilon(1e-9));
    }
  }
}

TEST_CASE("ties go to the smaller K", "[ncv]") {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = i + 1; j < 30; ++j) edges.emplace_back(i, j);
  }
  const AdjacencyMatrix complete(30, edges);
  const auto report = ncv_select(complete, candidate_grid({ModelType::sbm}, 3), NcvOptions{}, 75);
  for (const auto& r : report.candidates) CHECK(r.total == report.candidates.front().total);
  CHECK(report.selected == Candidate{ModelType::sbm, 1});
}

TEST_CASE("ncv errors", "[ncv]") {
  const auto a = planted_graph(30, 2, 0.2, 76);
  Rng rng(77);
  CHECK_THROWS_AS(ncv_select(a, {}, NcvOptions{}, 1), Error);
  NcvOptions one_fold;
  one_fold.folds = 1;
  CHECK_THROWS_AS(ncv_select(a, {{ModelType::sbm, 2}}, one_fold, 1), Error);
  const auto part = partition_nodes(30, 3, rng);
  CHECK_THROWS_AS(fold_fit_validate(a, part, 3, {ModelType::sbm, 2}, LossKind::squared, rng), Error);
  CHECK_THROWS_AS(fold_fit_validate(a, part, 0, {ModelType::sbm, 0}, LossKind::squared, rng), Error);
  const auto tiny = partition_nodes(3, 3, rng);
  CHECK_THROWS_AS(fold_fit_validate(planted_graph(3, 1, 0.2, 78), tiny, 0, {ModelType::sbm, 1}, LossKind::squared, rng),
                  Error);
}

TEST_CASE("repeat_ncv", "[ncv]") {
  const auto a = planted_graph(90, 2, 0.25, 79);
  const auto cands = candidate_grid({ModelType::sbm, ModelType::dcbm}, 3);
  NcvOptions opt;
  const auto single = repeat_ncv(a, cands, opt, 1, 80);
  REQUIRE(single.counts.size() == 1);
  CHECK(single.counts.begin()->second == 1);
  CHECK(single.reports[0].seed == rep_seed(80, 0));

  opt.threads = 3;
  const auto x = repeat_ncv(a, cands, opt, 5, 81);
  opt.threads = 1;
  const auto y = repeat_ncv(a, cands, opt, 5, 81);
  CHECK(x.counts == y.counts);
  std::size_t total = 0;
  for (const auto& [c, n] : x.counts) total += n;
  CHECK(total == 5);
  CHECK(x.frequency(x.modal()) > 0.0);
  CHECK_THROWS_AS(repeat_ncv(a, cands, opt, 0, 81), Error);
}
