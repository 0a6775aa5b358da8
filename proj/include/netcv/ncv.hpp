#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "netcv/block_models.hpp"
#include "netcv/clustering.hpp"
#include "netcv/estimators.hpp"
#include "netcv/graph.hpp"
#include "netcv/parallel.hpp"
#include "netcv/random.hpp"
#include "netcv/spectral.hpp"
#include "netcv/svd.hpp"

namespace netcv {

enum class LossKind { squared, negloglik };

inline std::string_view to_string(LossKind l) { return l == LossKind::squared ? "l2" : "nll"; }

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "l2" || s == "squared") return LossKind::squared;
  if (s == "nll" || s == "negloglik") return LossKind::negloglik;
  throw Error("unknown loss '" + std::string(s) + "'");
}

/// Validation loss of observing x when the fitted probability is p.
inline double loss(LossKind kind, double x, double p) {
  if (kind == LossKind::squared) return (x - p) * (x - p);
  const double q = clamp_probability(p);
  return -x * std::log(q) - (1.0 - x) * std::log1p(-q);
}

/// A model type and community count to score. Ordered by K, then SBM before
/// DCBM; that order also breaks ties between equal losses.
struct Candidate {
  ModelType model = ModelType::sbm;
  int K = 1;

  friend auto operator<=>(const Candidate& a, const Candidate& b) {
    if (auto c = a.K <=> b.K; c != 0) return c;
    return static_cast<int>(a.model) <=> static_cast<int>(b.model);
  }
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

inline std::string to_string(const Candidate& c) {
  return std::string(to_string(c.model)) + ":" + std::to_string(c.K);
}

/// Every model in `models` paired with every K in [1, kmax].
inline std::vector<Candidate> candidate_grid(const std::vector<ModelType>& models, int kmax) {
  std::vector<Candidate> out;
  for (ModelType m : models) {
    for (int k = 1; k <= kmax; ++k) out.push_back({m, k});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct CandidateResult {
  Candidate candidate;
  std::vector<double> fold_losses;
  double total = 0.0;
};

struct NcvReport {
  std::uint64_t seed = 0;
  std::size_t V = 0;
  LossKind loss = LossKind::negloglik;
  std::vector<CandidateResult> candidates;
  Candidate selected;

  const CandidateResult& result(const Candidate& c) const {
    for (const auto& r : candidates) {
      if (r.candidate == c) return r;
    }
    throw Error("NcvReport: candidate not scored");
  }
};

struct NcvOptions {
  std::size_t folds = 3;
  LossKind loss = LossKind::negloglik;
  unsigned threads = 1;
  ClusterOptions cluster{};
};

/// Fit one candidate from the fold's singular basis (at least K columns).
/// Memberships cover all n nodes; block estimates use fitting rows only.
template <PairMatrix Adj>
Fit fit_candidate(const Adj& a, const NodeSet& fit_rows, const NodeSet& held_out, const SingularBasis& basis,
                  const Candidate& c, Rng& rng, const ClusterOptions& opt = {}) {
  const SingularBasis lead = basis.leading(c.K);
  if (c.model == ModelType::sbm) {
    Membership g = cluster_basis(lead, c.K, rng, opt);
    return estimate_B_sbm(a, fit_rows, held_out, g, c.K);
  }
  SphericalClusters sc = spherical_cluster_basis(lead, c.K, rng, opt);
  return estimate_dcbm(a, fit_rows, held_out, sc.labels, std::move(sc.psi_hat_prime), c.K);
}

/// Sum of the loss over ordered pairs (i, j), i != j, inside the held-out set.
template <PairMatrix Adj>
double held_out_loss(const Adj& a, const NodeSet& held_out, const Fit& fit, LossKind kind) {
  double total = 0.0;
  for (std::size_t i : held_out) {
    for (std::size_t j : held_out) {
      if (i == j) continue;
      total += loss(kind, a(i, j), predict_P(fit, i, j));
    }
  }
  return total;
}

namespace detail {

template <PairMatrix Adj>
SingularBasis fold_basis(const Adj& a, const FoldPartition& partition, std::size_t v, int k) {
  if (partition.folds.at(v).size() < 2) throw Error("fold has fewer than two nodes");
  RectView rect(a, partition.complement(v));
  if (static_cast<std::size_t>(k) > std::min(rect.rows(), rect.cols())) {
    throw Error("candidate K " + std::to_string(k) + " exceeds the fitting rectangle");
  }
  return top_k_right_singular(rect, k);
}

inline std::uint64_t candidate_stream(std::uint64_t seed, std::size_t v, const Candidate& c) {
  return derive_seed(seed, {1, v, static_cast<std::uint64_t>(c.model), static_cast<std::uint64_t>(c.K)});
}

}  // namespace detail

/// Fit `candidate` on every row outside fold v and score it on fold v's
/// diagonal block.
template <PairMatrix Adj>
double fold_fit_validate(const Adj& a, const FoldPartition& partition, std::size_t v, const Candidate& candidate,
                         LossKind kind, Rng& rng, const ClusterOptions& opt = {}) {
  if (v >= partition.size()) throw Error("fold index out of range");
  if (candidate.K < 1) throw Error("candidate K must be at least 1");
  const SingularBasis basis = detail::fold_basis(a, partition, v, candidate.K);
  const NodeSet fit_rows = partition.complement(v);
  const Fit fit = fit_candidate(a, fit_rows, partition.folds[v], basis, candidate, rng, opt);
  return held_out_loss(a, partition.folds[v], fit, kind);
}

/// V-fold network cross-validation over `candidates` with one shared split.
/// Fold v, candidate c clusters with the stream derive_seed(seed, {1, v, model, K}).
template <PairMatrix Adj>
NcvReport ncv_select(const Adj& a, std::vector<Candidate> candidates, const NcvOptions& opt, std::uint64_t seed) {
  if (candidates.empty()) throw Error("ncv_select: no candidates");
  if (opt.folds < 2) throw Error("ncv_select: need at least 2 folds");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.front().K < 1) throw Error("ncv_select: candidate K must be at least 1");
  const int kmax = std::max_element(candidates.begin(), candidates.end(),
                                    [](const Candidate& x, const Candidate& y) { return x.K < y.K; })
                       ->K;

  Rng split_rng(derive_seed(seed, {0}));
  const FoldPartition partition = partition_nodes(a.n(), opt.folds, split_rng);
  const std::size_t V = partition.size();

  std::vector<SingularBasis> bases(V);
  parallel_for(V, opt.threads, [&](std::size_t v) { bases[v] = detail::fold_basis(a, partition, v, kmax); });

  std::vector<NodeSet> fit_rows(V);
  for (std::size_t v = 0; v < V; ++v) fit_rows[v] = partition.complement(v);

  std::vector<double> grid(V * candidates.size());
  parallel_for(grid.size(), opt.threads, [&](std::size_t cell) {
    const std::size_t v = cell / candidates.size();
    const Candidate& c = candidates[cell % candidates.size()];
    Rng rng(detail::candidate_stream(seed, v, c));
    const Fit fit = fit_candidate(a, fit_rows[v], partition.folds[v], bases[v], c, rng, opt.cluster);
    grid[cell] = held_out_loss(a, partition.folds[v], fit, opt.loss);
  });

  NcvReport report{seed, V, opt.loss, {}, candidates.front()};
  double best = 0.0;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    CandidateResult r{candidates[ci], std::vector<double>(V), 0.0};
    for (std::size_t v = 0; v < V; ++v) {
      r.fold_losses[v] = grid[v * candidates.size() + ci];
      r.total += r.fold_losses[v];
    }
    // Candidates are sorted, so strict < keeps the smaller K (then SBM) on ties.
    if (ci == 0 || r.total < best) {
      best = r.total;
      report.selected = r.candidate;
    }
    report.candidates.push_back(std::move(r));
  }
  return report;
}

struct SelectionFrequency {
  std::uint64_t master_seed = 0;
  std::size_t reps = 0;
  std::map<Candidate, std::size_t> counts;
  std::vector<NcvReport> reports;

  double frequency(const Candidate& c) const {
    const auto it = counts.find(c);
    return it == counts.end() || reps == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(reps);
  }

  /// Most frequent selection; the smaller candidate wins ties.
  Candidate modal() const {
    Candidate best{};
    std::size_t best_count = 0;
    for (const auto& [c, count] : counts) {
      if (count > best_count) {
        best = c;
        best_count = count;
      }
    }
    return best;
  }
};

inline std::uint64_t rep_seed(std::uint64_t master, std::size_t rep) { return derive_seed(master, {rep}); }

/// ncv_select repeated with independent splits; rep r uses rep_seed(master, r).
template <PairMatrix Adj>
SelectionFrequency repeat_ncv(const Adj& a, const std::vector<Candidate>& candidates, const NcvOptions& opt,
                              std::size_t reps, std::uint64_t master_seed) {
  if (reps < 1) throw Error("repeat_ncv: reps must be at least 1");
  SelectionFrequency out{master_seed, reps, {}, std::vector<NcvReport>(reps)};
  NcvOptions inner = opt;
  inner.threads = 1;
  parallel_for(reps, opt.threads,
               [&](std::size_t r) { out.reports[r] = ncv_select(a, candidates, inner, rep_seed(master_seed, r)); });
  for (const auto& rep : out.reports) ++out.counts[rep.selected];
  return out;
}

}  // namespace netcv
