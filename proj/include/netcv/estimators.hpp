#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "netcv/block_models.hpp"
#include "netcv/graph.hpp"

namespace netcv {

inline constexpr double probability_floor = 1e-6;

inline double clamp_probability(double p) {
  return std::clamp(p, probability_floor, 1.0 - probability_floor);
}

/// Directed plug-in tables. Entry (k, k') sums over i in the fitting set with
/// label k and j with label k' either in the fitting set or held out; the
/// diagonal counts fitting pairs once (i < j) plus fitting-to-held-out pairs.
/// Denominators are pair counts (SBM) or sums of psi_i psi_j (DCBM).
struct PlugInCounts {
  Eigen::MatrixXd numerator;
  Eigen::MatrixXd denominator;
  double fit_edges = 0.0;  // edges among fitting pairs (pairs not both held out)
  double fit_pairs = 0.0;  // number of such unordered pairs
  double fit_psi = 0.0;    // sum of psi_i psi_j over those pairs (DCBM only)
};

namespace detail {

inline std::vector<char> held_out_mask(const NodeSet& fit, const NodeSet& test, std::size_t n) {
  if (fit.size() + test.size() != n) throw Error("estimator: fitting and held-out sets must cover all nodes");
  std::vector<char> held(n, 0);
  for (std::size_t j : test) held[j] = 1;
  for (std::size_t i : fit) {
    if (held[i]) throw Error("estimator: fitting and held-out sets overlap");
  }
  return held;
}

template <PairMatrix Adj>
PlugInCounts edge_counts(const Adj& a, const NodeSet& fit, const NodeSet& test, const Membership& g) {
  const std::size_t n = a.n();
  if (g.n() != n) throw Error("estimator: membership length differs from graph size");
  const auto held = held_out_mask(fit, test, n);
  const auto k = static_cast<Eigen::Index>(g.k);

  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(k, k);  // ordered i != j, both fitting
  Eigen::MatrixXd across = Eigen::MatrixXd::Zero(k, k);  // i fitting, j held out
  for (std::size_t i : fit) {
    const int gi = g[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double x = a(i, j);
      if (x == 0.0) continue;
      (held[j] ? across : within)(gi, g[j]) += x;
    }
  }

  PlugInCounts out{Eigen::MatrixXd(k, k), Eigen::MatrixXd::Zero(k, k)};
  for (Eigen::Index p = 0; p < k; ++p) {
    for (Eigen::Index q = 0; q < k; ++q) {
      out.numerator(p, q) = p == q ? within(p, p) / 2.0 + across(p, p) : within(p, q) + across(p, q);
    }
  }
  out.fit_edges = within.sum() / 2.0 + across.sum();
  const auto n1 = static_cast<double>(fit.size());
  const auto n2 = static_cast<double>(test.size());
  out.fit_pairs = n1 * (n1 - 1.0) / 2.0 + n1 * n2;
  return out;
}

// Per-label sums of w over the fitting and held-out sets, plus sums of w^2 over fitting.
struct LabelSums {
  std::vector<double> fit, held, fit_sq;
};

inline LabelSums label_sums(const NodeSet& fit, const NodeSet& test, const Membership& g,
                            std::span<const double> w) {
  const auto k = static_cast<std::size_t>(g.k);
  LabelSums s{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  for (std::size_t i : fit) {
    const auto c = static_cast<std::size_t>(g[i]);
    s.fit[c] += w[i];
    s.fit_sq[c] += w[i] * w[i];
  }
  for (std::size_t j : test) s.held[static_cast<std::size_t>(g[j])] += w[j];
  return s;
}

inline void fill_denominators(PlugInCounts& c, const LabelSums& s) {
  const auto k = static_cast<Eigen::Index>(s.fit.size());
  for (Eigen::Index p = 0; p < k; ++p) {
    const auto pp = static_cast<std::size_t>(p);
    for (Eigen::Index q = 0; q < k; ++q) {
      const auto qq = static_cast<std::size_t>(q);
      c.denominator(p, q) = p == q ? (s.fit[pp] * s.fit[pp] - s.fit_sq[pp]) / 2.0 + s.fit[pp] * s.held[pp]
                                   : s.fit[pp] * (s.fit[qq] + s.held[qq]);
    }
  }
}

// Symmetric estimate pooling the (k, k') and (k', k) tables; entries with a
// vanishing denominator take `fallback`.
inline Eigen::MatrixXd pooled_ratio(const PlugInCounts& c, double fallback, int& fallbacks) {
  const Eigen::Index k = c.numerator.rows();
  Eigen::MatrixXd b(k, k);
  for (Eigen::Index p = 0; p < k; ++p) {
    for (Eigen::Index q = p; q < k; ++q) {
      const double num = p == q ? c.numerator(p, p) : c.numerator(p, q) + c.numerator(q, p);
      const double den = p == q ? c.denominator(p, p) : c.denominator(p, q) + c.denominator(q, p);
      if (den < 1e-12) {
        b(p, q) = b(q, p) = fallback;
        ++fallbacks;
      } else {
        b(p, q) = b(q, p) = num / den;
      }
    }
  }
  return b;
}

}  // namespace detail

/// Plug-in tables for the SBM block estimate.
template <PairMatrix Adj>
PlugInCounts sbm_counts(const Adj& a, const NodeSet& fit, const NodeSet& test, const Membership& g) {
  PlugInCounts c = detail::edge_counts(a, fit, test, g);
  const std::vector<double> ones(a.n(), 1.0);
  detail::fill_denominators(c, detail::label_sums(fit, test, g, ones));
  return c;
}

/// Plug-in tables for the DCBM block estimate; denominators weight each pair
/// by psi_i psi_j.
template <PairMatrix Adj>
PlugInCounts dcbm_counts(const Adj& a, const NodeSet& fit, const NodeSet& test, const Membership& g,
                         std::span<const double> psi) {
  if (psi.size() != a.n()) throw Error("estimator: psi length differs from graph size");
  for (double x : psi) {
    if (!(x >= 0.0)) throw Error("estimator: psi entries must be nonnegative");
  }
  PlugInCounts c = detail::edge_counts(a, fit, test, g);
  const auto sums = detail::label_sums(fit, test, g, psi);
  detail::fill_denominators(c, sums);
  double fit_total = 0.0, fit_sq = 0.0, held_total = 0.0;
  for (std::size_t p = 0; p < sums.fit.size(); ++p) {
    fit_total += sums.fit[p];
    fit_sq += sums.fit_sq[p];
    held_total += sums.held[p];
  }
  c.fit_psi = (fit_total * fit_total - fit_sq) / 2.0 + fit_total * held_total;
  return c;
}

struct SbmFit {
  Membership g_hat;
  BlockMatrix B_hat;
  int fallbacks = 0;  // block entries that used the global density
};

struct DcbmFit {
  Membership g_hat;
  Eigen::MatrixXd B_prime_hat;  // nonnegative, not capped at one
  std::vector<double> psi_prime_hat;
  int fallbacks = 0;
};

using Fit = std::variant<SbmFit, DcbmFit>;

template <PairMatrix Adj>
SbmFit estimate_B_sbm(const Adj& a, const NodeSet& fit, const NodeSet& test, const Membership& g_hat, int k) {
  if (g_hat.k != k) throw Error("estimate_B_sbm: K differs from the membership's community count");
  const PlugInCounts c = sbm_counts(a, fit, test, g_hat);
  const double density = c.fit_pairs > 0.0 ? c.fit_edges / c.fit_pairs : 0.0;
  int fallbacks = 0;
  Eigen::MatrixXd b = detail::pooled_ratio(c, density, fallbacks);
  return {g_hat, BlockMatrix(std::move(b)), fallbacks};
}

template <PairMatrix Adj>
DcbmFit estimate_dcbm(const Adj& a, const NodeSet& fit, const NodeSet& test, const Membership& g_hat,
                      std::vector<double> psi_prime_hat, int k) {
  if (g_hat.k != k) throw Error("estimate_dcbm: K differs from the membership's community count");
  const PlugInCounts c = dcbm_counts(a, fit, test, g_hat, psi_prime_hat);
  const double density = c.fit_pairs > 0.0 ? c.fit_edges / c.fit_pairs : 0.0;
  const double mean_psi = c.fit_pairs > 0.0 ? c.fit_psi / c.fit_pairs : 0.0;
  const double fallback = mean_psi > 1e-12 ? density / mean_psi : density;
  int fallbacks = 0;
  Eigen::MatrixXd b = detail::pooled_ratio(c, fallback, fallbacks);
  return {g_hat, std::move(b), std::move(psi_prime_hat), fallbacks};
}

/// Fitted edge probability for a pair of distinct nodes, clamped to
/// [1e-6, 1 - 1e-6].
inline double predict_P(const SbmFit& fit, std::size_t i, std::size_t j) {
  if (i == j) throw Error("predict_P: pair must have distinct nodes");
  return clamp_probability(fit.B_hat(fit.g_hat[i], fit.g_hat[j]));
}

inline double predict_P(const DcbmFit& fit, std::size_t i, std::size_t j) {
  if (i == j) throw Error("predict_P: pair must have distinct nodes");
  return clamp_probability(fit.psi_prime_hat[i] * fit.psi_prime_hat[j] * fit.B_prime_hat(fit.g_hat[i], fit.g_hat[j]));
}

inline double predict_P(const Fit& fit, std::size_t i, std::size_t j) {
  return std::visit([&](const auto& f) { return predict_P(f, i, j); }, fit);
}

}  // namespace netcv
