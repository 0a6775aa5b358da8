#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "netcv/graph.hpp"
#include "netcv/random.hpp"

namespace netcv {

enum class ModelType { sbm, dcbm };

inline std::string_view to_string(ModelType m) { return m == ModelType::sbm ? "sbm" : "dcbm"; }

inline ModelType parse_model_type(std::string_view s) {
  if (s == "sbm" || s == "SBM") return ModelType::sbm;
  if (s == "dcbm" || s == "DCBM") return ModelType::dcbm;
  throw Error("unknown model type '" + std::string(s) + "'");
}

/// Symmetric k x k matrix of community-wise edge probabilities.
class BlockMatrix {
 public:
  BlockMatrix() = default;

  explicit BlockMatrix(Eigen::MatrixXd b) : b_(std::move(b)) {
    if (b_.rows() != b_.cols() || b_.rows() < 1) throw Error("BlockMatrix: must be square and non-empty");
    for (Eigen::Index i = 0; i < b_.rows(); ++i) {
      for (Eigen::Index j = 0; j < b_.cols(); ++j) {
        const double x = b_(i, j);
        if (!(x >= 0.0 && x <= 1.0)) throw Error("BlockMatrix: entries must lie in [0, 1]");
        if (std::abs(x - b_(j, i)) > 1e-12) throw Error("BlockMatrix: must be symmetric");
      }
    }
  }

  /// Diagonal `within`, every off-diagonal entry `between`.
  static BlockMatrix planted(int k, double within, double between) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Constant(k, k, between);
    b.diagonal().setConstant(within);
    return BlockMatrix(std::move(b));
  }

  int k() const noexcept { return static_cast<int>(b_.rows()); }
  double operator()(int a, int b) const noexcept { return b_(a, b); }
  const Eigen::MatrixXd& matrix() const noexcept { return b_; }

 private:
  Eigen::MatrixXd b_;
};

/// Node activeness for the degree-corrected model: positive, with the
/// largest value in every community equal to one.
class DegreeParams {
 public:
  DegreeParams() = default;

  DegreeParams(std::vector<double> psi, const Membership& g) : psi_(std::move(psi)) {
    if (psi_.size() != g.n()) throw Error("DegreeParams: length differs from membership");
    std::vector<double> block_max(static_cast<std::size_t>(g.k), 0.0);
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      if (!(psi_[i] > 0.0)) throw Error("DegreeParams: psi must be positive");
      auto& m = block_max[static_cast<std::size_t>(g[i])];
      m = std::max(m, psi_[i]);
    }
    for (double m : block_max) {
      if (m > 0.0 && std::abs(m - 1.0) > 1e-12) throw Error("DegreeParams: block-wise maximum must be 1");
    }
  }

  /// Divide each value by the maximum within its community.
  static DegreeParams normalized(std::vector<double> raw, const Membership& g) {
    if (raw.size() != g.n()) throw Error("DegreeParams: length differs from membership");
    std::vector<double> block_max(static_cast<std::size_t>(g.k), 0.0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!(raw[i] > 0.0)) throw Error("DegreeParams: psi must be positive");
      auto& m = block_max[static_cast<std::size_t>(g[i])];
      m = std::max(m, raw[i]);
    }
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] /= block_max[static_cast<std::size_t>(g[i])];
    return DegreeParams(std::move(raw), g);
  }

  std::size_t n() const noexcept { return psi_.size(); }
  double operator[](std::size_t i) const noexcept { return psi_[i]; }
  const std::vector<double>& values() const noexcept { return psi_; }

 private:
  std::vector<double> psi_;
};

/// psi_i / sqrt(sum of psi_j^2 over i's community).
inline std::vector<double> community_normalized(const std::vector<double>& psi, const Membership& g) {
  std::vector<double> ss(static_cast<std::size_t>(g.k), 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) ss[static_cast<std::size_t>(g[i])] += psi[i] * psi[i];
  std::vector<double> out(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) out[i] = psi[i] / std::sqrt(ss[static_cast<std::size_t>(g[i])]);
  return out;
}

struct SbmParams {
  Membership g;
  BlockMatrix B;

  SbmParams(Membership membership, BlockMatrix b) : g(std::move(membership)), B(std::move(b)) {
    if (B.k() != g.k) throw Error("SbmParams: block matrix size differs from community count");
  }
};

struct DcbmParams {
  Membership g;
  BlockMatrix B;
  DegreeParams psi;

  DcbmParams(Membership membership, BlockMatrix b, DegreeParams degrees)
      : g(std::move(membership)), B(std::move(b)), psi(std::move(degrees)) {
    if (B.k() != g.k) throw Error("DcbmParams: block matrix size differs from community count");
    if (psi.n() != g.n()) throw Error("DcbmParams: psi length differs from membership");
  }
};

using ModelParams = std::variant<SbmParams, DcbmParams>;

inline const Membership& membership_of(const ModelParams& p) {
  return std::visit([](const auto& x) -> const Membership& { return x.g; }, p);
}

inline ModelType model_type_of(const ModelParams& p) {
  return std::holds_alternative<SbmParams>(p) ? ModelType::sbm : ModelType::dcbm;
}

/// Dense symmetric n x n matrix of edge probabilities.
class ProbabilityMatrix {
 public:
  explicit ProbabilityMatrix(std::size_t n) : n_(n), p_(n * n, 0.0) {}

  std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return p_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) noexcept { return p_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> p_;
};

/// P_ij = B[g_i][g_j], times psi_i psi_j for the degree-corrected model. The
/// diagonal is filled by the same rule but never sampled.
inline ProbabilityMatrix expected_P(const SbmParams& p) {
  const std::size_t n = p.g.n();
  ProbabilityMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = p.B(p.g[i], p.g[j]);
  }
  return out;
}

inline ProbabilityMatrix expected_P(const DcbmParams& p) {
  const std::size_t n = p.g.n();
  ProbabilityMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = p.psi[i] * p.psi[j] * p.B(p.g[i], p.g[j]);
  }
  return out;
}

inline ProbabilityMatrix expected_P(const ModelParams& p) {
  return std::visit([](const auto& x) { return expected_P(x); }, p);
}

/// Independent Bernoulli(P_ij) edges for i < j.
inline AdjacencyMatrix sample(const ProbabilityMatrix& P, Rng& rng) {
  const std::size_t n = P.n();
  AdjacencyBuilder out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = P(i, j);
      if (!(p >= 0.0 && p <= 1.0)) throw Error("sample: edge probability outside [0, 1]");
      if (rng.bernoulli(p)) out.set_edge(i, j);
    }
  }
  return std::move(out).build();
}

inline AdjacencyMatrix sample(const ModelParams& params, Rng& rng) {
  return sample(expected_P(params), rng);
}

inline AdjacencyMatrix sample(const SbmParams& params, Rng& rng) { return sample(expected_P(params), rng); }
inline AdjacencyMatrix sample(const DcbmParams& params, Rng& rng) { return sample(expected_P(params), rng); }

/// Equal-probability multinomial labels, redrawn until no community is empty.
inline Membership multinomial_membership(std::size_t n, int k, Rng& rng) {
  if (k < 1 || n < static_cast<std::size_t>(k)) throw Error("multinomial_membership: need n >= k >= 1");
  std::vector<int> labels(n);
  for (;;) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (auto& g : labels) {
      g = static_cast<int>(rng.index(static_cast<std::uint64_t>(k)));
      ++counts[static_cast<std::size_t>(g)];
    }
    if (std::find(counts.begin(), counts.end(), std::size_t{0}) == counts.end()) break;
  }
  return Membership(std::move(labels), k);
}

/// Contiguous labels with the given community sizes.
inline Membership block_membership(const std::vector<std::size_t>& sizes) {
  std::vector<int> labels;
  for (std::size_t c = 0; c < sizes.size(); ++c) labels.insert(labels.end(), sizes[c], static_cast<int>(c));
  return Membership(std::move(labels), static_cast<int>(sizes.size()));
}

/// Sparsity/imbalance design: B = r * B0 with B0 = 3 on the diagonal and 1
/// elsewhere. Community 0 holds n1 nodes, the others split the rest evenly
/// with the remainder going to the last one.
inline SbmParams sim1_params(std::size_t n, int k, std::size_t n1, double r) {
  if (!(r > 0.0 && r < 1.0 / 3.0)) throw Error("sim1_params: r must lie in (0, 1/3)");
  if (k < 1) throw Error("sim1_params: K must be at least 1");
  std::vector<std::size_t> sizes;
  if (k == 1) {
    sizes = {n};
  } else {
    if (n1 < 1 || n1 * static_cast<std::size_t>(k) > n) throw Error("sim1_params: need 1 <= n1 <= n/K");
    const std::size_t rest = n - n1;
    const std::size_t each = rest / static_cast<std::size_t>(k - 1);
    sizes.assign(static_cast<std::size_t>(k), each);
    sizes[0] = n1;
    sizes.back() += rest - each * static_cast<std::size_t>(k - 1);
  }
  return SbmParams(block_membership(sizes), BlockMatrix::planted(k, 3.0 * r, r));
}

/// Random-B design: upper-triangle entries Unif(0, 0.5), kept only when the
/// K-th singular value clears the 25th percentile of a pilot sample.
class Sim2Design {
 public:
  static constexpr int pilot_draws = 200;
  static constexpr double max_entry = 0.5;

  Sim2Design(int k, std::uint64_t pilot_seed) : k_(k) {
    if (k < 1) throw Error("sim2: K must be at least 1");
    if (k == 1) return;
    Rng rng(pilot_seed);
    std::vector<double> sv(pilot_draws);
    for (auto& s : sv) s = smallest_singular_value(raw_draw(rng));
    std::sort(sv.begin(), sv.end());
    // Linear-interpolated quantile (R type 7).
    const double h = 0.25 * (pilot_draws - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    threshold_ = sv[lo] + (h - static_cast<double>(lo)) * (sv[lo + 1] - sv[lo]);
  }

  int k() const noexcept { return k_; }
  double threshold() const noexcept { return threshold_; }

  bool accepts(const Eigen::MatrixXd& b) const {
    return k_ == 1 || smallest_singular_value(b) >= threshold_;
  }

  BlockMatrix draw_block_matrix(Rng& rng) const {
    for (;;) {
      Eigen::MatrixXd b = raw_draw(rng);
      if (accepts(b)) return BlockMatrix(std::move(b));
    }
  }

  SbmParams draw(std::size_t n, Rng& rng) const {
    BlockMatrix b = draw_block_matrix(rng);
    return SbmParams(multinomial_membership(n, k_, rng), std::move(b));
  }

  Eigen::MatrixXd raw_draw(Rng& rng) const {
    Eigen::MatrixXd b(k_, k_);
    for (int i = 0; i < k_; ++i) {
      for (int j = i; j < k_; ++j) b(i, j) = b(j, i) = rng.uniform(0.0, max_entry);
    }
    return b;
  }

  static double smallest_singular_value(const Eigen::MatrixXd& b) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
    return svd.singularValues()(b.rows() - 1);
  }

 private:
  int k_;
  double threshold_ = 0.0;
};

/// Pilot seed used by sim2_params; one cached design per K.
inline std::uint64_t sim2_pilot_seed(int k) { return derive_seed(0x51d2c0ffeeULL, {static_cast<std::uint64_t>(k)}); }

inline const Sim2Design& sim2_design(int k) {
  static std::mutex mu;
  static std::map<int, Sim2Design> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, Sim2Design(k, sim2_pilot_seed(k))).first;
  return it->second;
}

inline SbmParams sim2_params(std::size_t n, int k, Rng& rng) { return sim2_design(k).draw(n, rng); }

/// Model-type design: B = 0.25 on the diagonal, 0.1 elsewhere; for DCBM,
/// psi ~ Unif(0.2, 1) normalized to block-wise maximum one.
inline ModelParams sim3_params(std::size_t n, int k, ModelType model, Rng& rng) {
  if (k < 1) throw Error("sim3_params: K must be at least 1");
  Membership g = multinomial_membership(n, k, rng);
  BlockMatrix b = BlockMatrix::planted(k, 0.25, 0.1);
  if (model == ModelType::sbm) return SbmParams(std::move(g), std::move(b));
  std::vector<double> raw(n);
  for (auto& x : raw) x = rng.uniform(0.2, 1.0);
  DegreeParams psi = DegreeParams::normalized(std::move(raw), g);
  return DcbmParams(std::move(g), std::move(b), std::move(psi));
}

}  // namespace netcv
