#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "netcv/graph.hpp"
#include "netcv/random.hpp"

namespace netcv {

struct ClusterOptions {
  int restarts = 10;
  int max_iterations = 100;
};

struct ClusterResult {
  Membership labels;
  Eigen::MatrixXd centers;  // one center per row, row c belongs to label c
  double objective = 0.0;
  int empty_repairs = 0;        // empty clusters reseeded in the winning run
  std::vector<double> history;  // objective after each iteration of the winning run
};

namespace detail {

enum class Metric { squared, euclidean };

inline double distance(const Eigen::MatrixXd& pts, std::size_t i, const Eigen::MatrixXd& centers, int c,
                       Metric metric) {
  const double sq = (pts.row(static_cast<Eigen::Index>(i)) - centers.row(c)).squaredNorm();
  return metric == Metric::squared ? sq : std::sqrt(sq);
}

// k-means++ style seeding: each new center is drawn with probability
// proportional to the current distance (squared for k-means).
inline Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& pts, int k, Rng& rng, Metric metric) {
  const auto n = static_cast<std::size_t>(pts.rows());
  Eigen::MatrixXd centers(k, pts.cols());
  std::size_t first = static_cast<std::size_t>(rng.index(n));
  centers.row(0) = pts.row(static_cast<Eigen::Index>(first));
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = distance(pts, i, centers, 0, metric);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double w : weight) total += w;
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= weight[i];
        if (target < 0.0 && weight[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.index(n));
    }
    centers.row(c) = pts.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) weight[i] = std::min(weight[i], distance(pts, i, centers, c, metric));
  }
  return centers;
}

// Nearest center, lowest index on ties.
inline void assign_points(const Eigen::MatrixXd& pts, const Eigen::MatrixXd& centers, std::vector<int>& assign,
                          Metric metric) {
  for (std::size_t i = 0; i < assign.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < centers.rows(); ++c) {
      const double d = distance(pts, i, centers, c, metric);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assign[i] = best;
  }
}

// Give every empty cluster the point farthest from its own center, taken
// from a cluster that can spare it. Returns the number of repairs.
inline int repair_empty(const Eigen::MatrixXd& pts, Eigen::MatrixXd& centers, std::vector<int>& assign,
                        Metric metric) {
  const int k = static_cast<int>(centers.rows());
  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  for (int a : assign) ++count[static_cast<std::size_t>(a)];
  int repairs = 0;
  for (int c = 0; c < k; ++c) {
    if (count[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = assign.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (count[static_cast<std::size_t>(assign[i])] < 2) continue;
      const double d = distance(pts, i, centers, assign[i], metric);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == assign.size()) throw Error("clustering: cannot fill empty cluster");
    --count[static_cast<std::size_t>(assign[far])];
    assign[far] = c;
    count[static_cast<std::size_t>(c)] = 1;
    centers.row(c) = pts.row(static_cast<Eigen::Index>(far));
    ++repairs;
  }
  return repairs;
}

inline double objective(const Eigen::MatrixXd& pts, const Eigen::MatrixXd& centers, const std::vector<int>& assign,
                        Metric metric) {
  double total = 0.0;
  for (std::size_t i = 0; i < assign.size(); ++i) total += distance(pts, i, centers, assign[i], metric);
  return total;
}

inline std::vector<std::vector<std::size_t>> members_of(const std::vector<int>& assign, int k) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < assign.size(); ++i) members[static_cast<std::size_t>(assign[i])].push_back(i);
  return members;
}

// Relabel clusters in order of first appearance so results do not depend on
// which restart produced them.
inline ClusterResult canonical(std::vector<int> assign, const Eigen::MatrixXd& centers, double obj, int repairs,
                               std::vector<double> history) {
  const int k = static_cast<int>(centers.rows());
  std::vector<int> relabel(static_cast<std::size_t>(k), -1);
  int next = 0;
  for (int a : assign) {
    if (relabel[static_cast<std::size_t>(a)] < 0) relabel[static_cast<std::size_t>(a)] = next++;
  }
  for (auto& r : relabel) {
    if (r < 0) r = next++;
  }
  Eigen::MatrixXd ordered(centers.rows(), centers.cols());
  for (int c = 0; c < k; ++c) ordered.row(relabel[static_cast<std::size_t>(c)]) = centers.row(c);
  for (auto& a : assign) a = relabel[static_cast<std::size_t>(a)];
  return {Membership(std::move(assign), k), std::move(ordered), obj, repairs, std::move(history)};
}

template <class UpdateCenters>
ClusterResult alternate(const Eigen::MatrixXd& pts, int k, Rng& rng, const ClusterOptions& opt, Metric metric,
                        UpdateCenters update) {
  const auto n = static_cast<std::size_t>(pts.rows());
  if (k < 1) throw Error("clustering: K must be at least 1");
  if (n < static_cast<std::size_t>(k)) throw Error("clustering: fewer points than clusters");

  const std::uint64_t base = rng.split();
  ClusterResult best;
  bool have_best = false;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng stream(derive_seed(base, {static_cast<std::uint64_t>(r)}));
    Eigen::MatrixXd centers = seed_centers(pts, k, stream, metric);
    std::vector<int> assign(n, -1), previous;
    std::vector<double> history;
    int repairs = 0;
    for (int it = 0; it < opt.max_iterations; ++it) {
      assign_points(pts, centers, assign, metric);
      repairs += repair_empty(pts, centers, assign, metric);
      if (assign == previous) break;
      update(pts, members_of(assign, k), centers);
      history.push_back(objective(pts, centers, assign, metric));
      previous = assign;
    }
    const double obj = objective(pts, centers, assign, metric);
    if (!have_best || obj < best.objective) {
      best = canonical(assign, centers, obj, repairs, std::move(history));
      have_best = true;
    }
  }
  return best;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding, best of `restarts` runs.
/// The objective is the sum of squared distances to assigned centers.
inline ClusterResult kmeans(const Eigen::MatrixXd& rows, int k, Rng& rng, const ClusterOptions& opt = {}) {
  auto update = [](const Eigen::MatrixXd& pts, const std::vector<std::vector<std::size_t>>& members,
                   Eigen::MatrixXd& centers) {
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) continue;
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(pts.cols());
      for (std::size_t i : members[c]) sum += pts.row(static_cast<Eigen::Index>(i));
      centers.row(static_cast<Eigen::Index>(c)) = sum / static_cast<double>(members[c].size());
    }
  };
  return detail::alternate(rows, k, rng, opt, detail::Metric::squared, update);
}

struct MedianOptions {
  double tolerance = 1e-8;
  int max_iterations = 1000;
};

/// Geometric median of the selected rows by Weiszfeld iterations with the
/// Vardi-Zhang correction when an iterate lands on a data point. Finishes by
/// snapping to the nearest data point if that point satisfies the optimality
/// condition.
inline Eigen::RowVectorXd geometric_median(const Eigen::MatrixXd& pts, std::span<const std::size_t> members,
                                           Eigen::RowVectorXd start, const MedianOptions& opt = {}) {
  if (members.empty()) return start;
  constexpr double coincide = 1e-12;

  // Returns the norm of the pull from points away from y and the multiplicity of y.
  auto pull_at = [&](const Eigen::RowVectorXd& y, Eigen::RowVectorXd* toward, double* weight_sum) {
    Eigen::RowVectorXd pull = Eigen::RowVectorXd::Zero(pts.cols());
    Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(pts.cols());
    double den = 0.0;
    double eta = 0.0;
    for (std::size_t i : members) {
      const auto x = pts.row(static_cast<Eigen::Index>(i));
      const double d = (x - y).norm();
      if (d < coincide) {
        eta += 1.0;
        continue;
      }
      pull += (x - y) / d;
      num += x / d;
      den += 1.0 / d;
    }
    if (toward) *toward = den > 0.0 ? Eigen::RowVectorXd(num / den) : y;
    if (weight_sum) *weight_sum = den;
    return std::pair{pull.norm(), eta};
  };

  Eigen::RowVectorXd y = std::move(start);
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::RowVectorXd toward;
    double den = 0.0;
    const auto [r, eta] = pull_at(y, &toward, &den);
    if (den == 0.0) break;  // every point coincides with y
    Eigen::RowVectorXd next;
    if (eta == 0.0) {
      next = toward;
    } else if (r <= eta) {
      break;  // y is a data point and already optimal
    } else {
      next = (1.0 - eta / r) * toward + (eta / r) * y;
    }
    const double step = (next - y).norm();
    y = std::move(next);
    if (step < opt.tolerance) break;
  }

  std::size_t nearest = members[0];
  double nearest_d = std::numeric_limits<double>::infinity();
  for (std::size_t i : members) {
    const double d = (pts.row(static_cast<Eigen::Index>(i)) - y).norm();
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  const Eigen::RowVectorXd candidate = pts.row(static_cast<Eigen::Index>(nearest));
  const auto [r, eta] = pull_at(candidate, nullptr, nullptr);
  if (r <= eta) return candidate;
  return y;
}

/// k-median clustering: alternate nearest-center assignment with geometric
/// median centers. Objective is the sum of Euclidean distances.
inline ClusterResult kmedian_spherical(const Eigen::MatrixXd& rows, int k, Rng& rng, const ClusterOptions& opt = {},
                                       const MedianOptions& median = {}) {
  auto update = [&median](const Eigen::MatrixXd& pts, const std::vector<std::vector<std::size_t>>& members,
                          Eigen::MatrixXd& centers) {
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) continue;
      const auto row = static_cast<Eigen::Index>(c);
      centers.row(row) = geometric_median(pts, members[c], centers.row(row), median);
    }
  };
  return detail::alternate(rows, k, rng, opt, detail::Metric::euclidean, update);
}

}  // namespace netcv
