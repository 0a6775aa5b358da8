#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "netcv/graph.hpp"

namespace netcv {

/// Confusion counts: table[a][b] = #{i : g1_i = a, g2_i = b}.
inline std::vector<std::vector<long>> confusion_matrix(const Membership& g1, const Membership& g2) {
  if (g1.n() != g2.n()) throw Error("confusion_matrix: membership lengths differ");
  std::vector<std::vector<long>> table(static_cast<std::size_t>(g1.k),
                                       std::vector<long>(static_cast<std::size_t>(g2.k), 0));
  for (std::size_t i = 0; i < g1.n(); ++i) {
    ++table[static_cast<std::size_t>(g1[i])][static_cast<std::size_t>(g2[i])];
  }
  return table;
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method
/// with potentials). Returns assign[row] = column.
inline std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<long>>& cost) {
  const std::size_t m = cost.size();
  constexpr long inf = std::numeric_limits<long>::max() / 4;
  // 1-based arrays; column 0 is the virtual start.
  std::vector<long> u(m + 1, 0), v(m + 1, 0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t row = 1; row <= m; ++row) {
    owner[0] = row;
    std::size_t col0 = 0;
    std::vector<long> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = owner[col0];
      long delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= m; ++col) {
        if (used[col]) continue;
        const long cur = cost[r0 - 1][col - 1] - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= m; ++col) {
        if (used[col]) {
          u[owner[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assign(m, 0);
  for (std::size_t col = 1; col <= m; ++col) {
    if (owner[col] != 0) assign[owner[col] - 1] = col - 1;
  }
  return assign;
}

/// Smallest number of disagreeing nodes over all relabelings of g1 onto g2.
/// The label counts may differ; unmatched labels count as disagreements.
inline std::size_t hamming_up_to_permutation(const Membership& g1, const Membership& g2) {
  const auto table = confusion_matrix(g1, g2);
  const std::size_t m = static_cast<std::size_t>(std::max(g1.k, g2.k));
  std::vector<std::vector<long>> cost(m, std::vector<long>(m, 0));
  for (std::size_t a = 0; a < table.size(); ++a) {
    for (std::size_t b = 0; b < table[a].size(); ++b) cost[a][b] = -table[a][b];
  }
  const auto assign = min_cost_assignment(cost);
  long agree = 0;
  for (std::size_t a = 0; a < m; ++a) agree -= cost[a][assign[a]];
  return g1.n() - static_cast<std::size_t>(agree);
}

}  // namespace netcv
