#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "netcv/random.hpp"

namespace netcv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Anything that answers n() and (i, j) with a number: adjacency matrices,
/// population probability matrices, test fixtures.
template <class M>
concept PairMatrix = requires(const M& m, std::size_t i, std::size_t j) {
  { m.n() } -> std::convertible_to<std::size_t>;
  { m(i, j) } -> std::convertible_to<double>;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Symmetric 0/1 matrix with zero diagonal, dense byte storage.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;

  explicit AdjacencyMatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}

  /// Self-loops are dropped and duplicate edges collapse.
  AdjacencyMatrix(std::size_t n, std::span<const Edge> edges) : AdjacencyMatrix(n) {
    for (const auto& [i, j] : edges) {
      if (i >= n || j >= n) throw Error("edge endpoint out of range");
      if (i == j) continue;
      bits_[i * n + j] = 1;
      bits_[j * n + i] = 1;
    }
  }

  std::size_t n() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return bits_[i * n_ + j];
  }

  bool has_edge(std::size_t i, std::size_t j) const noexcept {
    return bits_[i * n_ + j] != 0;
  }

  std::span<const std::uint8_t> row(std::size_t i) const noexcept {
    return {bits_.data() + i * n_, n_};
  }

  std::size_t degree(std::size_t i) const noexcept {
    const auto r = row(i);
    return static_cast<std::size_t>(std::count(r.begin(), r.end(), std::uint8_t{1}));
  }

  std::size_t edge_count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1})) / 2;
  }

  std::vector<std::size_t> neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    const auto r = row(i);
    for (std::size_t j = 0; j < n_; ++j) {
      if (r[j]) out.push_back(j);
    }
    return out;
  }

  /// Unordered edge list with i < j, in row-major order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (has_edge(i, j)) out.emplace_back(i, j);
      }
    }
    return out;
  }

  /// Induced subgraph on `nodes`; node k of the result is nodes[k].
  AdjacencyMatrix induced(std::span<const std::size_t> nodes) const {
    AdjacencyMatrix sub(nodes.size());
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = 0; b < nodes.size(); ++b) {
        sub.bits_[a * sub.n_ + b] = bits_[nodes[a] * n_ + nodes[b]];
      }
    }
    return sub;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  friend class AdjacencyBuilder;
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Mutable staging area for samplers; produces an immutable AdjacencyMatrix.
class AdjacencyBuilder {
 public:
  explicit AdjacencyBuilder(std::size_t n) : m_(n) {}

  void set_edge(std::size_t i, std::size_t j) {
    if (i == j) return;
    m_.bits_[i * m_.n_ + j] = 1;
    m_.bits_[j * m_.n_ + i] = 1;
  }

  AdjacencyMatrix build() && { return std::move(m_); }

 private:
  AdjacencyMatrix m_;
};

/// Sorted, duplicate-free set of node ids.
class NodeSet {
 public:
  NodeSet() = default;

  NodeSet(std::vector<std::size_t> ids, std::size_t n) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
      throw Error("NodeSet: duplicate node id");
    }
    if (!ids_.empty() && ids_.back() >= n) throw Error("NodeSet: node id out of range");
  }

  static NodeSet all(std::size_t n) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return NodeSet(std::move(ids), n);
  }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  std::size_t operator[](std::size_t k) const noexcept { return ids_[k]; }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  std::span<const std::size_t> ids() const noexcept { return ids_; }

  bool contains(std::size_t id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<std::size_t> ids_;
};

/// V disjoint node sets covering 0..n-1 with sizes differing by at most one.
struct FoldPartition {
  std::size_t n = 0;
  std::vector<NodeSet> folds;

  std::size_t size() const noexcept { return folds.size(); }

  /// Every node not in fold v, sorted.
  NodeSet complement(std::size_t v) const {
    std::vector<std::size_t> rest;
    rest.reserve(n - folds.at(v).size());
    for (std::size_t u = 0; u < folds.size(); ++u) {
      if (u == v) continue;
      rest.insert(rest.end(), folds[u].begin(), folds[u].end());
    }
    return NodeSet(std::move(rest), n);
  }
};

/// Uniformly random balanced partition. The first n mod V folds get the
/// extra node.
inline FoldPartition partition_nodes(std::size_t n, std::size_t folds, Rng& rng) {
  if (folds < 2) throw Error("partition_nodes: need at least 2 folds");
  if (folds > n) throw Error("partition_nodes: more folds than nodes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  FoldPartition out{n, {}};
  out.folds.reserve(folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t v = 0; v < folds; ++v) {
    const std::size_t len = base + (v < extra ? 1 : 0);
    out.folds.emplace_back(
        std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                 order.begin() + static_cast<std::ptrdiff_t>(pos + len)),
        n);
    pos += len;
  }
  return out;
}

/// Community labels. Stored 0-based (0..k-1); files and reports use 1..k.
struct Membership {
  std::vector<int> labels;
  int k = 1;

  Membership() = default;
  Membership(std::vector<int> l, int communities) : labels(std::move(l)), k(communities) {
    if (k < 1) throw Error("Membership: k must be at least 1");
    if (labels.size() < static_cast<std::size_t>(k)) throw Error("Membership: fewer nodes than communities");
    for (int g : labels) {
      if (g < 0 || g >= k) throw Error("Membership: label out of range");
    }
  }

  std::size_t n() const noexcept { return labels.size(); }
  int operator[](std::size_t i) const noexcept { return labels[i]; }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(static_cast<std::size_t>(k), 0);
    for (int g : labels) ++s[static_cast<std::size_t>(g)];
    return s;
  }

  friend bool operator==(const Membership&, const Membership&) = default;
};

/// Read-only rectangle of a square pair matrix: the chosen rows, all columns.
template <PairMatrix Source>
class RectView {
 public:
  RectView(const Source& source, NodeSet rows) : source_(&source), rows_(std::move(rows)) {
    if (!rows_.empty() && rows_.ids().back() >= source.n()) {
      throw Error("RectView: row outside source");
    }
  }

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return source_->n(); }
  const NodeSet& row_set() const noexcept { return rows_; }
  const Source& source() const noexcept { return *source_; }

  double operator()(std::size_t r, std::size_t j) const { return (*source_)(rows_[r], j); }

 private:
  const Source* source_;
  NodeSet rows_;
};

struct Subgraph {
  AdjacencyMatrix adjacency;
  std::vector<std::size_t> original_ids;  // original_ids[k] = old id of new node k
};

/// Induced subgraph on the largest connected component. Among equally large
/// components the one holding the smallest node id wins.
inline Subgraph largest_connected_component(const AdjacencyMatrix& a) {
  const std::size_t n = a.n();
  std::vector<int> component(n, -1);
  std::vector<std::size_t> best;
  std::vector<std::size_t> stack;
  int next_id = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (component[start] >= 0) continue;
    std::vector<std::size_t> members;
    component[start] = next_id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      members.push_back(u);
      const auto r = a.row(u);
      for (std::size_t w = 0; w < n; ++w) {
        if (r[w] && component[w] < 0) {
          component[w] = next_id;
          stack.push_back(w);
        }
      }
    }
    ++next_id;
    if (members.size() > best.size()) best = std::move(members);
  }
  std::sort(best.begin(), best.end());
  Subgraph out{a.induced(best), best};
  return out;
}

inline bool is_connected(const AdjacencyMatrix& a) {
  return a.n() == 0 || largest_connected_component(a).adjacency.n() == a.n();
}

}  // namespace netcv
