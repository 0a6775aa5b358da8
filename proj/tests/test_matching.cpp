#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "netcv/matching.hpp"
#include "netcv/random.hpp"

using namespace netcv;

namespace {

// Oracle: try every injective relabeling of g1's labels.
std::size_t brute_force_hamming(const Membership& g1, const Membership& g2) {
  const int m = std::max(g1.k, g2.k);
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = g1.n();
  do {
    std::size_t miss = 0;
    for (std::size_t i = 0; i < g1.n(); ++i) miss += perm[static_cast<std::size_t>(g1[i])] != g2[i];
    best = std::min(best, miss);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Membership random_membership(std::size_t n, int k, Rng& rng) {
  std::vector<int> l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(rng.index(k));
  return Membership(std::move(l), k);
}

}  // namespace

TEST_CASE("hamming up to permutation: worked cases", "[matching]") {
  const Membership a({0, 0, 1, 1}, 2);
  CHECK(hamming_up_to_permutation(a, Membership({1, 1, 0, 0}, 2)) == 0);
  CHECK(hamming_up_to_permutation(a, Membership({0, 1, 0, 1}, 2)) == 2);
  CHECK(brute_force_hamming(a, Membership({0, 1, 0, 1}, 2)) == 2);
  CHECK(hamming_up_to_permutation(a, a) == 0);
}

TEST_CASE("hamming up to permutation: length mismatch", "[matching]") {
  CHECK_THROWS_AS(hamming_up_to_permutation(Membership({0, 0}, 1), Membership({0, 0, 0}, 1)), Error);
}

TEST_CASE("hamming up to permutation matches brute force for K <= 5", "[matching][property]") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int k1 = 1 + static_cast<int>(rng.index(5));
    const int k2 = 1 + static_cast<int>(rng.index(5));
    const std::size_t n = static_cast<std::size_t>(std::max(k1, k2)) + rng.index(25);
    const auto g1 = random_membership(n, k1, rng);
    const auto g2 = random_membership(n, k2, rng);
    CHECK(hamming_up_to_permutation(g1, g2) == brute_force_hamming(g1, g2));
  }
}

TEST_CASE("hamming up to permutation: symmetric and relabeling invariant", "[matching][property]") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.index(10));
    const std::size_t n = static_cast<std::size_t>(k) + rng.index(100);
    const auto g1 = random_membership(n, k, rng);
    const auto g2 = random_membership(n, k, rng);
    const auto d = hamming_up_to_permutation(g1, g2);
    CHECK(d == hamming_up_to_permutation(g2, g1));

    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    std::vector<int> relabeled(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[i] = perm[static_cast<std::size_t>(g1[i])];
    CHECK(hamming_up_to_permutation(Membership(relabeled, k), g2) == d);
    CHECK(hamming_up_to_permutation(Membership(relabeled, k), g1) == 0);
  }
}
