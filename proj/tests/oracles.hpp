#pragma once
// Slow, obviously-correct reference implementations used to check the
// library. None of these call into hampack's algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

/// sum_{j >= ell} z^j / j!, each term from lgamma, summed smallest-last in
/// long double until terms fall below 1e-25 of the running total.
inline long double tail_series(unsigned ell, long double z) {
  long double total = 0;
  for (unsigned j = ell; j < ell + 5000; ++j) {
    const long double term = std::exp(static_cast<long double>(j) * std::log(z) - std::lgamma(j + 1.0L));
    total += term;
    if (static_cast<long double>(j) > z && term < 1e-25L * total) break;
  }
  return total;
}

inline long double truncated_mean(long double z, unsigned k) {
  return z * tail_series(k, z) / tail_series(k + 1, z);
}

/// 200 halvings of [lo, hi] on the monotone map z -> mean.
inline long double bisect_z(long double c, unsigned k) {
  long double lo = 1e-9L, hi = c;
  for (int it = 0; it < 200; ++it) {
    const long double mid = (lo + hi) / 2;
    (truncated_mean(mid, k) < c ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

/// Maximum matching size by memoised search over subsets of used right
/// vertices; n <= 14.
inline int max_matching_exhaustive(const std::vector<std::vector<int>>& adj, int n_right) {
  const int n_left = static_cast<int>(adj.size());
  std::vector<std::vector<int>> memo(n_left + 1, std::vector<int>(1 << n_right, -1));
  auto go = [&](auto&& self, int a, int mask) -> int {
    if (a == n_left) return 0;
    int& slot = memo[a][mask];
    if (slot >= 0) return slot;
    int best = self(self, a + 1, mask);
    for (const int b : adj[a]) {
      if (!(mask >> b & 1)) best = std::max(best, 1 + self(self, a + 1, mask | (1 << b)));
    }
    return slot = best;
  };
  return go(go, 0, 0);
}

/// Straight reading of "visits every vertex once and uses only edges".
inline bool is_hamilton(int n, const std::set<std::pair<int, int>>& edges, const std::vector<int>& seq) {
  if (static_cast<int>(seq.size()) != n || n == 0) return false;
  std::set<int> seen(seq.begin(), seq.end());
  if (static_cast<int>(seen.size()) != n || *seen.begin() < 0 || *seen.rbegin() >= n) return false;
  for (int t = 0; t < n; ++t) {
    if (!edges.count({seq[t], seq[(t + 1) % n]})) return false;
  }
  return true;
}

/// One orbit of 0 covers everything.
inline bool single_cycle(const std::vector<std::uint32_t>& p) {
  std::vector<bool> seen(p.size(), false);
  std::size_t a = 0, count = 0;
  while (!seen[a]) {
    seen[a] = true;
    a = p[a];
    ++count;
  }
  return count == p.size();
}

/// |{tau : tau cyclic and phi(tau(.)) cyclic}| over all kappa! permutations.
inline std::uint64_t r_phi_all_perms(const std::vector<std::uint32_t>& phi) {
  std::vector<std::uint32_t> tau(phi.size());
  std::iota(tau.begin(), tau.end(), 0u);
  std::uint64_t count = 0;
  do {
    if (!single_cycle(tau)) continue;
    std::vector<std::uint32_t> lambda(phi.size());
    for (std::size_t a = 0; a < phi.size(); ++a) lambda[a] = phi[tau[a]];
    if (single_cycle(lambda)) ++count;
  } while (std::next_permutation(tau.begin(), tau.end()));
  return count;
}

/// Random simple digraph on n vertices, each ordered pair kept with
/// probability p, redrawn until every in- and out-degree is >= min_degree.
inline std::vector<std::pair<int, int>> random_digraph(int n, double p, int min_degree, std::mt19937_64& gen) {
  std::bernoulli_distribution keep(p);
  while (true) {
    std::vector<std::pair<int, int>> edges;
    std::vector<int> out(n, 0), in(n, 0);
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (u != v && keep(gen)) {
          edges.emplace_back(u, v);
          ++out[u];
          ++in[v];
        }
      }
    }
    if (*std::min_element(out.begin(), out.end()) >= min_degree &&
        *std::min_element(in.begin(), in.end()) >= min_degree) {
      return edges;
    }
  }
}

}  // namespace oracle
