#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hampack/partition.hpp"
#include "hampack/permutation.hpp"
#include "hampack/rng.hpp"
#include "hampack/types.hpp"

namespace hampack {

using Perm = std::vector<std::uint32_t>;

/// True iff p is a single cycle through all of its points.
inline bool is_cyclic(const Perm& p) {
  if (p.empty()) return false;
  std::size_t steps = 0;
  std::uint32_t a = 0;
  do {
    a = p[a];
    ++steps;
  } while (a != 0 && steps <= p.size());
  return a == 0 && steps == p.size();
}

/// (p o q)(a) = p(q(a)).
inline Perm compose(const Perm& p, const Perm& q) {
  Perm r(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) r[a] = p[q[a]];
  return r;
}

/// Cycle lengths of p, sorted descending.
inline std::vector<std::size_t> cycle_type(const Perm& p) {
  std::vector<std::uint8_t> seen(p.size(), 0);
  std::vector<std::size_t> type;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (seen[a]) continue;
    std::size_t len = 0;
    for (std::size_t b = a; !seen[b]; b = p[b]) {
      seen[b] = 1;
      ++len;
    }
    type.push_back(len);
  }
  std::sort(type.rbegin(), type.rend());
  return type;
}

/// A cover with kappa edges (v_s, u_s) deleted, u_s = succ(v_s). Section s is
/// the cover path from u_{phi(s)} to v_s.
struct PathSystem {
  std::vector<Vertex> tails;
  std::vector<Vertex> heads;
  Perm phi;
  std::vector<std::uint32_t> kappa_j;  // breaks per cycle, cycles in index order
  std::vector<std::size_t> eligible;   // eligible vertices per cycle (random selection only)

  std::size_t kappa() const { return tails.size(); }
};

/// Labels the broken edges: cycles in index order; inside a cycle start at
/// the lowest-numbered tail and go round in successor order.
inline PathSystem label_breaks(const PermutationDigraph& pd, std::vector<Vertex> tails) {
  std::sort(tails.begin(), tails.end());
  if (std::adjacent_find(tails.begin(), tails.end()) != tails.end()) {
    throw Error(ErrorCode::invalid_input, "break vertices must be distinct");
  }
  std::vector<std::vector<Vertex>> per_cycle(pd.cycle_count());
  for (const Vertex v : tails) per_cycle[pd.cycle_of(v)].push_back(v);
  PathSystem ps;
  for (std::size_t id = 0; id < per_cycle.size(); ++id) {
    auto& list = per_cycle[id];
    if (list.empty()) continue;
    const std::size_t len = pd.cycle_length(id);
    const std::size_t origin = pd.position(list.front());
    std::sort(list.begin(), list.end(), [&](Vertex a, Vertex b) {
      return (pd.position(a) + len - origin) % len < (pd.position(b) + len - origin) % len;
    });
    const auto base = static_cast<std::uint32_t>(ps.tails.size());
    const auto count = static_cast<std::uint32_t>(list.size());
    for (std::uint32_t t = 0; t < count; ++t) {
      ps.tails.push_back(list[t]);
      ps.heads.push_back(pd.succ(list[t]));
      ps.phi.push_back(t == 0 ? base + count - 1 : base + t - 1);
    }
    ps.kappa_j.push_back(count);
  }
  return ps;
}

/// Per cycle C_j: V_j = C_j minus excluded vertices, c_j = |V_j|, and
/// kappa_j = 2 floor(10 c_j / n0) + 1 break vertices drawn uniformly from V_j.
inline Outcome<PathSystem> select_breaks(const PermutationDigraph& pd, std::span<const std::uint8_t> excluded,
                                         double n0, Rng& rng) {
  std::vector<Vertex> tails;
  std::vector<std::size_t> eligible_counts;
  for (std::size_t id = 0; id < pd.cycle_count(); ++id) {
    std::vector<Vertex> eligible;
    for (const Vertex v : pd.cycle(id)) {
      if (!excluded[v]) eligible.push_back(v);
    }
    const double cj = static_cast<double>(eligible.size());
    if (cj < n0 / 10.0) {
      return PhaseFailure{"3-select", 0,
                          "cycle " + std::to_string(id) + " has only " + std::to_string(eligible.size()) +
                              " eligible vertices"};
    }
    const auto kj = static_cast<std::size_t>(2 * std::floor(10.0 * cj / n0) + 1);
    if (kj > eligible.size()) {
      return PhaseFailure{"3-select", 0, "cycle " + std::to_string(id) + " too short for its breaks"};
    }
    for (std::size_t t = 0; t < kj; ++t) {
      const auto r = t + rng.below(eligible.size() - t);
      std::swap(eligible[t], eligible[r]);
      tails.push_back(eligible[t]);
    }
    eligible_counts.push_back(eligible.size());
  }
  auto ps = label_breaks(pd, std::move(tails));
  ps.eligible = std::move(eligible_counts);
  return ps;
}

/// Lambda: a -> b iff the pool has a free edge (v_a, u_{phi(b)}), a != b.
struct AuxDigraph {
  std::size_t kappa = 0;
  std::vector<std::vector<std::pair<std::uint32_t, EdgeId>>> out;  // sorted by target

  std::optional<EdgeId> edge(std::uint32_t a, std::uint32_t b) const {
    const auto& list = out[a];
    const auto it = std::lower_bound(list.begin(), list.end(), b,
                                     [](const auto& entry, std::uint32_t key) { return entry.first < key; });
    if (it != list.end() && it->first == b) return it->second;
    return std::nullopt;
  }
  bool has(std::uint32_t a, std::uint32_t b) const { return edge(a, b).has_value(); }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& list : out) total += list.size();
    return total;
  }
};

inline AuxDigraph build_aux(const PathSystem& ps, std::size_t n, std::span<const Edge> edges,
                            const PoolAdjacency& pool, const EdgeUsage& usage) {
  constexpr std::uint32_t none = ~std::uint32_t{0};
  const std::size_t kappa = ps.kappa();
  std::vector<std::uint32_t> head_label(n, none);
  for (std::uint32_t r = 0; r < kappa; ++r) head_label[ps.heads[r]] = r;
  Perm phi_inverse(kappa);
  for (std::uint32_t s = 0; s < kappa; ++s) phi_inverse[ps.phi[s]] = s;

  AuxDigraph aux;
  aux.kappa = kappa;
  aux.out.resize(kappa);
  for (std::uint32_t a = 0; a < kappa; ++a) {
    for (const EdgeId e : pool.out(ps.tails[a])) {
      if (!usage.free(e)) continue;
      const auto r = head_label[edges[e].head];
      if (r == none) continue;
      const auto b = phi_inverse[r];
      if (b != a) aux.out[a].emplace_back(b, e);
    }
    std::sort(aux.out[a].begin(), aux.out[a].end());
  }
  return aux;
}

enum class TauMode { any, restrict_rphi };

struct TauSearch {
  std::optional<Perm> tau;
  std::size_t expansions = 0;
  bool cap_hit = false;
};

/// A cyclic tau with every a -> tau(a) an edge of Lambda, i.e. a Hamilton
/// cycle of Lambda. Backtracking from node 0, trying successors with the
/// fewest onward options first. In restrict_rphi mode phi o tau must also be
/// cyclic.
inline TauSearch find_cyclic_tau(const AuxDigraph& aux, const Perm& phi, TauMode mode,
                                 std::size_t cap = 1000000) {
  TauSearch result;
  const std::size_t kappa = aux.kappa;
  if (kappa < 2) return result;
  Perm tau(kappa, 0);
  std::vector<std::uint8_t> visited(kappa, 0);
  visited[0] = 1;

  auto onward = [&](std::uint32_t b) {
    std::size_t count = 0;
    for (const auto& [c, e] : aux.out[b]) {
      if (!visited[c] || c == 0) ++count;
    }
    return count;
  };

  auto search = [&](auto&& self, std::uint32_t a, std::size_t depth) -> bool {
    if (depth == kappa) {
      if (!aux.has(a, 0)) return false;
      tau[a] = 0;
      return mode == TauMode::any || is_cyclic(compose(phi, tau));
    }
    std::vector<std::pair<std::size_t, std::uint32_t>> options;
    for (const auto& [b, e] : aux.out[a]) {
      if (!visited[b]) options.emplace_back(onward(b), b);
    }
    std::sort(options.begin(), options.end());
    for (const auto& [deg, b] : options) {
      if (deg == 0) continue;
      if (++result.expansions > cap) {
        result.cap_hit = true;
        return false;
      }
      visited[b] = 1;
      tau[a] = b;
      if (self(self, b, depth + 1)) return true;
      visited[b] = 0;
      if (result.cap_hit) return false;
    }
    return false;
  };

  if (search(search, 0, 1)) result.tau = tau;
  return result;
}

/// |{tau cyclic : phi o tau cyclic}| by enumerating all (kappa-1)! cyclic tau.
inline std::uint64_t count_r_phi(const Perm& phi) {
  const std::size_t kappa = phi.size();
  if (kappa > 10) throw Error(ErrorCode::refused, "exhaustive count limited to kappa <= 10");
  if (kappa < 2) return 0;
  std::vector<std::uint32_t> order(kappa - 1);
  std::iota(order.begin(), order.end(), 1u);
  Perm tau(kappa);
  std::uint64_t count = 0;
  do {
    tau[0] = order.front();
    for (std::size_t t = 0; t + 1 < order.size(); ++t) tau[order[t]] = order[t + 1];
    tau[order.back()] = 0;
    if (is_cyclic(compose(phi, tau))) ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  return count;
}

/// A Hamilton cycle: order[0] is the smallest vertex, edges[t] joins order[t]
/// to order[t+1] (cyclically).
struct HamiltonCycle {
  std::vector<Vertex> order;
  std::vector<EdgeId> edges;
};

inline HamiltonCycle cycle_from_cover(const CycleCover& cover) {
  if (cover.pd.cycle_count() != 1) throw Error(ErrorCode::contract_violation, "cover is not a single cycle");
  HamiltonCycle h;
  const auto cyc = cover.pd.cycle(0);
  h.order.assign(cyc.begin(), cyc.end());
  for (const Vertex v : h.order) h.edges.push_back(cover.edge_of[v]);
  return h;
}

/// Walks section 0, then section tau(0), and so on, each joined to the next by
/// the edge (v_a, u_{phi(tau(a))}).
inline HamiltonCycle reassemble(const CycleCover& cover, const PathSystem& ps, const AuxDigraph& aux, const Perm& tau) {
  const std::size_t n = cover.pd.vertex_count();
  HamiltonCycle h;
  h.order.reserve(n);
  h.edges.reserve(n);
  std::uint32_t a = 0;
  for (std::size_t step = 0; step < ps.kappa(); ++step) {
    Vertex v = ps.heads[ps.phi[a]];
    while (true) {
      h.order.push_back(v);
      if (h.order.size() > n) throw Error(ErrorCode::contract_violation, "sections overlap");
      if (v == ps.tails[a]) break;
      h.edges.push_back(cover.edge_of[v]);
      v = cover.pd.succ(v);
    }
    const auto join = aux.edge(a, tau[a]);
    if (!join) throw Error(ErrorCode::contract_violation, "tau uses a missing join edge");
    h.edges.push_back(*join);
    a = tau[a];
  }
  if (a != 0 || h.order.size() != n) throw Error(ErrorCode::contract_violation, "reassembled walk is not spanning");
  std::vector<std::uint8_t> seen(n, 0);
  for (const Vertex v : h.order) {
    if (seen[v]++) throw Error(ErrorCode::contract_violation, "reassembled walk repeats a vertex");
  }
  const auto first = static_cast<std::ptrdiff_t>(std::min_element(h.order.begin(), h.order.end()) - h.order.begin());
  std::rotate(h.order.begin(), h.order.begin() + first, h.order.end());
  std::rotate(h.edges.begin(), h.edges.begin() + first, h.edges.end());
  return h;
}

/// Break vertices that merge all cycles through 2-exchanges: tails x, y on
/// different components with free pool edges (x, succ y) and (y, succ x).
/// Components are tracked with union-find over the cover's cycles.
inline std::optional<std::vector<Vertex>> exchange_breaks(const PermutationDigraph& pd,
                                                          std::span<const std::uint8_t> excluded,
                                                          std::span<const Edge> edges, const PoolAdjacency& pool,
                                                          const EdgeUsage& usage, Rng& rng) {
  std::vector<std::uint32_t> parent(pd.cycle_count());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::size_t components = pd.cycle_count();
  std::vector<Vertex> order;
  for (Vertex v = 0; v < pd.vertex_count(); ++v) {
    if (!excluded[v]) order.push_back(v);
  }
  rng.shuffle(order.begin(), order.end());
  std::vector<std::uint8_t> taken(pd.vertex_count(), 0);
  std::vector<Vertex> tails;
  for (const Vertex x : order) {
    if (components == 1) break;
    if (taken[x]) continue;
    for (const EdgeId e1 : pool.out(x)) {
      if (!usage.free(e1)) continue;
      const Vertex y = pd.pred(edges[e1].head);
      if (y == x || taken[y] || excluded[y]) continue;
      const auto cx = find(pd.cycle_of(x)), cy = find(pd.cycle_of(y));
      if (cx == cy) continue;
      const Vertex target = pd.succ(x);
      bool back = false;
      for (const EdgeId e2 : pool.out(y)) {
        if (usage.free(e2) && edges[e2].head == target) {
          back = true;
          break;
        }
      }
      if (!back) continue;
      taken[x] = taken[y] = 1;
      tails.push_back(x);
      tails.push_back(y);
      parent[cx] = cy;
      --components;
      break;
    }
  }
  if (components != 1) return std::nullopt;
  return tails;
}

struct Phase3Options {
  TauMode mode = TauMode::any;
  std::size_t search_cap = 1000000;
  unsigned uniform_selections = 2;  // first selection plus one re-selection
  bool exchange_fallback = true;
};

struct Phase3Stats {
  std::string strategy;  // single-cycle, uniform, exchange
  std::size_t kappa = 0;
  std::vector<std::uint32_t> kappa_j;
  std::size_t search_nodes = 0;
  unsigned selections = 0;
  std::size_t aux_edges = 0;
};

/// Turns a cover whose cycles all have length >= n0 into a Hamilton cycle
/// using free edges of the patch pool. Broken cover edges are released and
/// join edges taken in `usage`.
inline Outcome<HamiltonCycle> patch_cover(const CycleCover& cover, unsigned index, std::span<const Edge> edges,
                                          const PoolAdjacency& pool, EdgeUsage& usage,
                                          std::span<const std::uint8_t> excluded, Rng& rng,
                                          const Phase3Options& options, Phase3Stats& stats) {
  const std::size_t n = cover.pd.vertex_count();
  if (cover.pd.cycle_count() == 1) {
    stats.strategy = "single-cycle";
    return cycle_from_cover(cover);
  }
  const double n0 = min_cycle_length_target(n);

  auto finish = [&](const PathSystem& ps, const AuxDigraph& aux, const Perm& tau) {
    auto h = reassemble(cover, ps, aux, tau);
    for (const Vertex t : ps.tails) usage.release(cover.edge_of[t]);
    for (std::uint32_t a = 0; a < ps.kappa(); ++a) usage.take(*aux.edge(a, tau[a]), index);
    return h;
  };

  std::string failure_phase = "3-search";
  std::string detail;
  for (unsigned sel = 0; sel < options.uniform_selections; ++sel) {
    ++stats.selections;
    auto selected = select_breaks(cover.pd, excluded, n0, rng);
    if (auto* f = std::get_if<PhaseFailure>(&selected)) {
      failure_phase = f->phase;
      detail = f->detail;
      break;
    }
    const auto& ps = std::get<PathSystem>(selected);
    const auto aux = build_aux(ps, n, edges, pool, usage);
    const auto search = find_cyclic_tau(aux, ps.phi, options.mode, options.search_cap);
    stats.strategy = "uniform";
    stats.kappa = ps.kappa();
    stats.kappa_j = ps.kappa_j;
    stats.aux_edges = aux.edge_count();
    stats.search_nodes += search.expansions;
    if (search.tau) return finish(ps, aux, *search.tau);
    detail = "no cyclic tau among " + std::to_string(ps.kappa()) + " sections (" +
             std::to_string(aux.edge_count()) + " join edges)";
  }
  if (options.exchange_fallback) {
    ++stats.selections;
    if (auto tails = exchange_breaks(cover.pd, excluded, edges, pool, usage, rng)) {
      const auto ps = label_breaks(cover.pd, std::move(*tails));
      const auto aux = build_aux(ps, n, edges, pool, usage);
      const auto search = find_cyclic_tau(aux, ps.phi, TauMode::any, options.search_cap);
      stats.strategy = "exchange";
      stats.kappa = ps.kappa();
      stats.kappa_j = ps.kappa_j;
      stats.aux_edges = aux.edge_count();
      stats.search_nodes += search.expansions;
      if (search.tau) return finish(ps, aux, *search.tau);
      detail += "; exchange breaks found but no tau";
    } else {
      detail += "; no exchange merges all cycles";
    }
  }
  return PhaseFailure{failure_phase, index, detail};
}

}  // namespace hampack
