#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hampack/partition.hpp"
#include "hampack/permutation.hpp"
#include "hampack/rng.hpp"
#include "hampack/types.hpp"

namespace hampack {

/// Digraph edge (i,j) becomes the edge {a_i, b_j}. Left side A, right side B,
/// both of size n. Each edge remembers the digraph edge index it came from.
struct BipartiteGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<Vertex, EdgeId>>> adj;  // a -> (b, edge)
  std::vector<std::vector<Vertex>> radj;                   // b -> a

  BipartiteGraph() = default;
  explicit BipartiteGraph(std::size_t size) : n(size), adj(size), radj(size) {}

  void add_edge(Vertex a, Vertex b, EdgeId id) {
    adj[a].emplace_back(b, id);
    radj[b].push_back(a);
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& list : adj) total += list.size();
    return total;
  }
};

inline BipartiteGraph digraph_to_bipartite(std::size_t n, std::span<const Edge> edges, std::span<const EdgeId> ids) {
  BipartiteGraph g(n);
  for (const EdgeId id : ids) g.add_edge(edges[id].tail, edges[id].head, id);
  return g;
}

struct Matching {
  std::vector<Vertex> left_mate;
  std::vector<Vertex> right_mate;
  std::vector<EdgeId> left_edge;
  std::size_t size = 0;

  Matching() = default;
  explicit Matching(std::size_t n) : left_mate(n, no_vertex), right_mate(n, no_vertex), left_edge(n, no_edge) {}

  bool perfect() const { return size == left_mate.size(); }
};

namespace detail {

/// Hopcroft-Karp phases until no augmenting path is left. Works from any
/// starting matching that is valid in g.
inline void augment_to_maximum(const BipartiteGraph& g, Matching& m) {
  constexpr std::uint32_t inf = std::numeric_limits<std::uint32_t>::max();
  const std::size_t n = g.n;
  std::vector<std::uint32_t> dist(n);
  std::vector<std::size_t> next(n);
  std::vector<Vertex> queue;
  struct Frame {
    Vertex a;
    Vertex b;
    EdgeId e;
  };
  std::vector<Frame> stack;

  while (true) {
    queue.clear();
    for (Vertex a = 0; a < n; ++a) {
      if (m.left_mate[a] == no_vertex) {
        dist[a] = 0;
        queue.push_back(a);
      } else {
        dist[a] = inf;
      }
    }
    bool found = false;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Vertex a = queue[head];
      for (const auto& [b, e] : g.adj[a]) {
        const Vertex a2 = m.right_mate[b];
        if (a2 == no_vertex) {
          found = true;
        } else if (dist[a2] == inf) {
          dist[a2] = dist[a] + 1;
          queue.push_back(a2);
        }
      }
    }
    if (!found) return;

    std::fill(next.begin(), next.end(), 0);
    for (Vertex root = 0; root < n; ++root) {
      if (m.left_mate[root] != no_vertex) continue;
      stack.assign(1, {root, no_vertex, no_edge});
      while (!stack.empty()) {
        Frame& top = stack.back();
        const Vertex a = top.a;
        if (next[a] == g.adj[a].size()) {
          dist[a] = inf;
          stack.pop_back();
          continue;
        }
        const auto [b, e] = g.adj[a][next[a]++];
        const Vertex a2 = m.right_mate[b];
        if (a2 == no_vertex) {
          top.b = b;
          top.e = e;
          for (const auto& f : stack) {
            m.left_mate[f.a] = f.b;
            m.right_mate[f.b] = f.a;
            m.left_edge[f.a] = f.e;
          }
          ++m.size;
          break;
        }
        if (dist[a2] == dist[a] + 1) {
          top.b = b;
          top.e = e;
          stack.push_back({a2, no_vertex, no_edge});
        }
      }
    }
  }
}

}  // namespace detail

inline Matching maximum_matching(const BipartiteGraph& g) {
  Matching m(g.n);
  detail::augment_to_maximum(g, m);
  return m;
}

/// A set S of left vertices with |N(S)| < |S|, certifying that no perfect
/// matching exists.
struct HallWitness {
  std::vector<Vertex> left;
  std::vector<Vertex> right;
};

/// For a maximum matching with an exposed left vertex a0: the left vertices
/// alternating-reachable from a0, and their neighbourhood.
inline HallWitness hall_witness(const BipartiteGraph& g, const Matching& m) {
  HallWitness w;
  Vertex a0 = no_vertex;
  for (Vertex a = 0; a < g.n; ++a) {
    if (m.left_mate[a] == no_vertex) {
      a0 = a;
      break;
    }
  }
  if (a0 == no_vertex) return w;
  std::vector<std::uint8_t> seen_left(g.n, 0), seen_right(g.n, 0);
  seen_left[a0] = 1;
  w.left.push_back(a0);
  for (std::size_t head = 0; head < w.left.size(); ++head) {
    for (const auto& [b, e] : g.adj[w.left[head]]) {
      if (seen_right[b]) continue;
      seen_right[b] = 1;
      w.right.push_back(b);
      const Vertex a2 = m.right_mate[b];
      if (a2 != no_vertex && !seen_left[a2]) {
        seen_left[a2] = 1;
        w.left.push_back(a2);
      }
    }
  }
  std::sort(w.left.begin(), w.left.end());
  std::sort(w.right.begin(), w.right.end());
  return w;
}

struct BoosterResult {
  bool perfect = false;
  std::size_t consumed = 0;  // stream edges examined
  std::size_t boosters = 0;  // edges that raised the matching size
  HallWitness witness;       // filled when the stream ran out first
};

namespace detail {

/// Alternating reachability for a maximum matching. An added edge (a,b) is a
/// booster exactly when a is reachable from an exposed left vertex and b can
/// reach an exposed right vertex. Both sets only grow while edges are added,
/// so they are extended incrementally and rebuilt only after an augmentation.
class BoosterIndex {
 public:
  BoosterIndex(const BipartiteGraph& g, const Matching& m) : g_(g), m_(m) { rebuild(); }

  void rebuild() {
    const std::size_t n = g_.n;
    reach_left_.assign(n, 0);
    reach_right_.assign(n, 0);
    coreach_left_.assign(n, 0);
    coreach_right_.assign(n, 0);
    for (Vertex a = 0; a < n; ++a) {
      if (m_.left_mate[a] == no_vertex) mark_reach_left(a);
    }
    for (Vertex b = 0; b < n; ++b) {
      if (m_.right_mate[b] == no_vertex) mark_coreach_right(b);
    }
  }

  bool is_booster(Vertex a, Vertex b) const { return reach_left_[a] && coreach_right_[b]; }

  /// Update after (a,b) was added to the graph and did not boost.
  void edge_added(Vertex a, Vertex b) {
    if (reach_left_[a] && !reach_right_[b]) mark_reach_right(b);
    if (coreach_right_[b] && !coreach_left_[a] && m_.left_mate[a] != b) mark_coreach_left(a);
  }

 private:
  void mark_reach_left(Vertex a) {
    if (reach_left_[a]) return;
    reach_left_[a] = 1;
    work_.assign(1, a);
    drain_forward();
  }

  void mark_reach_right(Vertex b) {
    reach_right_[b] = 1;
    const Vertex a2 = m_.right_mate[b];
    if (a2 == no_vertex || reach_left_[a2]) return;
    reach_left_[a2] = 1;
    work_.assign(1, a2);
    drain_forward();
  }

  void drain_forward() {
    while (!work_.empty()) {
      const Vertex a = work_.back();
      work_.pop_back();
      for (const auto& [b, e] : g_.adj[a]) {
        if (reach_right_[b]) continue;
        reach_right_[b] = 1;
        const Vertex a2 = m_.right_mate[b];
        if (a2 != no_vertex && !reach_left_[a2]) {
          reach_left_[a2] = 1;
          work_.push_back(a2);
        }
      }
    }
  }

  void mark_coreach_right(Vertex b) {
    if (coreach_right_[b]) return;
    coreach_right_[b] = 1;
    work_.assign(1, b);
    drain_backward();
  }

  void mark_coreach_left(Vertex a) {
    coreach_left_[a] = 1;
    const Vertex b2 = m_.left_mate[a];
    if (b2 == no_vertex || coreach_right_[b2]) return;
    coreach_right_[b2] = 1;
    work_.assign(1, b2);
    drain_backward();
  }

  void drain_backward() {
    while (!work_.empty()) {
      const Vertex b = work_.back();
      work_.pop_back();
      for (const Vertex a : g_.radj[b]) {
        if (coreach_left_[a] || m_.left_mate[a] == b) continue;
        coreach_left_[a] = 1;
        const Vertex b2 = m_.left_mate[a];
        if (b2 != no_vertex && !coreach_right_[b2]) {
          coreach_right_[b2] = 1;
          work_.push_back(b2);
        }
      }
    }
  }

  const BipartiteGraph& g_;
  const Matching& m_;
  std::vector<std::uint8_t> reach_left_, reach_right_, coreach_left_, coreach_right_;
  std::vector<Vertex> work_;
};

}  // namespace detail

/// Adds stream edges to g one at a time, in order. Whenever an edge is a
/// booster the matching is augmented. Stops as soon as the matching is
/// perfect. `m` must be maximum in g on entry.
inline BoosterResult booster_augment(BipartiteGraph& g, Matching& m,
                                     std::span<const std::pair<Edge, EdgeId>> stream) {
  BoosterResult result;
  if (m.perfect()) {
    result.perfect = true;
    return result;
  }
  detail::BoosterIndex index(g, m);
  for (const auto& [edge, id] : stream) {
    ++result.consumed;
    const Vertex a = edge.tail, b = edge.head;
    const bool boost = index.is_booster(a, b);
    g.add_edge(a, b, id);
    if (boost) {
      const std::size_t before = m.size;
      detail::augment_to_maximum(g, m);
      if (m.size != before + 1) throw Error(ErrorCode::contract_violation, "booster did not raise matching size");
      ++result.boosters;
      if (m.perfect()) {
        result.perfect = true;
        return result;
      }
      index.rebuild();
    } else {
      index.edge_added(a, b);
    }
  }
  result.witness = hall_witness(g, m);
  return result;
}

inline PermutationDigraph matching_to_permutation(const Matching& m) {
  if (!m.perfect()) throw Error(ErrorCode::contract_violation, "matching is not perfect");
  return PermutationDigraph(m.left_mate);
}

inline CycleCover matching_to_cycle_cover(const Matching& m) {
  return {matching_to_permutation(m), m.left_edge};
}

struct Phase1Options {
  bool relabel = true;  // randomly relabel B before matching
};

struct Phase1Result {
  std::vector<Matching> matchings;
  std::vector<std::size_t> boosters;
};

/// k edge-disjoint perfect matchings. Matching i is a maximum matching of the
/// free edges of (matching pool i) + E_SMALL, completed if needed by booster
/// edges from booster pool i. Edges of each matching are taken in `usage`.
inline Outcome<Phase1Result> build_k_matchings(std::size_t n, std::span<const Edge> edges, const EdgePartition& part,
                                               EdgeUsage& usage, Rng& rng, const Phase1Options& options = {}) {
  Phase1Result result;
  for (unsigned i = 0; i < part.k; ++i) {
    std::vector<Vertex> relabel(n), unlabel(n);
    for (Vertex v = 0; v < n; ++v) relabel[v] = v;
    if (options.relabel) rng.shuffle(relabel.begin(), relabel.end());
    for (Vertex v = 0; v < n; ++v) unlabel[relabel[v]] = v;

    BipartiteGraph g(n);
    std::vector<std::pair<Edge, EdgeId>> stream;
    for (EdgeId e = 0; e < edges.size(); ++e) {
      if (!usage.free(e)) continue;
      const Edge relabelled{edges[e].tail, relabel[edges[e].head]};
      if (part.in_working_set(e, PoolRole::matching, i)) {
        g.add_edge(relabelled.tail, relabelled.head, e);
      } else if (part.in_pool(e, PoolRole::booster, i)) {
        stream.emplace_back(relabelled, e);
      }
    }
    Matching m = maximum_matching(g);
    const std::size_t deficiency = n - m.size;
    const auto boost = booster_augment(g, m, stream);
    if (!boost.perfect) {
      return PhaseFailure{"1", i,
                          "deficiency " + std::to_string(deficiency) + " after " + std::to_string(boost.boosters) +
                              " boosters; Hall set of size " + std::to_string(boost.witness.left.size()) +
                              " has " + std::to_string(boost.witness.right.size()) + " neighbours"};
    }
    Matching original(n);
    for (Vertex a = 0; a < n; ++a) {
      original.left_mate[a] = unlabel[m.left_mate[a]];
      original.right_mate[original.left_mate[a]] = a;
      original.left_edge[a] = m.left_edge[a];
      usage.take(m.left_edge[a], i);
    }
    original.size = n;
    result.matchings.push_back(std::move(original));
    result.boosters.push_back(boost.boosters);
  }
  return result;
}

}  // namespace hampack
