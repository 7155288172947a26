#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hampack/rng.hpp"
#include "hampack/types.hpp"

namespace hampack {

/// What an edge pool is reserved for. The numeric values order the pools
/// in the label encoding below.
enum class PoolRole : std::uint8_t { matching = 0, booster = 1, rotation = 2, patch = 3 };

inline const char* to_string(PoolRole role) {
  switch (role) {
    case PoolRole::matching: return "matching";
    case PoolRole::booster: return "booster";
    case PoolRole::rotation: return "rotation";
    case PoolRole::patch: return "patch";
  }
  return "unknown";
}

/// Every edge gets one label role*k + i (i in [0,k)). The patch role holds the
/// edges left over after the 3k reserved pools, split into k parts.
struct EdgePartition {
  unsigned k = 1;
  std::vector<std::uint32_t> label;
  std::vector<std::uint8_t> small_vertex;
  std::vector<Vertex> small;
  std::vector<std::uint8_t> small_edge;
  std::vector<EdgeId> e_small;

  PoolRole role(EdgeId e) const { return static_cast<PoolRole>(label[e] / k); }
  unsigned index(EdgeId e) const { return label[e] % k; }
  bool in_pool(EdgeId e, PoolRole r, unsigned i) const { return label[e] == static_cast<unsigned>(r) * k + i; }

  /// Pool plus the edges incident with SMALL: the working set of a phase.
  bool in_working_set(EdgeId e, PoolRole r, unsigned i) const {
    return in_pool(e, r, i) || (!small_edge.empty() && small_edge[e]);
  }

  std::vector<EdgeId> pool(PoolRole r, unsigned i) const {
    std::vector<EdgeId> ids;
    for (EdgeId e = 0; e < label.size(); ++e) {
      if (in_pool(e, r, i)) ids.push_back(e);
    }
    return ids;
  }
};

/// Pool i in 1..3k takes each still-unassigned edge with probability
/// 1/(4k-i+1), one pass per pool in edge-index order. Whatever remains is
/// shuffled and dealt round-robin into k parts.
inline EdgePartition split_edges(std::size_t edge_count, unsigned k, Rng& rng) {
  if (k == 0) throw Error(ErrorCode::invalid_input, "k must be positive");
  constexpr std::uint32_t unassigned = ~std::uint32_t{0};
  EdgePartition part;
  part.k = k;
  part.label.assign(edge_count, unassigned);
  for (unsigned pool = 1; pool <= 3 * k; ++pool) {
    const double p = 1.0 / static_cast<double>(4 * k - pool + 1);
    for (auto& l : part.label) {
      if (l == unassigned && rng.bernoulli(p)) l = pool - 1;
    }
  }
  std::vector<EdgeId> rest;
  for (EdgeId e = 0; e < edge_count; ++e) {
    if (part.label[e] == unassigned) rest.push_back(e);
  }
  rng.shuffle(rest.begin(), rest.end());
  for (std::size_t j = 0; j < rest.size(); ++j) {
    part.label[rest[j]] = 3 * k + static_cast<std::uint32_t>(j % k);
  }
  return part;
}

/// SMALL: in- or out-degree at most c/8k in the whole digraph or inside any
/// one of the 3k reserved pools. E_SMALL: every edge touching SMALL.
inline void compute_small(std::size_t n, std::span<const Edge> edges, EdgePartition& part, double c) {
  const unsigned k = part.k;
  const double threshold = c / (8.0 * k);
  const std::size_t pools = 3 * static_cast<std::size_t>(k);
  std::vector<std::uint32_t> out_total(n, 0), in_total(n, 0);
  std::vector<std::uint32_t> out_pool(pools * n, 0), in_pool(pools * n, 0);
  for (EdgeId e = 0; e < edges.size(); ++e) {
    ++out_total[edges[e].tail];
    ++in_total[edges[e].head];
    const auto l = part.label[e];
    if (l < pools) {
      ++out_pool[l * n + edges[e].tail];
      ++in_pool[l * n + edges[e].head];
    }
  }
  part.small_vertex.assign(n, 0);
  part.small.clear();
  for (Vertex v = 0; v < n; ++v) {
    bool small = out_total[v] <= threshold || in_total[v] <= threshold;
    for (std::size_t l = 0; l < pools && !small; ++l) {
      small = out_pool[l * n + v] <= threshold || in_pool[l * n + v] <= threshold;
    }
    if (small) {
      part.small_vertex[v] = 1;
      part.small.push_back(v);
    }
  }
  part.small_edge.assign(edges.size(), 0);
  part.e_small.clear();
  for (EdgeId e = 0; e < edges.size(); ++e) {
    if (part.small_vertex[edges[e].tail] || part.small_vertex[edges[e].head]) {
      part.small_edge[e] = 1;
      part.e_small.push_back(e);
    }
  }
}

/// Which cover currently holds each edge (-1: none). Shared by all phases so
/// that the k final cycles cannot reuse an edge.
class EdgeUsage {
 public:
  explicit EdgeUsage(std::size_t m = 0) : owner_(m, -1) {}

  bool free(EdgeId e) const { return owner_[e] < 0; }
  int owner(EdgeId e) const { return owner_[e]; }
  void take(EdgeId e, unsigned index) {
    if (owner_[e] >= 0) throw Error(ErrorCode::contract_violation, "edge " + std::to_string(e) + " used twice");
    owner_[e] = static_cast<int>(index);
  }
  void release(EdgeId e) { owner_[e] = -1; }

 private:
  std::vector<int> owner_;
};

/// Out- and in-lists (ascending edge index) of the edges selected by `keep`.
class PoolAdjacency {
 public:
  PoolAdjacency() = default;

  template <class Keep>
  PoolAdjacency(std::size_t n, std::span<const Edge> edges, Keep keep) {
    out_offset_.assign(n + 1, 0);
    in_offset_.assign(n + 1, 0);
    for (EdgeId e = 0; e < edges.size(); ++e) {
      if (!keep(e)) continue;
      ++out_offset_[edges[e].tail + 1];
      ++in_offset_[edges[e].head + 1];
    }
    for (std::size_t v = 0; v < n; ++v) {
      out_offset_[v + 1] += out_offset_[v];
      in_offset_[v + 1] += in_offset_[v];
    }
    out_.resize(out_offset_[n]);
    in_.resize(in_offset_[n]);
    auto out_cursor = out_offset_;
    auto in_cursor = in_offset_;
    for (EdgeId e = 0; e < edges.size(); ++e) {
      if (!keep(e)) continue;
      out_[out_cursor[edges[e].tail]++] = e;
      in_[in_cursor[edges[e].head]++] = e;
    }
  }

  std::span<const EdgeId> out(Vertex v) const {
    return {out_.data() + out_offset_[v], out_.data() + out_offset_[v + 1]};
  }
  std::span<const EdgeId> in(Vertex v) const { return {in_.data() + in_offset_[v], in_.data() + in_offset_[v + 1]}; }
  std::size_t edge_count() const { return out_.size(); }

 private:
  std::vector<std::size_t> out_offset_{0}, in_offset_{0};
  std::vector<EdgeId> out_, in_;
};

inline EdgePartition make_partition(std::size_t n, std::span<const Edge> edges, unsigned k, double c, Rng& rng) {
  auto part = split_edges(edges.size(), k, rng);
  compute_small(n, edges, part, c);
  return part;
}

}  // namespace hampack
