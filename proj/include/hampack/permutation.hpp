#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hampack/types.hpp"

namespace hampack {

/// Minimum acceptable cycle length n / ln n. Cycles strictly shorter are small.
inline double min_cycle_length_target(std::size_t n) {
  if (n < 3) return 1.0;
  return static_cast<double>(n) / std::log(static_cast<double>(n));
}

inline bool is_small_cycle(std::size_t length, double n0) { return static_cast<double>(length) < n0; }

/// A cycle cover seen as a permutation: succ is a bijection of [0,n). Cycles
/// are numbered in order of their smallest vertex and listed starting there.
class PermutationDigraph {
 public:
  PermutationDigraph() = default;

  explicit PermutationDigraph(std::vector<Vertex> succ) : succ_(std::move(succ)) {
    const std::size_t n = succ_.size();
    pred_.assign(n, no_vertex);
    for (Vertex v = 0; v < n; ++v) {
      const Vertex w = succ_[v];
      if (w >= n || pred_[w] != no_vertex) throw Error(ErrorCode::contract_violation, "successor map is not a bijection");
      pred_[w] = v;
    }
    cycle_of_.assign(n, no_vertex);
    position_.assign(n, 0);
    offset_.assign(1, 0);
    order_.reserve(n);
    for (Vertex v = 0; v < n; ++v) {
      if (cycle_of_[v] != no_vertex) continue;
      const auto id = static_cast<std::uint32_t>(offset_.size() - 1);
      std::uint32_t pos = 0;
      Vertex u = v;
      do {
        cycle_of_[u] = id;
        position_[u] = pos++;
        order_.push_back(u);
        u = succ_[u];
      } while (u != v);
      offset_.push_back(order_.size());
    }
  }

  std::size_t vertex_count() const { return succ_.size(); }
  Vertex succ(Vertex v) const { return succ_[v]; }
  Vertex pred(Vertex v) const { return pred_[v]; }
  const std::vector<Vertex>& successors() const { return succ_; }

  std::size_t cycle_count() const { return offset_.size() - 1; }
  std::uint32_t cycle_of(Vertex v) const { return cycle_of_[v]; }
  std::uint32_t position(Vertex v) const { return position_[v]; }
  std::size_t cycle_length(std::size_t id) const { return offset_[id + 1] - offset_[id]; }
  std::span<const Vertex> cycle(std::size_t id) const {
    return {order_.data() + offset_[id], order_.data() + offset_[id + 1]};
  }

  std::size_t min_cycle_length() const {
    std::size_t best = vertex_count();
    for (std::size_t id = 0; id < cycle_count(); ++id) best = std::min(best, cycle_length(id));
    return best;
  }

  std::vector<std::uint32_t> small_cycles(double n0) const {
    std::vector<std::uint32_t> ids;
    for (std::uint32_t id = 0; id < cycle_count(); ++id) {
      if (is_small_cycle(cycle_length(id), n0)) ids.push_back(id);
    }
    return ids;
  }

 private:
  std::vector<Vertex> succ_;
  std::vector<Vertex> pred_;
  std::vector<std::uint32_t> cycle_of_;
  std::vector<std::uint32_t> position_;
  std::vector<std::size_t> offset_;
  std::vector<Vertex> order_;
};

/// A permutation digraph whose edges are edges of a host digraph:
/// edge_of[v] is the index of the host edge (v, succ(v)).
struct CycleCover {
  PermutationDigraph pd;
  std::vector<EdgeId> edge_of;
};

}  // namespace hampack
