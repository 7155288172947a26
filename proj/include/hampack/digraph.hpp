#pragma once

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hampack/types.hpp"

namespace hampack {

/// A digraph without loops or repeated ordered pairs. Edges keep the index
/// they were given; every later phase refers to edges by that index.
class SimpleDigraph {
 public:
  SimpleDigraph() = default;

  SimpleDigraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (edges_.size() >= std::numeric_limits<EdgeId>::max()) {
      throw Error(ErrorCode::invalid_input, "too many edges");
    }
    for (const auto& e : edges_) {
      if (e.tail >= n_ || e.head >= n_) throw Error(ErrorCode::invalid_input, "vertex label out of range");
      if (e.tail == e.head) throw Error(ErrorCode::invalid_input, "loop at vertex " + std::to_string(e.tail));
    }
    build_index(out_offset_, out_edges_, [](const Edge& e) { return e.tail; },
                [](const Edge& e) { return e.head; });
    build_index(in_offset_, in_edges_, [](const Edge& e) { return e.head; },
                [](const Edge& e) { return e.tail; });
    for (Vertex v = 0; v < n_; ++v) {
      const auto list = out_edges(v);
      for (std::size_t j = 1; j < list.size(); ++j) {
        if (edges_[list[j]].head == edges_[list[j - 1]].head) {
          throw Error(ErrorCode::invalid_input, "repeated edge (" + std::to_string(v) + "," +
                                                    std::to_string(edges_[list[j]].head) + ")");
        }
      }
    }
  }

  std::size_t vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId id) const { return edges_[id]; }

  /// Out-edges of v, ordered by head.
  std::span<const EdgeId> out_edges(Vertex v) const {
    return {out_edges_.data() + out_offset_[v], out_edges_.data() + out_offset_[v + 1]};
  }
  /// In-edges of v, ordered by tail.
  std::span<const EdgeId> in_edges(Vertex v) const {
    return {in_edges_.data() + in_offset_[v], in_edges_.data() + in_offset_[v + 1]};
  }

  std::size_t out_degree(Vertex v) const { return out_offset_[v + 1] - out_offset_[v]; }
  std::size_t in_degree(Vertex v) const { return in_offset_[v + 1] - in_offset_[v]; }

  std::size_t min_out_degree() const { return min_degree(out_offset_); }
  std::size_t min_in_degree() const { return min_degree(in_offset_); }

  std::optional<EdgeId> find_edge(Vertex tail, Vertex head) const {
    if (tail >= n_ || head >= n_) return std::nullopt;
    const auto list = out_edges(tail);
    const auto it = std::lower_bound(list.begin(), list.end(), head,
                                     [&](EdgeId id, Vertex h) { return edges_[id].head < h; });
    if (it != list.end() && edges_[*it].head == head) return *it;
    return std::nullopt;
  }

  bool has_edge(Vertex tail, Vertex head) const { return find_edge(tail, head).has_value(); }

 private:
  template <class KeyFn, class OrderFn>
  void build_index(std::vector<std::size_t>& offset, std::vector<EdgeId>& ids, KeyFn key, OrderFn order) {
    offset.assign(n_ + 1, 0);
    for (const auto& e : edges_) ++offset[key(e) + 1];
    std::partial_sum(offset.begin(), offset.end(), offset.begin());
    ids.resize(edges_.size());
    auto cursor = offset;
    for (EdgeId id = 0; id < edges_.size(); ++id) ids[cursor[key(edges_[id])]++] = id;
    for (Vertex v = 0; v < n_; ++v) {
      std::sort(ids.begin() + static_cast<std::ptrdiff_t>(offset[v]),
                ids.begin() + static_cast<std::ptrdiff_t>(offset[v + 1]),
                [&](EdgeId a, EdgeId b) { return order(edges_[a]) < order(edges_[b]); });
    }
  }

  std::size_t min_degree(const std::vector<std::size_t>& offset) const {
    if (n_ == 0) return 0;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (Vertex v = 0; v < n_; ++v) best = std::min(best, offset[v + 1] - offset[v]);
    return best;
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offset_{0};
  std::vector<EdgeId> out_edges_;
  std::vector<std::size_t> in_offset_{0};
  std::vector<EdgeId> in_edges_;
};

// Edge-list text format: "n m k\n" followed by m lines "u v\n", 0-indexed.

inline void write_edge_list(std::ostream& out, const SimpleDigraph& d, unsigned k) {
  out << d.vertex_count() << ' ' << d.edge_count() << ' ' << k << '\n';
  for (const auto& e : d.edges()) out << e.tail << ' ' << e.head << '\n';
}

inline std::string edge_list_text(const SimpleDigraph& d, unsigned k) {
  std::ostringstream out;
  write_edge_list(out, d, k);
  return out.str();
}

struct EdgeListFile {
  SimpleDigraph digraph;
  unsigned k = 0;
};

inline EdgeListFile read_edge_list(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::invalid_input, "missing header line");
  std::istringstream header(line);
  std::uint64_t n = 0, m = 0, k = 0;
  if (!(header >> n >> m >> k) || !(header >> std::ws).eof()) {
    throw Error(ErrorCode::invalid_input, "header must be 'n m k'");
  }
  if (n > std::numeric_limits<Vertex>::max() || m >= std::numeric_limits<EdgeId>::max()) {
    throw Error(ErrorCode::invalid_input, "instance too large");
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t j = 0; j < m; ++j) {
    if (!std::getline(in, line)) throw Error(ErrorCode::invalid_input, "expected " + std::to_string(m) + " edges");
    std::istringstream row(line);
    std::uint64_t u = 0, v = 0;
    if (!(row >> u >> v) || !(row >> std::ws).eof() || u >= n || v >= n) {
      throw Error(ErrorCode::invalid_input, "bad edge line " + std::to_string(j + 2));
    }
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw Error(ErrorCode::invalid_input, "trailing content after edge list");
  }
  return {SimpleDigraph(static_cast<std::size_t>(n), std::move(edges)), static_cast<unsigned>(k)};
}

}  // namespace hampack
