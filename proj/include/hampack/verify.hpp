#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hampack/digraph.hpp"
#include "hampack/model.hpp"
#include "hampack/rng.hpp"
#include "hampack/types.hpp"

namespace hampack {

enum class HamiltonDefect { none, wrong_length, vertex_out_of_range, repeated_vertex, missing_edge };

inline const char* to_string(HamiltonDefect d) {
  switch (d) {
    case HamiltonDefect::none: return "ok";
    case HamiltonDefect::wrong_length: return "wrong length";
    case HamiltonDefect::vertex_out_of_range: return "vertex out of range";
    case HamiltonDefect::repeated_vertex: return "repeated vertex";
    case HamiltonDefect::missing_edge: return "missing edge";
  }
  return "unknown";
}

struct HamiltonCheck {
  HamiltonDefect defect = HamiltonDefect::none;
  std::size_t position = 0;  // where the defect was found

  explicit operator bool() const { return defect == HamiltonDefect::none; }
};

inline HamiltonCheck check_hamilton(const SimpleDigraph& d, std::span<const Vertex> cycle) {
  const std::size_t n = d.vertex_count();
  if (cycle.size() != n || n == 0) return {HamiltonDefect::wrong_length, cycle.size()};
  std::vector<std::uint8_t> seen(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    if (cycle[t] >= n) return {HamiltonDefect::vertex_out_of_range, t};
    if (seen[cycle[t]]++) return {HamiltonDefect::repeated_vertex, t};
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (!d.has_edge(cycle[t], cycle[(t + 1) % n])) return {HamiltonDefect::missing_edge, t};
  }
  return {};
}

inline bool verify_hamilton(const SimpleDigraph& d, std::span<const Vertex> cycle) {
  return static_cast<bool>(check_hamilton(d, cycle));
}

/// k vertex sequences claimed to be edge-disjoint Hamilton cycles, with the
/// host edge index of each step.
struct PackingCertificate {
  std::vector<std::vector<Vertex>> cycles;
  std::vector<std::vector<EdgeId>> edges;
};

struct PackingCheck {
  bool valid = false;
  std::string reason;
};

inline PackingCheck check_packing(const SimpleDigraph& d, const PackingCertificate& cert) {
  std::vector<std::uint8_t> used(d.edge_count(), 0);
  for (std::size_t i = 0; i < cert.cycles.size(); ++i) {
    const auto& cycle = cert.cycles[i];
    if (const auto check = check_hamilton(d, cycle); !check) {
      return {false, "cycle " + std::to_string(i) + ": " + to_string(check.defect) + " at " +
                         std::to_string(check.position)};
    }
    const std::size_t n = cycle.size();
    for (std::size_t t = 0; t < n; ++t) {
      const EdgeId e = *d.find_edge(cycle[t], cycle[(t + 1) % n]);
      if (i < cert.edges.size() && !cert.edges[i].empty()) {
        if (cert.edges[i].size() != n || cert.edges[i][t] != e) {
          return {false, "cycle " + std::to_string(i) + ": edge index mismatch at " + std::to_string(t)};
        }
      }
      if (used[e]++) return {false, "edge (" + std::to_string(cycle[t]) + "," +
                                        std::to_string(cycle[(t + 1) % n]) + ") used twice"};
    }
  }
  return {true, ""};
}

inline bool verify_packing(const SimpleDigraph& d, const PackingCertificate& cert) {
  return check_packing(d, cert).valid;
}

/// Exhaustive search for k edge-disjoint Hamilton cycles; n <= 9.
inline std::optional<PackingCertificate> brute_force_packing(const SimpleDigraph& d, unsigned k) {
  const std::size_t n = d.vertex_count();
  if (n > 9) throw Error(ErrorCode::refused, "brute-force packing limited to n <= 9");
  if (n < 2 || k == 0) return std::nullopt;
  std::vector<std::uint8_t> used(d.edge_count(), 0);
  std::vector<std::uint8_t> on_path(n, 0);
  std::vector<Vertex> path{0};
  std::vector<EdgeId> path_edges;
  PackingCertificate cert;

  // Cycles in a packing are unordered: require them in increasing
  // lexicographic order of their vertex sequences.
  std::function<bool()> next_cycle;
  std::function<bool(Vertex)> extend = [&](Vertex v) -> bool {
    if (path.size() == n) {
      const auto closing = d.find_edge(v, 0);
      if (!closing || used[*closing]) return false;
      if (!cert.cycles.empty() && !(cert.cycles.back() < path)) return false;
      path_edges.push_back(*closing);
      used[*closing] = 1;
      cert.cycles.push_back(path);
      cert.edges.push_back(path_edges);
      const auto saved_path = path;
      const auto saved_edges = path_edges;
      if (next_cycle()) return true;
      path = saved_path;
      path_edges = saved_edges;
      for (const Vertex u : path) on_path[u] = 1;
      cert.cycles.pop_back();
      cert.edges.pop_back();
      used[*closing] = 0;
      path_edges.pop_back();
      return false;
    }
    for (const EdgeId e : d.out_edges(v)) {
      const Vertex w = d.edge(e).head;
      if (used[e] || on_path[w] || w == 0) continue;
      used[e] = 1;
      on_path[w] = 1;
      path.push_back(w);
      path_edges.push_back(e);
      if (extend(w)) return true;
      path.pop_back();
      path_edges.pop_back();
      on_path[w] = 0;
      used[e] = 0;
    }
    return false;
  };
  next_cycle = [&]() -> bool {
    if (cert.cycles.size() == k) return true;
    path.assign(1, 0);
    path_edges.clear();
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[0] = 1;
    return extend(0);
  };
  if (next_cycle()) return cert;
  return std::nullopt;
}

struct CensusCell {
  std::uint32_t in = 0;   // r
  std::uint32_t out = 0;  // s
  std::size_t observed = 0;
  double expected = 0.0;
  double deviation = 0.0;  // |observed - expected| / ((1 + sqrt(expected)) ln n)
};

struct CensusReport {
  std::vector<CensusCell> cells;
  double max_deviation = 0.0;
  std::size_t total = 0;
};

/// Vertices with in-degree r and out-degree s against
/// n z^{r+s} / (r! s! f_{k+1}(z)^2). Cells with an observation or an
/// expectation of at least 1e-3 are listed.
inline CensusReport degree_census(std::size_t n, std::span<const Edge> edges, const ModelParams& params) {
  std::vector<std::uint32_t> in(n, 0), out(n, 0);
  for (const auto& e : edges) {
    ++out[e.tail];
    ++in[e.head];
  }
  std::uint32_t max_deg = 0;
  for (std::size_t v = 0; v < n; ++v) max_deg = std::max({max_deg, in[v], out[v]});
  const TruncatedPoisson law(params.z, params.k);
  while (law.pmf(max_deg + 1) * law.pmf(params.k + 1) * static_cast<double>(n) >= 1e-3) ++max_deg;
  const std::size_t side = max_deg + 1;
  std::vector<std::size_t> counts(side * side, 0);
  for (std::size_t v = 0; v < n; ++v) ++counts[in[v] * side + out[v]];
  CensusReport report;
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(n, 3)));
  for (std::uint32_t r = 0; r < side; ++r) {
    for (std::uint32_t s = 0; s < side; ++s) {
      const double expected = static_cast<double>(n) * law.pmf(r) * law.pmf(s);
      const std::size_t observed = counts[r * side + s];
      report.total += observed;
      if (observed == 0 && expected < 1e-3) continue;
      CensusCell cell{r, s, observed, expected, 0.0};
      cell.deviation = std::fabs(static_cast<double>(observed) - expected) / ((1.0 + std::sqrt(expected)) * log_n);
      report.max_deviation = std::max(report.max_deviation, cell.deviation);
      report.cells.push_back(cell);
    }
  }
  return report;
}

struct ExpansionSample {
  std::size_t size = 0;
  std::size_t out_sum = 0;
  std::size_t in_sum = 0;
  double bound = 0.0;
  bool violated = false;
};

struct ExpansionReport {
  double eta = 0.0;
  std::vector<ExpansionSample> samples;
  std::size_t violations = 0;
};

/// Random vertex sets S over a log-spaced size grid in [k, n/2]; both degree
/// sums of S are compared with eta |S| ln(n/|S|), eta = e z.
inline ExpansionReport expansion_check(const SimpleDigraph& d, const ModelParams& params, std::size_t samples,
                                       Rng& rng, std::size_t grid_points = 12) {
  ExpansionReport report;
  report.eta = std::exp(1.0) * params.z;
  const std::size_t n = d.vertex_count();
  const std::size_t lo = std::max<std::size_t>(params.k, 1), hi = std::max<std::size_t>(n / 2, lo);
  std::vector<std::size_t> sizes;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double t = grid_points == 1 ? 0.0 : static_cast<double>(g) / static_cast<double>(grid_points - 1);
    const auto s = static_cast<std::size_t>(std::llround(std::exp(std::log(static_cast<double>(lo)) * (1 - t) +
                                                                  std::log(static_cast<double>(hi)) * t)));
    if (sizes.empty() || sizes.back() != s) sizes.push_back(s);
  }
  std::vector<Vertex> pool(n);
  for (Vertex v = 0; v < n; ++v) pool[v] = v;
  for (std::size_t j = 0; j < samples; ++j) {
    const std::size_t s = sizes[j % sizes.size()];
    for (std::size_t t = 0; t < s; ++t) std::swap(pool[t], pool[t + rng.below(n - t)]);
    ExpansionSample sample;
    sample.size = s;
    for (std::size_t t = 0; t < s; ++t) {
      sample.out_sum += d.out_degree(pool[t]);
      sample.in_sum += d.in_degree(pool[t]);
    }
    sample.bound = report.eta * static_cast<double>(s) * std::log(static_cast<double>(n) / static_cast<double>(s));
    sample.violated = static_cast<double>(std::max(sample.out_sum, sample.in_sum)) > sample.bound;
    if (sample.violated) ++report.violations;
    report.samples.push_back(sample);
  }
  return report;
}

}  // namespace hampack
