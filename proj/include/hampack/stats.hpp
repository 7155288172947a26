#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "hampack/model.hpp"
#include "hampack/partition.hpp"
#include "hampack/patch.hpp"
#include "hampack/permutation.hpp"
#include "hampack/rng.hpp"

namespace hampack {

struct SimplicityRate {
  std::size_t attempts = 0;
  std::size_t simple = 0;
  double mean_loops = 0.0;
  double mean_repeated = 0.0;  // edges whose ordered pair occurs more than once
  double predicted = 0.0;
  double moment_predicted = 0.0;
  double rate() const { return attempts ? static_cast<double>(simple) / static_cast<double>(attempts) : 0.0; }
};

/// Fraction of raw pairings (fresh degree sequence each time) with no loops
/// and no repeated pairs.
inline SimplicityRate simplicity_rate(const ModelParams& params, std::size_t attempts, Rng& rng) {
  SimplicityRate r;
  r.attempts = attempts;
  r.predicted = predicted_simple_rate(params);
  r.moment_predicted = moment_simple_rate(params);
  for (std::size_t t = 0; t < attempts; ++t) {
    const auto ds = sample_degree_sequence(params, rng);
    const auto x = pair_configuration(ds, rng);
    if (x.simple()) ++r.simple;
    r.mean_loops += static_cast<double>(x.loops.size());
    r.mean_repeated += static_cast<double>(x.multis.size());
  }
  if (attempts) {
    r.mean_loops /= static_cast<double>(attempts);
    r.mean_repeated /= static_cast<double>(attempts);
  }
  return r;
}

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
  std::vector<std::uint32_t> bin_low;  // first degree in each bin
  std::vector<double> observed, expected;
};

/// Pearson goodness of fit of `values` against the truncated Poisson law.
/// Bins are merged from both ends until each expects at least 5.
inline ChiSquare chi_square_gof(const std::vector<std::uint32_t>& values, const TruncatedPoisson& law) {
  ChiSquare out;
  const double total = static_cast<double>(values.size());
  std::uint32_t max_value = law.min_value();
  for (const auto v : values) max_value = std::max(max_value, v);
  std::vector<double> obs(max_value + 2, 0.0), exp(max_value + 2, 0.0);
  for (const auto v : values) obs[v] += 1.0;
  double covered = 0.0;
  for (std::uint32_t j = law.min_value(); j <= max_value; ++j) {
    exp[j] = total * law.pmf(j);
    covered += law.pmf(j);
  }
  exp[max_value + 1] = total * std::max(0.0, 1.0 - covered);

  std::vector<std::uint32_t> low;
  std::vector<double> o, e;
  double acc_o = 0.0, acc_e = 0.0;
  std::uint32_t start = law.min_value();
  for (std::uint32_t j = law.min_value(); j <= max_value + 1; ++j) {
    acc_o += obs[j];
    acc_e += exp[j];
    if (acc_e >= 5.0) {
      low.push_back(start);
      o.push_back(acc_o);
      e.push_back(acc_e);
      acc_o = acc_e = 0.0;
      start = j + 1;
    }
  }
  if (!e.empty()) {
    o.back() += acc_o;
    e.back() += acc_e;
  }
  for (std::size_t b = 0; b < e.size(); ++b) {
    out.statistic += (o[b] - e[b]) * (o[b] - e[b]) / e[b];
  }
  out.dof = e.size() > 1 ? e.size() - 1 : 1;
  out.p_value = boost::math::gamma_q(static_cast<double>(out.dof) / 2.0, out.statistic / 2.0);
  out.bin_low = std::move(low);
  out.observed = std::move(o);
  out.expected = std::move(e);
  return out;
}

struct PermutationCycleStats {
  std::size_t n = 0;
  std::size_t samples = 0;
  std::size_t short_length = 10;
  double mean_short_vertices = 0.0;  // vertices on cycles of length <= short_length
  double se_short_vertices = 0.0;
  double mean_tiny_cycles = 0.0;     // cycles of length <= 3
  double se_tiny_cycles = 0.0;
  double fraction_few_cycles = 0.0;  // at most 2 ln n cycles
  double mean_cycles = 0.0;
};

inline PermutationCycleStats permutation_cycle_stats(std::size_t n, std::size_t samples, Rng& rng,
                                                     std::size_t short_length = 10) {
  PermutationCycleStats s;
  s.n = n;
  s.samples = samples;
  s.short_length = short_length;
  std::vector<Vertex> succ(n);
  double sum_v = 0, sum_v2 = 0, sum_t = 0, sum_t2 = 0, few = 0, cycles_total = 0;
  const double limit = 2.0 * std::log(static_cast<double>(n));
  for (std::size_t t = 0; t < samples; ++t) {
    std::iota(succ.begin(), succ.end(), Vertex{0});
    rng.shuffle(succ.begin(), succ.end());
    const PermutationDigraph pd(succ);
    double short_vertices = 0, tiny = 0;
    for (std::size_t id = 0; id < pd.cycle_count(); ++id) {
      const auto len = pd.cycle_length(id);
      if (len <= short_length) short_vertices += static_cast<double>(len);
      if (len <= 3) tiny += 1;
    }
    sum_v += short_vertices;
    sum_v2 += short_vertices * short_vertices;
    sum_t += tiny;
    sum_t2 += tiny * tiny;
    cycles_total += static_cast<double>(pd.cycle_count());
    if (static_cast<double>(pd.cycle_count()) <= limit) few += 1;
  }
  const double count = static_cast<double>(std::max<std::size_t>(samples, 1));
  s.mean_short_vertices = sum_v / count;
  s.mean_tiny_cycles = sum_t / count;
  const double var_v = std::max(0.0, sum_v2 / count - s.mean_short_vertices * s.mean_short_vertices);
  const double var_t = std::max(0.0, sum_t2 / count - s.mean_tiny_cycles * s.mean_tiny_cycles);
  s.se_short_vertices = std::sqrt(var_v / count);
  s.se_tiny_cycles = std::sqrt(var_t / count);
  s.fraction_few_cycles = few / count;
  s.mean_cycles = cycles_total / count;
  return s;
}

/// Partitions of kappa into odd parts, largest part first.
inline std::vector<std::vector<std::size_t>> odd_cycle_types(std::size_t kappa) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  auto rec = [&](auto&& self, std::size_t remaining, std::size_t max_part) -> void {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (std::size_t part = std::min(max_part, remaining); part >= 1; --part) {
      if (part % 2 == 0) continue;
      current.push_back(part);
      self(self, remaining - part, part);
      current.pop_back();
    }
  };
  rec(rec, kappa, kappa);
  return out;
}

/// The permutation whose cycles are consecutive blocks of the given lengths,
/// each block b..b+l-1 mapped b+t -> b+t-1 and b -> b+l-1 (the labelling
/// produced for path sections).
inline Perm block_permutation(const std::vector<std::size_t>& type) {
  Perm p;
  std::uint32_t base = 0;
  for (const auto len : type) {
    for (std::uint32_t t = 0; t < len; ++t) p.push_back(t == 0 ? base + static_cast<std::uint32_t>(len) - 1 : base + t - 1);
    base += static_cast<std::uint32_t>(len);
  }
  return p;
}

struct RPhiRow {
  std::vector<std::size_t> type;
  std::size_t permutations = 0;  // phi tested with this cycle type
  std::uint64_t min_count = 0;
  std::uint64_t max_count = 0;
  std::uint64_t lower = 0;  // (kappa-2)!
  std::uint64_t upper = 0;  // (kappa-1)!
};

inline std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t j = 2; j <= n; ++j) f *= j;
  return f;
}

/// |R_phi| for every phi with odd cycle type (exhaustive = true), or for one
/// representative per cycle type.
inline std::vector<RPhiRow> r_phi_table(std::size_t kappa, bool exhaustive) {
  std::map<std::vector<std::size_t>, RPhiRow> rows;
  for (const auto& type : odd_cycle_types(kappa)) {
    RPhiRow row;
    row.type = type;
    row.lower = factorial(kappa - 2);
    row.upper = factorial(kappa - 1);
    row.min_count = ~std::uint64_t{0};
    rows[type] = row;
  }
  auto record = [&](const Perm& phi) {
    const auto type = cycle_type(phi);
    auto it = rows.find(type);
    if (it == rows.end()) return;
    const auto count = count_r_phi(phi);
    auto& row = it->second;
    ++row.permutations;
    row.min_count = std::min(row.min_count, count);
    row.max_count = std::max(row.max_count, count);
  };
  if (exhaustive) {
    Perm phi(kappa);
    std::iota(phi.begin(), phi.end(), 0u);
    do {
      record(phi);
    } while (std::next_permutation(phi.begin(), phi.end()));
  } else {
    for (const auto& [type, row] : rows) record(block_permutation(type));
  }
  std::vector<RPhiRow> out;
  for (auto& [type, row] : rows) out.push_back(row);
  return out;
}

}  // namespace hampack
