#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hampack/digraph.hpp"
#include "hampack/rng.hpp"
#include "hampack/types.hpp"

namespace hampack {

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace detail

/// f_l(z) = sum_{j >= l} z^j / j!.
///
/// For l <= z the tail holds at least about half of e^z, so it is computed as
/// e^z minus the compensated head sum. For l > z the head would cancel
/// catastrophically and the tail is summed forward from its first term.
inline double tail_sum(unsigned ell, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw Error(ErrorCode::invalid_input, "z must be positive");
  const double log_first = ell * std::log(z) - std::lgamma(ell + 1.0);
  if (log_first < std::log(DBL_MIN)) {
    throw Error(ErrorCode::tail_underflow, "f_" + std::to_string(ell) + "(" + std::to_string(z) + ")");
  }
  if (static_cast<double>(ell) <= z) {
    if (z > 709.0) throw Error(ErrorCode::tail_underflow, "e^z overflows for z = " + std::to_string(z));
    detail::CompensatedSum head;
    double term = 1.0;
    for (unsigned j = 0; j < ell; ++j) {
      head.add(term);
      term *= z / (j + 1.0);
    }
    return std::exp(z) - head.value();
  }
  detail::CompensatedSum tail;
  double term = std::exp(log_first);
  for (unsigned j = ell;; ++j) {
    tail.add(term);
    term *= z / (j + 1.0);
    if (term < tail.value() * 1e-18) break;
  }
  return tail.value();
}

/// Mean of the Poisson(z) law conditioned on being at least k+1.
inline double truncated_poisson_mean(double z, unsigned k) {
  return z * tail_sum(k, z) / tail_sum(k + 1, z);
}

inline double truncated_poisson_variance(double z, unsigned k) {
  const double fk1 = tail_sum(k + 1, z);
  const double ratio = tail_sum(k, z) / fk1;
  return z * z * tail_sum(k - 1, z) / fk1 + z * ratio - z * z * ratio * ratio;
}

/// The unique z with truncated_poisson_mean(z, k) = c, by bisection on
/// (c - (k+1), c).
inline double solve_z(double c, unsigned k) {
  if (k == 0) throw Error(ErrorCode::invalid_input, "k must be positive");
  if (!(c > k + 1.0)) {
    throw Error(ErrorCode::infeasible_average_degree,
                "c = " + std::to_string(c) + " must exceed k+1 = " + std::to_string(k + 1));
  }
  double lo = c - (k + 1.0);
  double hi = c;
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    mid = 0.5 * (lo + hi);
    const double rho = truncated_poisson_mean(mid, k);
    if (std::fabs(rho - c) <= 1e-10) return mid;
    if (rho < c) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4 * DBL_EPSILON * hi) break;
  }
  if (std::fabs(truncated_poisson_mean(mid, k) - c) > 1e-9) {
    throw Error(ErrorCode::contract_violation, "bisection did not converge for c = " + std::to_string(c));
  }
  return mid;
}

struct ModelParams {
  std::size_t n = 0;
  std::size_t m = 0;
  unsigned k = 1;
  double c = 0.0;  // m / n
  double z = 0.0;  // solves truncated_poisson_mean(z, k) = c

  static ModelParams from_edge_count(std::size_t n, std::size_t m, unsigned k) {
    if (n == 0) throw Error(ErrorCode::invalid_input, "n must be positive");
    if (k == 0) throw Error(ErrorCode::invalid_input, "k must be positive");
    ModelParams p;
    p.n = n;
    p.m = m;
    p.k = k;
    p.c = static_cast<double>(m) / static_cast<double>(n);
    p.z = solve_z(p.c, k);
    return p;
  }

  /// Requires c*n to be an integer.
  static ModelParams from_average_degree(std::size_t n, double c, unsigned k) {
    const double product = c * static_cast<double>(n);
    const double m = std::round(product);
    if (std::fabs(product - m) > 1e-6 || m < 1) {
      throw Error(ErrorCode::invalid_input, "c*n must be a positive integer");
    }
    return from_edge_count(n, static_cast<std::size_t>(m), k);
  }
};

/// Poisson(z) conditioned on the value being >= k+1. Sampling is by inverse
/// CDF over a table that covers all but ~1e-18 of the mass.
class TruncatedPoisson {
 public:
  TruncatedPoisson(double z, unsigned k) : z_(z), k_(k), log_norm_(std::log(tail_sum(k + 1, z))) {
    std::vector<double> mass;
    double p = pmf(k + 1);
    detail::CompensatedSum total;
    for (std::uint64_t j = k + 1;; ++j) {
      mass.push_back(p);
      total.add(p);
      p *= z / static_cast<double>(j + 1);
      if ((static_cast<double>(j) > z && p < 1e-18 * total.value()) || p == 0.0) break;
    }
    cdf_.resize(mass.size());
    detail::CompensatedSum running;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      running.add(mass[i]);
      cdf_[i] = running.value() / total.value();
    }
    cdf_.back() = 1.0;
    max_pmf_ = *std::max_element(mass.begin(), mass.end());
  }

  unsigned min_value() const { return k_ + 1; }
  double z() const { return z_; }

  double pmf(std::uint64_t j) const {
    if (j < k_ + 1) return 0.0;
    const double jd = static_cast<double>(j);
    return std::exp(jd * std::log(z_) - std::lgamma(jd + 1.0) - log_norm_);
  }

  double max_pmf() const { return max_pmf_; }

  std::uint32_t sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto index = static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                                           std::ssize(cdf_) - 1));
    return k_ + 1 + index;
  }

 private:
  double z_;
  unsigned k_;
  double log_norm_;
  std::vector<double> cdf_;
  double max_pmf_ = 0.0;
};

struct DegreeSequence {
  std::vector<std::uint32_t> out_deg;
  std::vector<std::uint32_t> in_deg;
};

namespace detail {

/// One vector of n iid truncated-Poisson values conditioned on summing to m.
/// The first n-1 coordinates are drawn freely; the last is forced to the
/// remainder r and kept with probability pmf(r)/max_pmf, which yields the
/// exact conditional law. A rejected attempt redraws everything.
inline std::vector<std::uint32_t> conditioned_vector(const TruncatedPoisson& law, std::size_t n, std::size_t m,
                                                     Rng& rng, std::size_t& attempts, std::size_t cap) {
  std::vector<std::uint32_t> values(n);
  for (std::size_t attempt = 0; attempt < cap; ++attempt) {
    ++attempts;
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      values[i] = law.sample(rng);
      sum += values[i];
    }
    if (sum >= m) continue;
    const std::uint64_t rest = m - sum;
    if (rest < law.min_value()) continue;
    if (rng.uniform() * law.max_pmf() < law.pmf(rest)) {
      values[n - 1] = static_cast<std::uint32_t>(rest);
      return values;
    }
  }
  throw Error(ErrorCode::conditioning_failure,
              "no degree vector summing to " + std::to_string(m) + " after " + std::to_string(cap) + " attempts");
}

}  // namespace detail

/// Out- and in-degrees as independent truncated-Poisson vectors, each
/// conditioned to sum to m. `attempts` (optional) receives the total number of
/// vector draws.
inline DegreeSequence sample_degree_sequence(const ModelParams& params, Rng& rng, std::size_t* attempts = nullptr) {
  if (params.m < params.n * (params.k + 1)) {
    throw Error(ErrorCode::infeasible_average_degree, "m < n(k+1)");
  }
  const TruncatedPoisson law(params.z, params.k);
  const auto cap = static_cast<std::size_t>(1e6 * std::sqrt(static_cast<double>(params.n)));
  std::size_t used = 0;
  DegreeSequence ds;
  ds.out_deg = detail::conditioned_vector(law, params.n, params.m, rng, used, cap);
  ds.in_deg = detail::conditioned_vector(law, params.n, params.m, rng, used, cap);
  if (attempts) *attempts += used;
  return ds;
}

/// The configuration sequence x: edge j is (slots[2j], slots[2j+1]).
struct ConfigDigraph {
  std::size_t n = 0;
  std::vector<Vertex> slots;
  std::vector<EdgeId> loops;   // edges whose tail equals their head
  std::vector<EdgeId> multis;  // edges whose ordered pair occurs more than once

  std::size_t edge_count() const { return slots.size() / 2; }
  Edge edge(EdgeId j) const { return {slots[2 * j], slots[2 * j + 1]}; }
  bool simple() const { return loops.empty() && multis.empty(); }

  std::vector<Edge> edges() const {
    std::vector<Edge> out(edge_count());
    for (EdgeId j = 0; j < out.size(); ++j) out[j] = edge(j);
    return out;
  }
};

struct Defects {
  std::vector<EdgeId> loops;
  std::vector<EdgeId> multis;
};

inline Defects find_defects(std::span<const Vertex> slots) {
  const std::size_t m = slots.size() / 2;
  Defects d;
  std::vector<std::pair<std::uint64_t, EdgeId>> keyed(m);
  for (EdgeId j = 0; j < m; ++j) {
    if (slots[2 * j] == slots[2 * j + 1]) d.loops.push_back(j);
    keyed[j] = {pair_key(slots[2 * j], slots[2 * j + 1]), j};
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t a = 0; a < m;) {
    std::size_t b = a + 1;
    while (b < m && keyed[b].first == keyed[a].first) ++b;
    if (b - a > 1) {
      for (std::size_t t = a; t < b; ++t) d.multis.push_back(keyed[t].second);
    }
    a = b;
  }
  std::sort(d.multis.begin(), d.multis.end());
  return d;
}

/// Bipartite configuration model: the tail slots are a uniform permutation of
/// the out-degree multiset, the head slots an independent one of the in-degree
/// multiset.
inline ConfigDigraph pair_configuration(const DegreeSequence& ds, Rng& rng) {
  if (ds.out_deg.size() != ds.in_deg.size()) throw Error(ErrorCode::invalid_input, "degree vectors differ in length");
  std::uint64_t out_sum = 0, in_sum = 0;
  for (auto d : ds.out_deg) out_sum += d;
  for (auto d : ds.in_deg) in_sum += d;
  if (out_sum != in_sum) throw Error(ErrorCode::invalid_input, "out- and in-degree sums differ");

  auto expand = [](const std::vector<std::uint32_t>& deg, std::uint64_t total) {
    std::vector<Vertex> copies;
    copies.reserve(total);
    for (Vertex v = 0; v < deg.size(); ++v) copies.insert(copies.end(), deg[v], v);
    return copies;
  };
  auto tails = expand(ds.out_deg, out_sum);
  auto heads = expand(ds.in_deg, in_sum);
  rng.shuffle(tails.begin(), tails.end());
  rng.shuffle(heads.begin(), heads.end());

  ConfigDigraph x;
  x.n = ds.out_deg.size();
  x.slots.resize(2 * out_sum);
  for (std::size_t j = 0; j < out_sum; ++j) {
    x.slots[2 * j] = tails[j];
    x.slots[2 * j + 1] = heads[j];
  }
  auto defects = find_defects(x.slots);
  x.loops = std::move(defects.loops);
  x.multis = std::move(defects.multis);
  return x;
}

/// exp(-rho^2/c - z^2 f_{k-1}(z) / (c f_{k+1}(z))) with rho = c: the
/// asymptotic probability that a pairing is simple, in the form used for the
/// simplicity-rate check.
inline double predicted_simple_rate(const ModelParams& p) {
  const double rho = truncated_poisson_mean(p.z, p.k);
  return std::exp(-rho * rho / p.c - p.z * p.z * tail_sum(p.k - 1, p.z) / (p.c * tail_sum(p.k + 1, p.z)));
}

/// Same limit computed from the Poisson means of the loop count (rho^2/c) and
/// the repeated-pair count (X^2/2 with X = z^2 f_{k-1}/(c f_{k+1})).
inline double moment_simple_rate(const ModelParams& p) {
  const double rho = truncated_poisson_mean(p.z, p.k);
  const double x = p.z * p.z * tail_sum(p.k - 1, p.z) / (p.c * tail_sum(p.k + 1, p.z));
  return std::exp(-rho * rho / p.c - 0.5 * x * x);
}

enum class SimplicityMethod {
  rejection,  // redraw degrees and pairing until simple (exactly uniform; only viable for small c)
  switching,  // repair loops and repeated pairs by degree-preserving switches
};

struct SampleReport {
  std::size_t degree_attempts = 0;
  std::size_t pairings = 0;
  std::size_t switches = 0;
};

/// Removes loops and repeated pairs from a configuration by switching heads
/// with uniformly chosen partner edges. Degrees and edge indices are kept.
inline SimpleDigraph repair_by_switching(const ConfigDigraph& x, Rng& rng, std::size_t* switches = nullptr) {
  const std::size_t m = x.edge_count();
  std::vector<Vertex> tail(m), head(m);
  std::unordered_map<std::uint64_t, std::uint32_t> count;
  count.reserve(2 * m);
  std::vector<std::uint8_t> bad(m, 0);
  std::vector<EdgeId> work;
  for (EdgeId j = 0; j < m; ++j) {
    tail[j] = x.slots[2 * j];
    head[j] = x.slots[2 * j + 1];
    const auto seen = count[pair_key(tail[j], head[j])]++;
    if (tail[j] == head[j] || seen > 0) {
      bad[j] = 1;
      work.push_back(j);
    }
  }
  if (!work.empty() && m < 2) throw Error(ErrorCode::rejection_stall, "cannot switch with a single edge");

  std::size_t done = 0;
  const std::size_t proposal_cap = 1000 * m + 1000000;
  std::size_t proposals = 0;
  while (!work.empty()) {
    if (++proposals > proposal_cap) throw Error(ErrorCode::rejection_stall, "switching repair did not converge");
    const EdgeId j = work.back();
    const auto partner = static_cast<EdgeId>(rng.below(m));
    if (partner == j || bad[partner]) continue;
    const Vertex t1 = tail[j], h1 = head[j], t2 = tail[partner], h2 = head[partner];
    if (t1 == h2 || t2 == h1) continue;
    const auto a = pair_key(t1, h2);
    const auto b = pair_key(t2, h1);
    if (a == b) continue;
    auto multiplicity = [&](std::uint64_t key) {
      const auto it = count.find(key);
      std::uint32_t c = it == count.end() ? 0 : it->second;
      if (key == pair_key(t1, h1)) --c;
      if (key == pair_key(t2, h2)) --c;
      return c;
    };
    if (multiplicity(a) != 0 || multiplicity(b) != 0) continue;
    if (--count[pair_key(t1, h1)] == 0) count.erase(pair_key(t1, h1));
    if (--count[pair_key(t2, h2)] == 0) count.erase(pair_key(t2, h2));
    ++count[a];
    ++count[b];
    head[j] = h2;
    head[partner] = h1;
    bad[j] = 0;
    work.pop_back();
    ++done;
  }
  if (switches) *switches += done;
  std::vector<Edge> edges(m);
  for (EdgeId j = 0; j < m; ++j) edges[j] = {tail[j], head[j]};
  return SimpleDigraph(x.n, std::move(edges));
}

inline SimpleDigraph sample_simple_digraph(const ModelParams& params, Rng& rng,
                                           SimplicityMethod method = SimplicityMethod::switching,
                                           SampleReport* report = nullptr, std::size_t attempt_cap = 10000) {
  SampleReport local;
  SampleReport& r = report ? *report : local;
  if (method == SimplicityMethod::switching) {
    const auto ds = sample_degree_sequence(params, rng, &r.degree_attempts);
    const auto x = pair_configuration(ds, rng);
    ++r.pairings;
    return repair_by_switching(x, rng, &r.switches);
  }
  for (std::size_t attempt = 0; attempt < attempt_cap; ++attempt) {
    const auto ds = sample_degree_sequence(params, rng, &r.degree_attempts);
    const auto x = pair_configuration(ds, rng);
    ++r.pairings;
    if (x.simple()) return SimpleDigraph(x.n, x.edges());
  }
  throw Error(ErrorCode::rejection_stall, "no simple pairing in " + std::to_string(attempt_cap) + " attempts");
}

}  // namespace hampack
