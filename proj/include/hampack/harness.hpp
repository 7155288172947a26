#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hampack/cover.hpp"
#include "hampack/digraph.hpp"
#include "hampack/matching.hpp"
#include "hampack/model.hpp"
#include "hampack/partition.hpp"
#include "hampack/patch.hpp"
#include "hampack/permutation.hpp"
#include "hampack/rng.hpp"
#include "hampack/verify.hpp"

namespace hampack {

enum class BudgetPreset { desk, asymptotic };

struct TrialConfig {
  SimplicityMethod method = SimplicityMethod::switching;
  BudgetPreset budget = BudgetPreset::desk;
  bool relabel = true;
  TauMode tau_mode = TauMode::any;
  bool exchange_fallback = true;
  std::function<void(const std::string&)> trace;
  // Observers, called as the pipeline passes each stage. Not used by sweeps.
  std::function<void(const SimpleDigraph&)> on_sample;
  std::function<void(const EdgePartition&)> on_partition;
  std::function<void(const Phase1Result&)> on_matchings;
  std::function<void(unsigned, const CycleCover&)> on_phase2;
};

struct PhaseTimes {
  double sample = 0, partition = 0, phase1 = 0, phase2 = 0, phase3 = 0, verify = 0;
  double total() const { return sample + partition + phase1 + phase2 + phase3 + verify; }
};

/// What happened to one of the k cycle covers.
struct IndexRecord {
  std::size_t boosters = 0;
  Phase2Stats phase2;
  Phase3Stats phase3;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  ModelParams params;
  bool success = false;
  std::string failed_phase;  // "sample", "1", "2", "3-select", "3-search", "verify"
  std::size_t failed_index = 0;
  std::string detail;
  PhaseTimes ms;
  SampleReport sampler;
  std::size_t small_vertices = 0;
  std::size_t small_edges = 0;
  std::vector<IndexRecord> indices;
  std::optional<PackingCertificate> certificate;
};

namespace detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline void fail(TrialRecord& r, const PhaseFailure& f) {
  r.success = false;
  r.failed_phase = f.phase;
  r.failed_index = f.index;
  r.detail = f.detail;
}

}  // namespace detail

/// Partition, then the three phases and verification, on a given digraph.
/// `rng` continues the trial's stream.
inline void run_pipeline(const SimpleDigraph& d, TrialRecord& record, Rng& rng, const TrialConfig& config,
                         detail::Stopwatch& clock) {
  const auto& params = record.params;
  const std::size_t n = d.vertex_count();
  const unsigned k = params.k;
  const std::span<const Edge> edges(d.edges());

  const auto part = make_partition(n, edges, k, params.c, rng);
  record.small_vertices = part.small.size();
  record.small_edges = part.e_small.size();
  record.ms.partition = clock.lap();
  record.indices.assign(k, {});
  if (config.on_partition) config.on_partition(part);

  EdgeUsage usage(edges.size());
  Phase1Options p1;
  p1.relabel = config.relabel;
  auto phase1 = build_k_matchings(n, edges, part, usage, rng, p1);
  record.ms.phase1 = clock.lap();
  if (auto* f = std::get_if<PhaseFailure>(&phase1)) return detail::fail(record, *f);
  auto& matchings = std::get<Phase1Result>(phase1);
  if (config.on_matchings) config.on_matchings(matchings);
  std::vector<CycleCover> covers;
  for (unsigned i = 0; i < k; ++i) {
    record.indices[i].boosters = matchings.boosters[i];
    covers.push_back(matching_to_cycle_cover(matchings.matchings[i]));
  }

  Phase2Options p2;
  p2.budget = config.budget == BudgetPreset::desk ? Phase2Budget::desk(n) : Phase2Budget::asymptotic(n);
  p2.alpha = static_cast<unsigned>(std::max(1.0, std::ceil(params.c / (8.0 * k))));
  p2.trace = config.trace;
  std::vector<UsedVertices> used;
  for (unsigned i = 0; i < k; ++i) {
    used.emplace_back(n);
    const PoolAdjacency pool(n, edges, [&](EdgeId e) { return part.in_working_set(e, PoolRole::rotation, i); });
    auto out = eliminate_small_cycles(std::move(covers[i]), i, edges, pool, usage, used[i], rng, p2,
                                      record.indices[i].phase2);
    if (auto* f = std::get_if<PhaseFailure>(&out)) {
      record.ms.phase2 = clock.lap();
      return detail::fail(record, *f);
    }
    covers[i] = std::move(std::get<CycleCover>(out));
    if (config.on_phase2) config.on_phase2(i, covers[i]);
  }
  record.ms.phase2 = clock.lap();

  Phase3Options p3;
  p3.mode = config.tau_mode;
  p3.exchange_fallback = config.exchange_fallback;
  PackingCertificate cert;
  for (unsigned i = 0; i < k; ++i) {
    const PoolAdjacency pool(n, edges, [&](EdgeId e) { return part.in_pool(e, PoolRole::patch, i); });
    std::vector<std::uint8_t> excluded(part.small_vertex);
    for (Vertex v = 0; v < n; ++v) {
      if (used[i].contains(v)) excluded[v] = 1;
    }
    auto out = patch_cover(covers[i], i, edges, pool, usage, excluded, rng, p3, record.indices[i].phase3);
    if (auto* f = std::get_if<PhaseFailure>(&out)) {
      record.ms.phase3 = clock.lap();
      return detail::fail(record, *f);
    }
    auto& h = std::get<HamiltonCycle>(out);
    cert.cycles.push_back(std::move(h.order));
    cert.edges.push_back(std::move(h.edges));
  }
  record.ms.phase3 = clock.lap();

  const auto check = check_packing(d, cert);
  record.ms.verify = clock.lap();
  if (!check.valid) return detail::fail(record, {"verify", 0, check.reason});
  record.success = true;
  record.certificate = std::move(cert);
}

/// Full trial on a supplied digraph; the seed drives partition and phases.
inline TrialRecord run_trial_on(const SimpleDigraph& d, unsigned k, std::uint64_t seed,
                                const TrialConfig& config = {}) {
  TrialRecord record;
  record.seed = seed;
  record.params = ModelParams::from_edge_count(d.vertex_count(), d.edge_count(), k);
  detail::Stopwatch clock;
  Rng rng(seed);
  run_pipeline(d, record, rng, config, clock);
  return record;
}

/// Sample D from the model, then run the pipeline. Deterministic in
/// (params, seed, config) apart from the wall-clock fields.
inline TrialRecord run_trial(const ModelParams& params, std::uint64_t seed, const TrialConfig& config = {}) {
  TrialRecord record;
  record.seed = seed;
  record.params = params;
  detail::Stopwatch clock;
  Rng rng(seed);
  std::optional<SimpleDigraph> d;
  try {
    d = sample_simple_digraph(params, rng, config.method, &record.sampler);
  } catch (const Error& e) {
    record.ms.sample = clock.lap();
    detail::fail(record, {"sample", 0, e.what()});
    return record;
  }
  record.ms.sample = clock.lap();
  if (config.on_sample) config.on_sample(*d);
  run_pipeline(*d, record, rng, config, clock);
  return record;
}

inline nlohmann::ordered_json certificate_json(const PackingCertificate& cert) {
  nlohmann::ordered_json j;
  j["cycles"] = cert.cycles;
  j["edges"] = cert.edges;
  return j;
}

inline nlohmann::ordered_json trial_json(const TrialRecord& r, bool include_timing = true,
                                         bool include_certificate = false) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["seed"] = r.seed;
  j["params"] = {{"n", r.params.n}, {"m", r.params.m}, {"k", r.params.k}, {"c", r.params.c}, {"z", r.params.z}};
  j["outcome"] = r.success ? "success" : "failure";
  if (!r.success) {
    j["failed_phase"] = r.failed_phase;
    j["failed_index"] = r.failed_index;
    j["detail"] = r.detail;
  }
  j["sampler"] = {{"degree_attempts", r.sampler.degree_attempts},
                  {"pairings", r.sampler.pairings},
                  {"switches", r.sampler.switches}};
  j["small_vertices"] = r.small_vertices;
  j["small_edges"] = r.small_edges;
  auto indices = nlohmann::ordered_json::array();
  for (const auto& x : r.indices) {
    indices.push_back({{"boosters", x.boosters},
                       {"small_cycles", x.phase2.small_initial},
                       {"eliminated", x.phase2.eliminated},
                       {"phase2_attempts", x.phase2.attempts},
                       {"phase2_retries", x.phase2.retries},
                       {"early_closures", x.phase2.early_closures},
                       {"out_nodes", x.phase2.out_nodes},
                       {"in_nodes", x.phase2.in_nodes},
                       {"used_vertices", x.phase2.used_vertices},
                       {"min_cycle", x.phase2.min_cycle},
                       {"phase3_strategy", x.phase3.strategy},
                       {"kappa", x.phase3.kappa},
                       {"kappa_j", x.phase3.kappa_j},
                       {"search_nodes", x.phase3.search_nodes},
                       {"selections", x.phase3.selections},
                       {"aux_edges", x.phase3.aux_edges}});
  }
  j["indices"] = indices;
  if (include_timing) {
    j["ms"] = {{"sample", r.ms.sample},   {"partition", r.ms.partition}, {"phase1", r.ms.phase1},
               {"phase2", r.ms.phase2},   {"phase3", r.ms.phase3},       {"verify", r.ms.verify},
               {"total", r.ms.total()}};
  }
  if (include_certificate && r.certificate) j["certificate"] = certificate_json(*r.certificate);
  return j;
}

struct SweepCell {
  std::size_t n = 0;
  double c = 0;
  unsigned k = 1;
};

/// "n=2000,5000;c=50;k=1,2" -> the cartesian product, k varying fastest.
inline std::vector<SweepCell> parse_grid(const std::string& spec) {
  std::vector<std::size_t> ns;
  std::vector<double> cs;
  std::vector<unsigned> ks;
  std::stringstream groups(spec);
  std::string group;
  while (std::getline(groups, group, ';')) {
    const auto eq = group.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::invalid_input, "grid group without '=': " + group);
    const std::string key = group.substr(0, eq);
    std::stringstream values(group.substr(eq + 1));
    std::string value;
    while (std::getline(values, value, ',')) {
      try {
        std::size_t used = 0;
        if (key == "n") {
          ns.push_back(std::stoull(value, &used));
        } else if (key == "c") {
          cs.push_back(std::stod(value, &used));
        } else if (key == "k") {
          ks.push_back(static_cast<unsigned>(std::stoul(value, &used)));
        } else {
          throw Error(ErrorCode::invalid_input, "unknown grid key: " + key);
        }
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::invalid_input, "bad grid value: " + value);
      }
    }
  }
  if (ns.empty() || cs.empty() || ks.empty()) throw Error(ErrorCode::invalid_input, "grid needs n, c and k values");
  std::vector<SweepCell> cells;
  for (const auto n : ns) {
    for (const auto c : cs) {
      for (const auto k : ks) cells.push_back({n, c, k});
    }
  }
  return cells;
}

struct CellSummary {
  SweepCell cell;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::map<std::string, std::size_t> failures;
  std::vector<double> total_ms;  // per trial
  std::string error;             // parameters rejected before any trial ran
};

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t cell, std::size_t trial) {
  return derive_seed(derive_seed(base, cell), trial);
}

/// Every trial owns the stream trial_seed(base, cell, trial), and results are
/// written to fixed slots, so the summary does not depend on `workers`.
inline std::vector<CellSummary> run_sweep(const std::vector<SweepCell>& cells, std::size_t trials,
                                          std::uint64_t base_seed, unsigned workers, const TrialConfig& config = {}) {
  std::vector<CellSummary> summaries(cells.size());
  std::vector<std::optional<ModelParams>> params(cells.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    summaries[ci].cell = cells[ci];
    try {
      params[ci] = ModelParams::from_average_degree(cells[ci].n, cells[ci].c, cells[ci].k);
      summaries[ci].m = params[ci]->m;
    } catch (const Error& e) {
      summaries[ci].error = e.what();
    }
  }
  struct Slot {
    bool success = false;
    std::string phase;
    double ms = 0;
  };
  std::vector<Slot> slots(cells.size() * trials);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    TrialConfig local = config;
    local.trace = nullptr;
    local.on_sample = nullptr;
    local.on_partition = nullptr;
    local.on_matchings = nullptr;
    local.on_phase2 = nullptr;
    for (std::size_t t = next++; t < slots.size(); t = next++) {
      const std::size_t ci = t / trials, trial = t % trials;
      if (!params[ci]) continue;
      const auto r = run_trial(*params[ci], trial_seed(base_seed, ci, trial), local);
      slots[t] = {r.success, r.failed_phase, r.ms.total()};
    }
  };
  const unsigned count = std::max(1u, workers);
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < count; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    if (!params[ci]) continue;
    auto& s = summaries[ci];
    s.trials = trials;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const auto& slot = slots[ci * trials + trial];
      if (slot.success) ++s.successes;
      else ++s.failures[slot.phase];
      s.total_ms.push_back(slot.ms);
    }
  }
  return summaries;
}

inline const std::vector<std::string>& failure_tags() {
  static const std::vector<std::string> tags{"sample", "1", "2", "3-select", "3-search", "verify"};
  return tags;
}

inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()))) - 1;
  return values[std::min(idx, values.size() - 1)];
}

inline std::string sweep_csv(const std::vector<CellSummary>& summaries, bool include_timing = true) {
  std::ostringstream out;
  out << "n,c,k,m,trials,successes,rate";
  for (const auto& tag : failure_tags()) out << ",fail_" << tag;
  if (include_timing) out << ",p50_ms,p90_ms,max_ms";
  out << '\n';
  for (const auto& s : summaries) {
    const double rate = s.trials ? static_cast<double>(s.successes) / static_cast<double>(s.trials) : 0.0;
    out << s.cell.n << ',' << s.cell.c << ',' << s.cell.k << ',' << s.m << ',' << s.trials << ',' << s.successes << ','
        << rate;
    for (const auto& tag : failure_tags()) {
      const auto it = s.failures.find(tag);
      out << ',' << (it == s.failures.end() ? 0 : it->second);
    }
    if (include_timing) {
      out << ',' << percentile(s.total_ms, 0.5) << ',' << percentile(s.total_ms, 0.9) << ','
          << percentile(s.total_ms, 1.0);
    }
    out << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json sweep_json(const std::vector<CellSummary>& summaries, std::uint64_t seed,
                                         bool include_timing = true) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["seed"] = seed;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& s : summaries) {
    nlohmann::ordered_json c;
    c["n"] = s.cell.n;
    c["c"] = s.cell.c;
    c["k"] = s.cell.k;
    c["m"] = s.m;
    c["trials"] = s.trials;
    c["successes"] = s.successes;
    c["failures"] = s.failures;
    if (!s.error.empty()) c["error"] = s.error;
    if (include_timing) {
      c["p50_ms"] = percentile(s.total_ms, 0.5);
      c["p90_ms"] = percentile(s.total_ms, 0.9);
      c["max_ms"] = percentile(s.total_ms, 1.0);
    }
    cells.push_back(c);
  }
  j["cells"] = cells;
  return j;
}

}  // namespace hampack
