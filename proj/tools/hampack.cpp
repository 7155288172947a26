// hampack: sample random digraphs, pack Hamilton cycles, run sweeps and the
// statistical checks. Exit codes: 0 ok, 2 trial failed, 64 usage.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hampack/hampack.hpp"

namespace {

using nlohmann::ordered_json;
using namespace hampack;

constexpr int kExitFailure = 2;
constexpr int kExitUsage = 64;

void setup_logging(bool trace) {
  auto logger = spdlog::stderr_color_mt("hampack");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("HAMPACK_LOG")) spdlog::set_level(spdlog::level::from_str(env));
  if (trace) spdlog::set_level(spdlog::level::debug);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + path);
  out << text;
}

SimpleDigraph load_digraph(const std::string& path, unsigned* k_in_file = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot read " + path);
  auto file = read_edge_list(in);
  if (k_in_file) *k_in_file = file.k;
  return std::move(file.digraph);
}

struct GraphArgs {
  std::size_t n = 5000;
  double c = 50;
  unsigned k = 1;
  std::uint64_t seed = 1;
};

void add_graph_args(CLI::App* cmd, GraphArgs& g) {
  cmd->add_option("--n", g.n, "vertices")->capture_default_str();
  cmd->add_option("--c", g.c, "average out-degree m/n (c*n must be an integer)")->capture_default_str();
  cmd->add_option("--k", g.k, "number of Hamilton cycles")->capture_default_str();
  cmd->add_option("--seed", g.seed, "seed")->capture_default_str();
}

ordered_json partition_json(const EdgePartition& part) {
  ordered_json j;
  j["k"] = part.k;
  auto pools = ordered_json::array();
  std::vector<std::size_t> counts(4 * part.k, 0);
  for (const auto l : part.label) ++counts[l];
  for (unsigned r = 0; r < 4; ++r) {
    for (unsigned i = 0; i < part.k; ++i) {
      pools.push_back({{"role", to_string(static_cast<PoolRole>(r))}, {"index", i}, {"edges", counts[r * part.k + i]}});
    }
  }
  j["pools"] = pools;
  j["small"] = part.small;
  j["e_small"] = part.e_small.size();
  j["labels"] = part.label;
  return j;
}

ordered_json matchings_json(const Phase1Result& result) {
  auto arr = ordered_json::array();
  for (std::size_t i = 0; i < result.matchings.size(); ++i) {
    const auto& m = result.matchings[i];
    arr.push_back({{"index", i}, {"boosters", result.boosters[i]}, {"succ", m.left_mate}, {"edges", m.left_edge}});
  }
  return arr;
}

int cmd_sample(const GraphArgs& g, const std::string& out, const std::string& method) {
  const auto params = ModelParams::from_average_degree(g.n, g.c, g.k);
  Rng rng(g.seed);
  SampleReport report;
  const auto d = sample_simple_digraph(
      params, rng, method == "rejection" ? SimplicityMethod::rejection : SimplicityMethod::switching, &report);
  write_file(out, edge_list_text(d, g.k));
  ordered_json j;
  j["schema"] = 1;
  j["n"] = params.n;
  j["m"] = params.m;
  j["k"] = params.k;
  j["z"] = params.z;
  j["degree_attempts"] = report.degree_attempts;
  j["pairings"] = report.pairings;
  j["switches"] = report.switches;
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct PackArgs {
  GraphArgs g;
  std::string in, cert_out, dump_dir, tau_mode = "any", budget = "desk";
  bool no_timing = false;
};

int cmd_pack(const PackArgs& a, bool k_given) {
  TrialConfig config;
  config.tau_mode = a.tau_mode == "rphi" ? TauMode::restrict_rphi : TauMode::any;
  config.budget = a.budget == "asymptotic" ? BudgetPreset::asymptotic : BudgetPreset::desk;
  config.trace = [](const std::string& line) { spdlog::debug("{}", line); };
  const std::filesystem::path dir = a.dump_dir;
  if (!a.dump_dir.empty()) {
    std::filesystem::create_directories(dir);
    config.on_partition = [&](const EdgePartition& part) {
      write_file((dir / "partition.json").string(), partition_json(part).dump() + "\n");
    };
    config.on_matchings = [&](const Phase1Result& r) {
      write_file((dir / "matchings.json").string(), matchings_json(r).dump() + "\n");
    };
  }

  TrialRecord record;
  if (!a.in.empty()) {
    unsigned k_file = 1;
    const auto d = load_digraph(a.in, &k_file);
    record = run_trial_on(d, k_given ? a.g.k : k_file, a.g.seed, config);
  } else {
    const auto params = ModelParams::from_average_degree(a.g.n, a.g.c, a.g.k);
    if (!a.dump_dir.empty()) {
      config.on_sample = [&](const SimpleDigraph& d) { write_file((dir / "digraph.txt").string(), edge_list_text(d, a.g.k)); };
    }
    record = run_trial(params, a.g.seed, config);
  }
  if (record.success) {
    if (!a.cert_out.empty()) write_file(a.cert_out, certificate_json(*record.certificate).dump() + "\n");
    if (!a.dump_dir.empty()) {
      std::ofstream out(dir / "cycles.txt");
      for (const auto& cycle : record.certificate->cycles) {
        for (std::size_t t = 0; t < cycle.size(); ++t) out << (t ? " " : "") << cycle[t];
        out << '\n';
      }
    }
  } else {
    spdlog::warn("phase {} failed at index {}: {}", record.failed_phase, record.failed_index, record.detail);
  }
  std::cout << trial_json(record, !a.no_timing).dump(2) << '\n';
  return record.success ? 0 : kExitFailure;
}

struct SweepArgs {
  std::string grid, out;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool no_timing = false;
};

int cmd_sweep(const SweepArgs& a) {
  const auto cells = parse_grid(a.grid);
  const unsigned workers = a.workers ? a.workers : std::max(1u, std::thread::hardware_concurrency());
  spdlog::info("{} cells x {} trials on {} workers", cells.size(), a.trials, workers);
  const auto summaries = run_sweep(cells, a.trials, a.seed, workers);
  const std::string csv = sweep_csv(summaries, !a.no_timing);
  if (a.out.empty() || a.out == "-") {
    std::cout << csv;
  } else {
    write_file(a.out, csv);
    const auto json_path = std::filesystem::path(a.out).replace_extension(".json");
    write_file(json_path.string(), sweep_json(summaries, a.seed, !a.no_timing).dump(2) + "\n");
  }
  return 0;
}

int cmd_oracle(const std::string& in, unsigned k) {
  const auto d = load_digraph(in);
  const auto cert = brute_force_packing(d, k);
  ordered_json j;
  j["schema"] = 1;
  j["n"] = d.vertex_count();
  j["k"] = k;
  j["found"] = cert.has_value();
  if (cert) {
    j["valid"] = verify_packing(d, *cert);
    j["certificate"] = certificate_json(*cert);
  }
  std::cout << j.dump(2) << '\n';
  return cert ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-disjoint Hamilton cycles in random digraphs with minimum degree k+1"};
  app.require_subcommand(1);
  app.footer(
      "Sweep CSV columns: n,c,k,m,trials,successes,rate,fail_<phase>... for phases "
      "sample,1,2,3-select,3-search,verify, then p50_ms,p90_ms,max_ms unless --no-timing.\n"
      "HAMPACK_LOG=trace|debug|info|warn|error|off sets the log level (stderr).");
  bool trace = false;

  GraphArgs sample_args;
  std::string sample_out, sample_method = "switching";
  auto* sample = app.add_subcommand("sample", "sample a simple digraph and write it as an edge list");
  add_graph_args(sample, sample_args);
  sample->add_option("--out", sample_out, "edge-list file")->required();
  sample->add_option("--method", sample_method, "switching or rejection")
      ->check(CLI::IsMember({"switching", "rejection"}))
      ->capture_default_str();

  PackArgs pack_args;
  auto* pack = app.add_subcommand("pack", "find k edge-disjoint Hamilton cycles");
  add_graph_args(pack, pack_args.g);
  auto* pack_k = pack->get_option("--k");
  pack->add_option("--in", pack_args.in, "edge-list file instead of sampling");
  pack->add_option("--tau-mode", pack_args.tau_mode, "any or rphi")->check(CLI::IsMember({"any", "rphi"}));
  pack->add_option("--budget", pack_args.budget, "desk or asymptotic")->check(CLI::IsMember({"desk", "asymptotic"}));
  pack->add_option("--cert-out", pack_args.cert_out, "write the packing certificate here");
  pack->add_option("--dump-dir", pack_args.dump_dir, "write digraph, partition, matchings and cycles here");
  pack->add_flag("--trace", trace, "log each small-cycle elimination");
  pack->add_flag("--no-timing", pack_args.no_timing, "omit wall-clock fields");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "success rates over a parameter grid");
  sweep->add_option("--grid", sweep_args.grid, "e.g. \"n=2000,5000;c=50,100;k=1,2\"")->required();
  sweep->add_option("--trials", sweep_args.trials, "trials per cell")->capture_default_str();
  sweep->add_option("--seed", sweep_args.seed, "seed base")->capture_default_str();
  sweep->add_option("--workers", sweep_args.workers, "threads (0: hardware)")->capture_default_str();
  sweep->add_option("--out", sweep_args.out, "CSV file (a .json summary is written next to it); - for stdout");
  sweep->add_flag("--no-timing", sweep_args.no_timing, "omit timing percentiles");

  std::string oracle_in;
  unsigned oracle_k = 1;
  auto* oracle = app.add_subcommand("oracle", "exhaustive packing search, n <= 9");
  oracle->add_option("--in", oracle_in, "edge-list file")->required();
  oracle->add_option("--k", oracle_k, "cycles")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "statistical diagnostics");
  stats->require_subcommand(1);
  GraphArgs sg{10000, 20, 1, 1};
  std::size_t attempts = 500, samples = 10000, kappa = 5, perm_n = 10000;
  bool exhaustive = false;
  auto* simp = stats->add_subcommand("simplicity-rate", "fraction of simple pairings vs the predicted rate");
  add_graph_args(simp, sg);
  simp->add_option("--attempts", attempts)->capture_default_str();
  auto* rphi = stats->add_subcommand("rphi", "|R_phi| per odd cycle type with (kappa-2)! and (kappa-1)! bounds");
  rphi->add_option("--kappa", kappa)->capture_default_str();
  rphi->add_flag("--exhaustive", exhaustive, "every phi, not one per cycle type");
  auto* perm = stats->add_subcommand("perm-cycles", "cycle statistics of uniform random permutations");
  perm->add_option("--n", perm_n)->capture_default_str();
  perm->add_option("--samples", samples)->capture_default_str();
  perm->add_option("--seed", sg.seed)->capture_default_str();
  auto* census = stats->add_subcommand("census", "joint (in, out) degree counts vs expectation");
  add_graph_args(census, sg);
  auto* expansion = stats->add_subcommand("expansion", "degree sums of random vertex sets");
  add_graph_args(expansion, sg);
  expansion->add_option("--samples", samples)->capture_default_str();
  auto* small = stats->add_subcommand("small-fraction", "size of SMALL over sampled digraphs");
  add_graph_args(small, sg);
  small->add_option("--samples", samples, "digraphs")->capture_default_str();
  auto* gof = stats->add_subcommand("gof", "chi-square fit of the out-degree histogram");
  add_graph_args(gof, sg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  setup_logging(trace);

  try {
    if (*sample) return cmd_sample(sample_args, sample_out, sample_method);
    if (*pack) return cmd_pack(pack_args, pack_k->count() > 0);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*oracle) return cmd_oracle(oracle_in, oracle_k);

    Rng rng(sg.seed);
    ordered_json j;
    j["schema"] = 1;
    if (*simp) {
      const auto params = ModelParams::from_average_degree(sg.n, sg.c, sg.k);
      const auto r = simplicity_rate(params, attempts, rng);
      j["attempts"] = r.attempts;
      j["simple"] = r.simple;
      j["rate"] = r.rate();
      j["predicted"] = r.predicted;
      j["moment_predicted"] = r.moment_predicted;
      j["mean_loops"] = r.mean_loops;
      j["mean_repeated"] = r.mean_repeated;
    } else if (*rphi) {
      std::cout << "type,permutations,min,max,lower,upper\n";
      for (const auto& row : r_phi_table(kappa, exhaustive)) {
        std::string type;
        for (const auto part : row.type) type += (type.empty() ? "" : "+") + std::to_string(part);
        std::cout << type << ',' << row.permutations << ',' << row.min_count << ',' << row.max_count << ','
                  << row.lower << ',' << row.upper << '\n';
      }
      return 0;
    } else if (*perm) {
      const auto s = permutation_cycle_stats(perm_n, samples, rng);
      j["n"] = s.n;
      j["samples"] = s.samples;
      j["mean_vertices_on_cycles_le_10"] = s.mean_short_vertices;
      j["se_vertices_on_cycles_le_10"] = s.se_short_vertices;
      j["mean_cycles_le_3"] = s.mean_tiny_cycles;
      j["se_cycles_le_3"] = s.se_tiny_cycles;
      j["fraction_at_most_2_ln_n_cycles"] = s.fraction_few_cycles;
      j["mean_cycles"] = s.mean_cycles;
    } else {
      const auto params = ModelParams::from_average_degree(sg.n, sg.c, sg.k);
      if (*census) {
        const auto d = sample_simple_digraph(params, rng);
        const auto report = degree_census(d.vertex_count(), d.edges(), params);
        std::cout << "in,out,observed,expected,deviation\n";
        for (const auto& cell : report.cells) {
          std::cout << cell.in << ',' << cell.out << ',' << cell.observed << ',' << cell.expected << ','
                    << cell.deviation << '\n';
        }
        spdlog::info("max deviation {}", report.max_deviation);
        return 0;
      } else if (*expansion) {
        const auto d = sample_simple_digraph(params, rng);
        const auto report = expansion_check(d, params, samples, rng);
        j["eta"] = report.eta;
        j["samples"] = report.samples.size();
        j["violations"] = report.violations;
      } else if (*small) {
        double total = 0, worst = 0;
        for (std::size_t t = 0; t < samples; ++t) {
          const auto d = sample_simple_digraph(params, rng);
          const auto part = make_partition(d.vertex_count(), d.edges(), params.k, params.c, rng);
          const double f = static_cast<double>(part.small.size()) / static_cast<double>(params.n);
          total += f;
          worst = std::max(worst, f);
        }
        j["samples"] = samples;
        j["mean_fraction"] = samples ? total / static_cast<double>(samples) : 0.0;
        j["max_fraction"] = worst;
      } else if (*gof) {
        const auto d = sample_simple_digraph(params, rng);
        std::vector<std::uint32_t> out(d.vertex_count());
        for (Vertex v = 0; v < d.vertex_count(); ++v) out[v] = static_cast<std::uint32_t>(d.out_degree(v));
        const auto chi = chi_square_gof(out, TruncatedPoisson(params.z, params.k));
        j["statistic"] = chi.statistic;
        j["dof"] = chi.dof;
        j["p_value"] = chi.p_value;
      }
    }
    std::cout << j.dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::invalid_input || e.code() == ErrorCode::infeasible_average_degree ||
                   e.code() == ErrorCode::refused
               ? kExitUsage
               : 1;
  }
}
