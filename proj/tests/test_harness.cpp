#include <gtest/gtest.h>

#include "hampack/harness.hpp"
#include "hampack/stats.hpp"

using namespace hampack;

TEST(Trial, SuccessCarriesVerifyingCertificate) {
  const auto params = ModelParams::from_average_degree(3000, 50.0, 1);
  const auto r = run_trial(params, 1);
  ASSERT_TRUE(r.success) << r.failed_phase << ": " << r.detail;
  ASSERT_TRUE(r.certificate);
  const auto& h = r.certificate->cycles.front();
  EXPECT_EQ(h.size(), 3000u);
  EXPECT_EQ(r.indices.size(), 1u);
}

TEST(Trial, ObserversSeeEachStage) {
  const auto params = ModelParams::from_average_degree(2000, 60.0, 2);
  TrialConfig config;
  std::optional<SimpleDigraph> seen;
  int partitions = 0, matchings = 0;
  std::vector<std::size_t> min_cycles;
  config.on_sample = [&](const SimpleDigraph& d) { seen = d; };
  config.on_partition = [&](const EdgePartition&) { ++partitions; };
  config.on_matchings = [&](const Phase1Result& m) { matchings += static_cast<int>(m.matchings.size()); };
  config.on_phase2 = [&](unsigned, const CycleCover& c) { min_cycles.push_back(c.pd.min_cycle_length()); };
  const auto r = run_trial(params, 4, config);
  ASSERT_TRUE(seen);
  EXPECT_EQ(partitions, 1);
  EXPECT_EQ(matchings, 2);
  for (const auto len : min_cycles) EXPECT_GE(static_cast<double>(len), min_cycle_length_target(2000));
  if (r.success) {
    EXPECT_TRUE(verify_packing(*seen, *r.certificate));
    EXPECT_EQ(min_cycles.size(), 2u);
  }
}

TEST(Trial, SuppliedDigraphMatchesSampledOne) {
  // run_trial_on uses the seed for everything after sampling, so the same
  // digraph and seed reproduce the record.
  const auto params = ModelParams::from_average_degree(1500, 40.0, 1);
  Rng rng(9);
  const auto d = sample_simple_digraph(params, rng);
  const auto a = run_trial_on(d, 1, 77);
  const auto b = run_trial_on(d, 1, 77);
  EXPECT_EQ(trial_json(a, false, true).dump(), trial_json(b, false, true).dump());
  EXPECT_EQ(a.params.m, params.m);
}

TEST(Trial, DeterministicRecords) {
  const auto params = ModelParams::from_average_degree(2000, 40.0, 1);
  const auto a = trial_json(run_trial(params, 12), false, true).dump();
  const auto b = trial_json(run_trial(params, 12), false, true).dump();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, trial_json(run_trial(params, 13), false, true).dump());
}

TEST(Trial, SamplerFailureIsTagged) {
  const auto params = ModelParams::from_average_degree(300, 40.0, 1);
  TrialConfig config;
  config.method = SimplicityMethod::rejection;
  const auto r = run_trial(params, 1, config);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.failed_phase, "sample");
  EXPECT_NE(trial_json(r).dump().find("rejection stall"), std::string::npos);
}

TEST(Sweep, GridParsing) {
  const auto cells = parse_grid("n=1000,2000;c=20;k=1,2");
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[1].n, 1000u);
  EXPECT_EQ(cells[1].k, 2u);
  EXPECT_EQ(cells[3].n, 2000u);
  EXPECT_THROW(parse_grid("n=1000;c=20"), Error);
  EXPECT_THROW(parse_grid("n=10x;c=20;k=1"), Error);
  EXPECT_THROW(parse_grid("q=1;n=5;c=3;k=1"), Error);
}

TEST(Sweep, WorkerCountDoesNotChangeSummary) {
  const auto cells = parse_grid("n=1000;c=30,40;k=1");
  const auto one = run_sweep(cells, 4, 5, 1);
  const auto three = run_sweep(cells, 4, 5, 3);
  EXPECT_EQ(sweep_csv(one, false), sweep_csv(three, false));
  EXPECT_EQ(sweep_json(one, 5, false).dump(), sweep_json(three, 5, false).dump());
  std::size_t total = 0;
  for (const auto& s : one) {
    total += s.successes;
    for (const auto& [tag, count] : s.failures) total += count;
  }
  EXPECT_EQ(total, 8u);
}

TEST(Sweep, InfeasibleCellIsReportedNotThrown) {
  const auto s = run_sweep(parse_grid("n=100;c=1.5;k=1"), 2, 1, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_FALSE(s[0].error.empty());
  EXPECT_EQ(s[0].trials, 0u);
}

TEST(Sweep, Percentile) {
  EXPECT_EQ(percentile({}, 0.5), 0.0);
  EXPECT_EQ(percentile({4, 1, 3, 2}, 0.5), 2.0);
  EXPECT_EQ(percentile({4, 1, 3, 2}, 1.0), 4.0);
}

TEST(Stats, ChiSquareAcceptsOwnLawAndRejectsShiftedOne) {
  const TruncatedPoisson law(solve_z(8.0, 1), 1), other(solve_z(9.0, 1), 1);
  Rng rng(1);
  std::vector<std::uint32_t> values(20000);
  for (auto& v : values) v = law.sample(rng);
  const auto good = chi_square_gof(values, law);
  EXPECT_GT(good.p_value, 1e-4);
  for (const double e : good.expected) EXPECT_GE(e, 5.0);
  EXPECT_LT(chi_square_gof(values, other).p_value, 1e-6);
}

TEST(Stats, PermutationCycleMeans) {
  Rng rng(3);
  const auto s = permutation_cycle_stats(500, 4000, rng);
  EXPECT_NEAR(s.mean_short_vertices, 10.0, 4 * s.se_short_vertices);
  EXPECT_NEAR(s.mean_tiny_cycles, 11.0 / 6.0, 4 * s.se_tiny_cycles);
  // Harmonic number H_500 ~ 6.79.
  EXPECT_NEAR(s.mean_cycles, 6.79, 0.15);
}

TEST(Stats, RPhiTableWithinFactorialBounds) {
  for (const std::size_t kappa : {3u, 5u}) {
    for (const auto& row : r_phi_table(kappa, true)) {
      EXPECT_GT(row.permutations, 0u);
      EXPECT_GE(row.min_count, row.lower);
      EXPECT_LE(row.max_count, row.upper);
    }
  }
}

TEST(Stats, SimplicityRateCountsDefects) {
  // About 2% of pairings are simple here, so 600 attempts see some of each.
  const auto params = ModelParams::from_average_degree(500, 2.5, 1);
  Rng rng(5);
  const auto r = simplicity_rate(params, 600, rng);
  EXPECT_EQ(r.attempts, 600u);
  EXPECT_GT(r.mean_loops, 0.0);
  EXPECT_GT(r.rate(), 0.0);
  EXPECT_LT(r.rate(), 1.0);
}
