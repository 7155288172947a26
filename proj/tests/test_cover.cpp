#include <gtest/gtest.h>

#include "hampack/cover.hpp"
#include "hampack/matching.hpp"
#include "hampack/model.hpp"

using namespace hampack;
using detail::NpdOps;
using detail::StepResult;

namespace {

std::vector<Vertex> flatten(const NpdOps& ops, const detail::SegmentList& list) {
  std::vector<Vertex> out;
  for (std::size_t t = 0; t < NpdOps::length(list); ++t) out.push_back(ops.vertex_at(list, t));
  return out;
}

PermutationDigraph ring(std::size_t n) {
  std::vector<Vertex> succ(n);
  for (Vertex v = 0; v < n; ++v) succ[v] = static_cast<Vertex>((v + 1) % n);
  return PermutationDigraph(succ);
}

}  // namespace

TEST(Budget, Presets) {
  const auto desk = Phase2Budget::desk(10000);
  EXPECT_EQ(desk.nu, 50u);
  EXPECT_EQ(desk.w_cap, 7500u);
  const auto asym = Phase2Budget::asymptotic(10000);
  EXPECT_EQ(asym.nu, static_cast<std::size_t>(std::ceil(100 * std::log(10000.0))));
  EXPECT_EQ(asym.w_cap, 1000u);
}

TEST(UsedVertices, LevelStamps) {
  UsedVertices w(5);
  w.add(1);
  EXPECT_TRUE(w.contains(1));
  EXPECT_TRUE(w.usable(1));  // joined during the current level
  w.begin_level();
  EXPECT_FALSE(w.usable(1));
  EXPECT_TRUE(w.usable(2));
  w.add(2);
  w.add(2);
  EXPECT_EQ(w.size(), 2u);
}

TEST(Npd, InitialPathIsTheBrokenCycle) {
  const auto root = ring(10);
  const NpdOps ops(root, 3.0);
  const auto u = ops.initial(9);
  EXPECT_EQ(flatten(ops, u.path), (std::vector<Vertex>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_TRUE(u.created.empty());
}

TEST(Npd, OutStepSplitsPathAndReabsorbsCycle) {
  const auto root = ring(10);
  const NpdOps ops(root, 3.0);
  const auto u = ops.initial(9);
  detail::Npd a, b;
  // Add (9,5), delete (4,5): path 0..4, new cycle 5..9.
  ASSERT_EQ(ops.out_step(u, 5, a), StepResult::accepted);
  EXPECT_EQ(flatten(ops, a.path), (std::vector<Vertex>{0, 1, 2, 3, 4}));
  ASSERT_EQ(a.created.size(), 1u);
  EXPECT_EQ(flatten(ops, a.created[0]), (std::vector<Vertex>{5, 6, 7, 8, 9}));
  // Add (4,7), delete (6,7): the created cycle is opened at 7 and appended.
  ASSERT_EQ(ops.out_step(a, 7, b), StepResult::accepted);
  EXPECT_EQ(flatten(ops, b.path), (std::vector<Vertex>{0, 1, 2, 3, 4, 7, 8, 9, 5, 6}));
  EXPECT_TRUE(b.created.empty());
}

TEST(Npd, OutStepEnforcesLengthsAndDetectsClosure) {
  const auto root = ring(10);
  const NpdOps ops(root, 3.0);
  const auto u = ops.initial(9);
  detail::Npd next;
  EXPECT_EQ(ops.out_step(u, 1, next), StepResult::rejected);  // path would have length 1
  EXPECT_EQ(ops.out_step(u, 8, next), StepResult::rejected);  // cycle 8,9 too short
  EXPECT_EQ(ops.out_step(u, 0, next), StepResult::closes);
  const NpdOps strict(root, 11.0);
  EXPECT_EQ(strict.out_step(u, 0, next), StepResult::rejected);
}

TEST(Npd, OutStepIntoUntouchedCycle) {
  // Two root cycles 0..5 and 6..11. Break (5,0) and step to 8: path
  // 0..5 then 8,9,10,11,6,7.
  std::vector<Vertex> succ{1, 2, 3, 4, 5, 0, 7, 8, 9, 10, 11, 6};
  const PermutationDigraph root(succ);
  const NpdOps ops(root, 3.0);
  const auto u = ops.initial(5);
  detail::Npd next;
  ASSERT_EQ(ops.out_step(u, 8, next), StepResult::accepted);
  EXPECT_EQ(flatten(ops, next.path), (std::vector<Vertex>{0, 1, 2, 3, 4, 5, 8, 9, 10, 11, 6, 7}));
  EXPECT_EQ(next.path_length, 12u);
}

TEST(Npd, InStepMovesThePathStart) {
  const auto root = ring(10);
  const NpdOps ops(root, 3.0);
  const auto u = ops.initial(9);
  detail::Npd next;
  // Add (4,0), delete (4,5): path 5..9, cycle 0..4.
  ASSERT_EQ(ops.in_step(u, 4, next), StepResult::accepted);
  EXPECT_EQ(flatten(ops, next.path), (std::vector<Vertex>{5, 6, 7, 8, 9}));
  ASSERT_EQ(next.created.size(), 1u);
  EXPECT_EQ(flatten(ops, next.created[0]), (std::vector<Vertex>{0, 1, 2, 3, 4}));
  EXPECT_EQ(ops.in_step(u, 9, next), StepResult::closes);
  EXPECT_EQ(ops.in_step(u, 0, next), StepResult::rejected);
}

TEST(Phase2, RemovesAllSmallCyclesAndKeepsCoverConsistent) {
  const auto params = ModelParams::from_average_degree(4000, 40.0, 1);
  int successes = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Rng rng(seed);
    const auto d = sample_simple_digraph(params, rng);
    const std::span<const Edge> edges(d.edges());
    const auto part = make_partition(d.vertex_count(), edges, 1, params.c, rng);
    EdgeUsage usage(edges.size());
    auto p1 = build_k_matchings(d.vertex_count(), edges, part, usage, rng);
    ASSERT_TRUE(succeeded(p1));
    auto cover = matching_to_cycle_cover(std::get<Phase1Result>(p1).matchings[0]);
    const PoolAdjacency pool(d.vertex_count(), edges,
                             [&](EdgeId e) { return part.in_working_set(e, PoolRole::rotation, 0); });
    UsedVertices used(d.vertex_count());
    Phase2Options opts;
    opts.budget = Phase2Budget::desk(d.vertex_count());
    opts.alpha = 5;
    Phase2Stats stats;
    auto out = eliminate_small_cycles(cover, 0, edges, pool, usage, used, rng, opts, stats);
    if (!succeeded(out)) {
      EXPECT_EQ(std::get<PhaseFailure>(out).phase, "2");
      continue;
    }
    ++successes;
    const auto& result = std::get<CycleCover>(out);
    const double n0 = min_cycle_length_target(d.vertex_count());
    EXPECT_GE(static_cast<double>(result.pd.min_cycle_length()), n0);
    // A swap can swallow further small cycles, so there may be fewer swaps.
    EXPECT_GE(stats.eliminated, stats.small_initial > 0 ? 1u : 0u);
    EXPECT_LE(stats.eliminated, stats.small_initial);
    EXPECT_LE(used.size(), opts.budget.w_cap);
    std::size_t owned = 0;
    for (EdgeId e = 0; e < edges.size(); ++e) owned += usage.owner(e) == 0;
    EXPECT_EQ(owned, d.vertex_count());
    for (Vertex v = 0; v < d.vertex_count(); ++v) {
      const EdgeId e = result.edge_of[v];
      EXPECT_EQ(edges[e].tail, v);
      EXPECT_EQ(edges[e].head, result.pd.succ(v));
      EXPECT_EQ(usage.owner(e), 0);
    }
  }
  EXPECT_GE(successes, 3);
}

TEST(Phase2, CoverWithoutSmallCyclesIsUntouched) {
  const auto root = ring(50);
  std::vector<Edge> edges;
  std::vector<EdgeId> edge_of(50);
  for (Vertex v = 0; v < 50; ++v) {
    edge_of[v] = v;
    edges.push_back({v, static_cast<Vertex>((v + 1) % 50)});
  }
  EdgeUsage usage(edges.size());
  UsedVertices used(50);
  Rng rng(1);
  Phase2Stats stats;
  const PoolAdjacency pool(50, edges, [](EdgeId) { return false; });
  auto out = eliminate_small_cycles({root, edge_of}, 0, edges, pool, usage, used, rng, {}, stats);
  ASSERT_TRUE(succeeded(out));
  EXPECT_EQ(stats.attempts, 0u);
  EXPECT_EQ(std::get<CycleCover>(out).pd.successors(), root.successors());
}

TEST(Phase2, EmptyPoolFailsWithPhaseTag) {
  // Ring of 40 plus a 2-cycle; n0 = 42 / ln 42 ~ 11.2, so the 2-cycle is small.
  std::vector<Vertex> succ(42);
  for (Vertex v = 0; v < 40; ++v) succ[v] = (v + 1) % 40;
  succ[40] = 41;
  succ[41] = 40;
  std::vector<Edge> edges;
  std::vector<EdgeId> edge_of(42);
  for (Vertex v = 0; v < 42; ++v) {
    edge_of[v] = v;
    edges.push_back({v, succ[v]});
  }
  EdgeUsage usage(edges.size());
  UsedVertices used(42);
  Rng rng(1);
  Phase2Options opts;
  opts.budget = {4, 40};
  Phase2Stats stats;
  const PoolAdjacency pool(42, edges, [](EdgeId) { return false; });
  auto out = eliminate_small_cycles({PermutationDigraph(succ), edge_of}, 0, edges, pool, usage, used, rng, opts, stats);
  ASSERT_FALSE(succeeded(out));
  EXPECT_EQ(std::get<PhaseFailure>(out).phase, "2");
  EXPECT_EQ(stats.attempts, 1u);  // length-2 cycles get a single attempt
}
