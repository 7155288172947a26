#include <gtest/gtest.h>

#include <set>

#include "hampack/model.hpp"
#include "hampack/partition.hpp"

using namespace hampack;

TEST(Partition, EveryEdgeHasExactlyOneLabel) {
  for (const unsigned k : {1u, 2u, 3u}) {
    Rng rng(k);
    const auto part = split_edges(10000, k, rng);
    ASSERT_EQ(part.label.size(), 10000u);
    std::set<EdgeId> seen;
    std::size_t total = 0;
    for (unsigned r = 0; r < 4; ++r) {
      for (unsigned i = 0; i < k; ++i) {
        const auto pool = part.pool(static_cast<PoolRole>(r), i);
        total += pool.size();
        for (const auto e : pool) {
          EXPECT_TRUE(seen.insert(e).second);
          EXPECT_EQ(part.role(e), static_cast<PoolRole>(r));
          EXPECT_EQ(part.index(e), i);
        }
      }
    }
    EXPECT_EQ(total, 10000u);
  }
}

TEST(Partition, PoolSizesNearQuarterOverK) {
  const std::size_t m = 200000;
  const unsigned k = 2;
  Rng rng(5);
  const auto part = split_edges(m, k, rng);
  const double p = 1.0 / (4.0 * k);
  const double sd_reserved = std::sqrt(m * p * (1 - p));
  const double sd_patch = std::sqrt(m * 0.25 * 0.75) / k + 1;
  for (unsigned r = 0; r < 4; ++r) {
    for (unsigned i = 0; i < k; ++i) {
      const double size = static_cast<double>(part.pool(static_cast<PoolRole>(r), i).size());
      EXPECT_NEAR(size, m * p, 4 * (r < 3 ? sd_reserved : sd_patch));
    }
  }
}

TEST(Partition, PatchPartsDifferByAtMostOne) {
  Rng rng(8);
  const auto part = split_edges(9999, 3, rng);
  std::vector<std::size_t> sizes;
  for (unsigned i = 0; i < 3; ++i) sizes.push_back(part.pool(PoolRole::patch, i).size());
  EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
}

TEST(Partition, SmallSetMatchesNaiveRecount) {
  const auto params = ModelParams::from_average_degree(3000, 16.0, 2);
  Rng rng(21);
  const auto d = sample_simple_digraph(params, rng);
  const auto part = make_partition(d.vertex_count(), d.edges(), 2, params.c, rng);
  const double threshold = params.c / 16.0;
  std::size_t small_count = 0;
  for (Vertex v = 0; v < d.vertex_count(); ++v) {
    bool small = d.out_degree(v) <= threshold || d.in_degree(v) <= threshold;
    for (std::uint32_t l = 0; l < 6; ++l) {
      std::size_t out = 0, in = 0;
      for (const auto e : d.out_edges(v)) out += part.label[e] == l;
      for (const auto e : d.in_edges(v)) in += part.label[e] == l;
      small = small || out <= threshold || in <= threshold;
    }
    EXPECT_EQ(part.small_vertex[v] != 0, small) << v;
    small_count += small;
  }
  EXPECT_EQ(part.small.size(), small_count);
  for (EdgeId e = 0; e < d.edge_count(); ++e) {
    const bool touches = part.small_vertex[d.edge(e).tail] || part.small_vertex[d.edge(e).head];
    EXPECT_EQ(part.small_edge[e] != 0, touches);
  }
  EXPECT_TRUE(std::is_sorted(part.e_small.begin(), part.e_small.end()));
}

TEST(Partition, WorkingSetAddsSmallEdges) {
  Rng rng(1);
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 0}, {0, 2}};
  auto part = split_edges(edges.size(), 1, rng);
  part.small_edge = {1, 0, 0, 0};
  for (EdgeId e = 0; e < 4; ++e) {
    EXPECT_EQ(part.in_working_set(e, PoolRole::rotation, 0), part.in_pool(e, PoolRole::rotation, 0) || e == 0);
  }
}

TEST(EdgeUsage, TakeTwiceIsAContractViolation) {
  EdgeUsage usage(3);
  usage.take(1, 0);
  EXPECT_FALSE(usage.free(1));
  EXPECT_EQ(usage.owner(1), 0);
  EXPECT_THROW(usage.take(1, 1), Error);
  usage.release(1);
  EXPECT_TRUE(usage.free(1));
  EXPECT_NO_THROW(usage.take(1, 1));
}

TEST(PoolAdjacency, ListsSelectedEdgesInIndexOrder) {
  const std::vector<Edge> edges{{0, 1}, {0, 2}, {2, 1}, {0, 3}, {3, 1}};
  const PoolAdjacency pool(4, edges, [](EdgeId e) { return e != 1; });
  EXPECT_EQ(pool.edge_count(), 4u);
  EXPECT_EQ(std::vector<EdgeId>(pool.out(0).begin(), pool.out(0).end()), (std::vector<EdgeId>{0, 3}));
  EXPECT_EQ(std::vector<EdgeId>(pool.in(1).begin(), pool.in(1).end()), (std::vector<EdgeId>{0, 2, 4}));
  EXPECT_TRUE(pool.out(1).empty());
}
