#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "hampack/digraph.hpp"
#include "hampack/rng.hpp"

using namespace hampack;

TEST(Rng, SameSeedSameStream) {
  Rng a(123), b(123), c(124);
  bool differs = false;
  for (int t = 0; t < 100; ++t) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BelowStaysInRangeAndIsRoughlyUniform) {
  Rng rng(1);
  std::vector<int> counts(7, 0);
  for (int t = 0; t < 70000; ++t) {
    const auto x = rng.below(7);
    ASSERT_LT(x, 7u);
    ++counts[x];
  }
  for (const int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(2);
  double sum = 0;
  for (int t = 0; t < 100000; ++t) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  auto w = v;
  rng.shuffle(w.begin(), w.end());
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Rng, DerivedSeedsAreDistinctAndOrderFree) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(99, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(99, 17), derive_seed(99, 17));
  EXPECT_NE(derive_seed(99, 17), derive_seed(98, 17));
}

TEST(SimpleDigraph, IndexesAndLookups) {
  const SimpleDigraph d(4, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 0}});
  EXPECT_EQ(d.vertex_count(), 4u);
  EXPECT_EQ(d.edge_count(), 5u);
  EXPECT_EQ(d.out_degree(0), 2u);
  EXPECT_EQ(d.in_degree(0), 2u);
  EXPECT_EQ(d.min_out_degree(), 1u);
  EXPECT_EQ(*d.find_edge(0, 3), 3u);
  EXPECT_TRUE(d.has_edge(3, 0));
  EXPECT_FALSE(d.has_edge(1, 0));
  EXPECT_FALSE(d.has_edge(9, 0));
  std::vector<Vertex> heads;
  for (const auto e : d.out_edges(0)) heads.push_back(d.edge(e).head);
  EXPECT_EQ(heads, (std::vector<Vertex>{1, 3}));
}

TEST(SimpleDigraph, RejectsLoopsRepeatsAndBadLabels) {
  EXPECT_THROW(SimpleDigraph(3, {{1, 1}}), Error);
  EXPECT_THROW(SimpleDigraph(3, {{0, 1}, {0, 1}}), Error);
  EXPECT_THROW(SimpleDigraph(3, {{0, 3}}), Error);
  EXPECT_NO_THROW(SimpleDigraph(3, {{0, 1}, {1, 0}}));
}

TEST(EdgeList, RoundTrip) {
  const SimpleDigraph d(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {2, 0}});
  std::istringstream in(edge_list_text(d, 2));
  const auto file = read_edge_list(in);
  EXPECT_EQ(file.k, 2u);
  EXPECT_EQ(file.digraph.vertex_count(), 5u);
  EXPECT_EQ(file.digraph.edges(), d.edges());
}

TEST(EdgeList, MalformedInputIsRejected) {
  for (const std::string text : {"", "3 2\n0 1\n1 2\n", "3 2 1\n0 1\n", "3 1 1\n0 5\n", "3 1 1\n0 1 2\n",
                                 "3 1 1\n0 1\n2 0\n", "3 1 1\n1 1\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_edge_list(in), Error) << text;
  }
}
