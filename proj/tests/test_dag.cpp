#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sparsenet/dag.hpp"

using namespace sparsenet;

TEST(Orient, HigherToLower) {
  const LayeredDag d = orient(Graph(3, {{0, 1}, {1, 2}}));
  ASSERT_EQ(d.num_arcs(), 2u);
  EXPECT_EQ(d.arcs()[0], (Arc{1, 0}));
  EXPECT_EQ(d.arcs()[1], (Arc{2, 1}));
}

TEST(Orient, Triangle) {
  const LayeredDag d = layer_index(orient(Graph(3, {{0, 1}, {0, 2}, {1, 2}})));
  EXPECT_EQ(d.sources(), std::vector<Vertex>{2});
  EXPECT_EQ(d.sinks(), std::vector<Vertex>{0});
  EXPECT_EQ(d.layer_of(2), 0u);
  EXPECT_EQ(d.layer_of(1), 1u);
  EXPECT_EQ(d.layer_of(0), 2u);
}

TEST(Layering, Chain) {
  const LayeredDag d = layer_index(LayeredDag(3, {{2, 1}, {1, 0}}));
  EXPECT_EQ(d.layer_of(), (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_EQ(d.layers().size(), 3u);
}

TEST(Layering, CycleIsStructuralError) {
  EXPECT_THROW(layer_index(LayeredDag(3, {{0, 1}, {1, 2}, {2, 0}})), StructuralError);
}

TEST(Layering, IsolatedVertexIsSourceAndSink) {
  const LayeredDag d = layer_index(LayeredDag(3, {{2, 1}}));
  EXPECT_EQ(d.layer_of(0), 0u);
  EXPECT_NE(std::find(d.sources().begin(), d.sources().end(), 0u), d.sources().end());
  EXPECT_NE(std::find(d.sinks().begin(), d.sinks().end(), 0u), d.sinks().end());
}

TEST(Layering, MatchesLongestPathOracle) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Graph g = oracle::random_connected(2 + gen() % 11, gen() % 20, gen);
    const LayeredDag d = layer_index(orient(g));
    const auto expected = oracle::longest_path_layers(g);
    for (Vertex v = 0; v < g.num_vertices(); ++v) EXPECT_EQ(d.layer_of(v), static_cast<std::size_t>(expected[v]));
  }
}

TEST(Layering, StructuralInvariants) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = oracle::random_connected(2 + gen() % 60, gen() % 120, gen);
    const LayeredDag d = layer_index(orient(g));
    EXPECT_EQ(d.num_arcs(), g.num_edges());
    EXPECT_TRUE(d.is_lower_triangular());
    EXPECT_FALSE(d.sources().empty());
    EXPECT_FALSE(d.sinks().empty());
    EXPECT_EQ(d.sinks().front(), 0u);
    EXPECT_EQ(d.sources().back(), g.num_vertices() - 1);
    for (const auto& a : d.arcs()) {
      EXPECT_GT(a.from, a.to);
      EXPECT_LT(d.layer_of(a.from), d.layer_of(a.to));
    }
    // Minimality: every non-source sits exactly one layer after some predecessor.
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      if (d.in_degree(v) == 0) {
        EXPECT_EQ(d.layer_of(v), 0u);
        continue;
      }
      bool tight = false;
      for (Vertex p : d.predecessors(v)) tight |= d.layer_of(p) + 1 == d.layer_of(v);
      EXPECT_TRUE(tight);
    }
    std::size_t total = 0;
    for (const auto& layer : d.layers()) total += layer.size();
    EXPECT_EQ(total, g.num_vertices());
    EXPECT_EQ(d.layers().front(), d.sources());
  }
}

TEST(DagText, RoundTrip) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    const LayeredDag d = layer_index(orient(oracle::random_connected(2 + gen() % 30, gen() % 40, gen)));
    const std::string text = write_layered_dag(d);
    EXPECT_EQ(read_layered_dag(text), d);
    EXPECT_EQ(write_layered_dag(read_layered_dag(text)), text);
  }
}

TEST(DagText, RejectsInconsistentLayers) {
  EXPECT_THROW(read_layered_dag("2 1\n1 0\n0:0\n1:0\n"), ParseError);
  EXPECT_THROW(read_layered_dag("2 1\n1 0\n0:1\n1:0\n1:0\n"), ParseError);
  EXPECT_NO_THROW(read_layered_dag("2 1\n1 0\n0:1\n1:0\n"));
}
