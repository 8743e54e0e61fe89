#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sparsenet/graph.hpp"

using namespace sparsenet;

TEST(Graph, DegreeExamples) {
  const Graph k3(3, {{0, 1}, {0, 2}, {1, 2}});
  for (Vertex v = 0; v < 3; ++v) EXPECT_EQ(degree(k3, v), 2u);
  const Graph p3(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(degree(p3, 1), 2u);
  EXPECT_EQ(degree(p3, 0), 1u);
  const Graph star(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
  EXPECT_EQ(degree(star, 0), 5u);
  EXPECT_THROW(degree(star, 6), ArgumentError);
}

TEST(Graph, RejectsInvalidEdges) {
  EXPECT_THROW(Graph(3, {{1, 1}}), ArgumentError);
  EXPECT_THROW(Graph(3, {{0, 3}}), ArgumentError);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), ArgumentError);
}

TEST(Graph, Connectivity) {
  EXPECT_TRUE(is_connected(Graph(3, {{0, 1}, {0, 2}, {1, 2}})));
  EXPECT_FALSE(is_connected(Graph(4, {{0, 1}, {2, 3}})));
  EXPECT_TRUE(is_connected(Graph(1, {})));
}

TEST(Graph, ConnectivityMatchesUnionFind) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen() % 50;
    std::vector<Edge> edges;
    const std::size_t m = gen() % (n + 5);
    for (std::size_t k = 0; k < m && n > 1; ++k) {
      Vertex a = gen() % n, b = gen() % n;
      if (a == b) continue;
      Edge e{std::min(a, b), std::max(a, b)};
      if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
    }
    const Graph g(n, edges);
    EXPECT_EQ(is_connected(g), oracle::connected_union_find(g)) << "trial " << trial;
  }
}

TEST(Graph, HandshakeLemma) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = oracle::random_connected(2 + gen() % 40, gen() % 60, gen);
    std::size_t total = 0;
    for (Vertex v = 0; v < g.num_vertices(); ++v) total += g.degree(v);
    EXPECT_EQ(total, 2 * g.num_edges());
  }
}

TEST(EdgeList, ParsesPath) {
  const Graph g = read_edge_list("3 2\n0 1\n1 2\n");
  EXPECT_EQ(g, Graph(3, {{0, 1}, {1, 2}}));
}

TEST(EdgeList, WriteIsCanonical) {
  const Graph g = read_edge_list("4 3\n3 2\n1 0\n0 2\n");
  EXPECT_EQ(write_edge_list(g), "4 3\n0 1\n0 2\n2 3\n");
}

TEST(EdgeList, RoundTripRandomGraphs) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Graph g = oracle::random_connected(2 + gen() % 30, gen() % 30, gen);
    const std::string text = write_edge_list(g);
    const Graph back = read_edge_list(text);
    EXPECT_EQ(back, g);
    EXPECT_EQ(write_edge_list(back), text);
  }
}

namespace {

std::size_t parse_error_line(const std::string& text) {
  try {
    read_edge_list(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(EdgeList, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("2 1\n0 2\n"), 2u);
  EXPECT_EQ(parse_error_line("3 2\n0 1\n1 x\n"), 3u);
  EXPECT_EQ(parse_error_line("3 2\n0 1\n1 0\n"), 3u);
  EXPECT_EQ(parse_error_line("3 1\n1 1\n"), 2u);
  EXPECT_EQ(parse_error_line("three\n"), 1u);
  EXPECT_EQ(parse_error_line("3 2\n0 1\n"), 3u);
  EXPECT_EQ(parse_error_line("3 1\n0 1\n1 2\n"), 3u);
}
