#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "sparsenet/rgg.hpp"

using namespace sparsenet;

namespace {

GeneratorSpec ws(std::size_t n, std::size_t k, double p, std::uint64_t seed = 1) {
  GeneratorSpec s;
  s.kind = GeneratorKind::watts_strogatz;
  s.n = n;
  s.ws_k = k;
  s.ws_p = p;
  s.seed = seed;
  return s;
}

GeneratorSpec ba(std::size_t n, std::size_t m, std::uint64_t seed = 1) {
  GeneratorSpec s;
  s.kind = GeneratorKind::barabasi_albert;
  s.n = n;
  s.ba_m = m;
  s.seed = seed;
  return s;
}

GeneratorSpec er(std::size_t n, double p, std::uint64_t seed = 1) {
  GeneratorSpec s;
  s.kind = GeneratorKind::erdos_renyi;
  s.n = n;
  s.er_p = p;
  s.seed = seed;
  return s;
}

// Share of all degree held by the top 10% of vertices.
double top_decile_mass(const Graph& g) {
  std::vector<std::size_t> deg(g.num_vertices());
  for (Vertex v = 0; v < g.num_vertices(); ++v) deg[v] = g.degree(v);
  std::sort(deg.rbegin(), deg.rend());
  const std::size_t top = std::max<std::size_t>(1, deg.size() / 10);
  return static_cast<double>(std::accumulate(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(top), 0.0)) /
         static_cast<double>(2 * g.num_edges());
}

}  // namespace

TEST(Generators, RingLatticeWithoutRewiring) {
  const Graph g = generate(ws(6, 2, 0.0));
  EXPECT_EQ(g.num_edges(), 6u);
  for (Vertex v = 0; v < 6; ++v) EXPECT_EQ(g.degree(v), 2u);
  EXPECT_TRUE(g.has_edge(0, 5));
  const Graph g8 = generate(ws(20, 8, 0.0));
  for (Vertex v = 0; v < 20; ++v) EXPECT_EQ(g8.degree(v), 8u);
}

TEST(Generators, RewiringPreservesEdgeCount) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Graph g = generate(ws(60, 6, 0.7, seed));
    EXPECT_EQ(g.num_edges(), 180u);
  }
}

TEST(Generators, CompleteErdosRenyi) {
  const Graph g = generate(er(5, 1.0));
  EXPECT_EQ(g.num_edges(), 10u);
  EXPECT_EQ(generate(er(5, 0.0)).num_edges(), 0u);
}

TEST(Generators, BarabasiAlbertEdgeCount) {
  for (std::size_t m = 1; m < 8; ++m) {
    const std::size_t n = 40;
    const Graph g = generate(ba(n, m, m));
    EXPECT_EQ(g.num_edges(), m * (n - m - 1) + m * (m + 1) / 2);
    EXPECT_TRUE(is_connected(g));
  }
}

TEST(Generators, BarabasiAlbertHeavierTailThanErdosRenyi) {
  double ba_mass = 0, er_mass = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Graph b = generate(ba(50, 3, seed));
    const double mean_degree = 2.0 * static_cast<double>(b.num_edges()) / 50.0;
    ba_mass += top_decile_mass(b);
    er_mass += top_decile_mass(generate(er(50, mean_degree / 49.0, seed)));
  }
  EXPECT_GT(ba_mass, er_mass);
}

TEST(Generators, Deterministic) {
  for (auto spec : {ws(80, 6, 0.4, 9), ba(80, 4, 9), er(80, 0.1, 9)}) {
    EXPECT_EQ(generate(spec), generate(spec));
  }
  EXPECT_NE(generate(ws(80, 6, 0.4, 1)), generate(ws(80, 6, 0.4, 2)));
}

TEST(Generators, SpecValidation) {
  EXPECT_THROW(generate(ws(10, 3, 0.1)), ArgumentError);
  EXPECT_THROW(generate(ws(10, 10, 0.1)), ArgumentError);
  EXPECT_THROW(generate(ws(10, 4, 1.5)), ArgumentError);
  EXPECT_THROW(generate(ba(10, 0)), ArgumentError);
  EXPECT_THROW(generate(ba(10, 10)), ArgumentError);
  EXPECT_THROW(generate(er(10, -0.1)), ArgumentError);
}

TEST(Generators, ConnectedSampling) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(generate_connected_sample(ws(50, 4, 0.0, seed), 1).attempts, 1);
    EXPECT_EQ(generate_connected_sample(ba(50, 2, seed), 1).attempts, 1);
  }
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    try {
      generate_connected(er(30, 0.01, seed), 1);
    } catch (const GenerationError& e) {
      ++failures;
      EXPECT_NE(std::string(e.what()).find("erdos_renyi(n=30"), std::string::npos);
    }
  }
  EXPECT_GE(failures, 18);
}

TEST(Generators, RetryUsesSuccessiveSeeds) {
  const auto sample = generate_connected_sample(er(40, 0.08, 100), 200);
  EXPECT_EQ(sample.spec.seed, 100u + static_cast<std::uint64_t>(sample.attempts - 1));
  EXPECT_EQ(sample.graph, generate(sample.spec));
}

TEST(Sampling, DeterministicAndInRange) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    for (auto kind : {GeneratorKind::watts_strogatz, GeneratorKind::barabasi_albert}) {
      const auto a = sample_spec(seed, kind);
      EXPECT_EQ(a, sample_spec(seed, kind));
      EXPECT_GE(a.n, 50u);
      EXPECT_LE(a.n, 500u);
      EXPECT_NO_THROW(a.validate());
      if (kind == GeneratorKind::watts_strogatz) {
        EXPECT_GE(a.ws_k, 4u);
        EXPECT_LE(a.ws_k, 18u);
        EXPECT_EQ(a.ws_k % 2, 0u);
        EXPECT_GE(a.ws_p, 0.1);
        EXPECT_LE(a.ws_p, 0.9);
      } else {
        EXPECT_GE(a.ba_m, 1u);
        EXPECT_LE(a.ba_m, 9u);
      }
    }
  }
}

TEST(Sampling, MeanDegreeNearReference) {
  // Expected mean degree of each spec in closed form: WS keeps k, BA has 2m/n.
  double total = 0;
  const int count = 10000;
  for (int i = 0; i < count; ++i) {
    const auto kind = i % 2 == 0 ? GeneratorKind::watts_strogatz : GeneratorKind::barabasi_albert;
    const auto s = sample_spec(static_cast<std::uint64_t>(i) * 7919 + 1, kind);
    if (kind == GeneratorKind::watts_strogatz) {
      total += static_cast<double>(s.ws_k);
    } else {
      const double m = static_cast<double>(s.ba_m * (s.n - s.ba_m - 1) + s.ba_m * (s.ba_m + 1) / 2);
      total += 2.0 * m / static_cast<double>(s.n);
    }
  }
  const double mean = total / count;
  EXPECT_GE(mean, 8.0);
  EXPECT_LE(mean, 13.0);
}

TEST(Sampling, SmallGraphsStayValid) {
  SamplingRanges r;
  r.n_min = 5;
  r.n_max = 8;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    EXPECT_NO_THROW(sample_spec(seed, GeneratorKind::watts_strogatz, r).validate());
    EXPECT_NO_THROW(sample_spec(seed, GeneratorKind::barabasi_albert, r).validate());
  }
}
