#pragma once

// Brute-force reference implementations used only by the tests. They share no
// code with the library beyond the Graph container.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "sparsenet/graph.hpp"

namespace oracle {

using sparsenet::Edge;
using sparsenet::Graph;
using sparsenet::Vertex;

inline constexpr int kInf = std::numeric_limits<int>::max() / 4;

// Random spanning tree plus `extra` random edges; connected by construction.
inline Graph random_connected(std::size_t n, std::size_t extra, std::mt19937_64& gen) {
  std::vector<Edge> edges;
  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), Vertex{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    Vertex a = perm[i], b = perm[pick(gen)];
    edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::uniform_int_distribution<Vertex> any(0, static_cast<Vertex>(n - 1));
  for (std::size_t k = 0; k < extra && n > 2; ++k) {
    Vertex a = any(gen), b = any(gen);
    if (a == b) continue;
    Edge e{std::min(a, b), std::max(a, b)};
    if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
  }
  return Graph(n, edges);
}

inline bool connected_union_find(const Graph& g) {
  std::vector<std::size_t> parent(g.num_vertices());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  std::size_t components = g.num_vertices();
  for (const auto& e : g.edges()) {
    auto a = find(e.first), b = find(e.second);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0;
  for (const auto& e : g.edges()) d[e.first][e.second] = d[e.second][e.first] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// For every unordered pair {s,t}, enumerate all shortest s-t paths explicitly
// and credit each edge on a path with 1/(number of paths).
inline std::map<std::pair<Vertex, Vertex>, double> betweenness_by_paths(const Graph& g) {
  const auto d = floyd_warshall(g);
  const std::size_t n = g.num_vertices();
  std::map<std::pair<Vertex, Vertex>, double> out;
  for (const auto& e : g.edges()) out[{e.first, e.second}] = 0.0;
  std::vector<std::vector<Vertex>> paths;
  std::vector<Vertex> cur;
  for (Vertex s = 0; s < n; ++s) {
    for (Vertex t = s + 1; t < n; ++t) {
      paths.clear();
      cur.assign(1, s);
      std::function<void(Vertex)> walk = [&](Vertex u) {
        if (u == t) {
          paths.push_back(cur);
          return;
        }
        for (Vertex w : g.neighbors(u)) {
          if (d[s][w] == d[s][u] + 1 && d[w][t] == d[u][t] - 1) {
            cur.push_back(w);
            walk(w);
            cur.pop_back();
          }
        }
      };
      walk(s);
      const double share = 1.0 / static_cast<double>(paths.size());
      for (const auto& p : paths) {
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
          out[{std::min(p[i], p[i + 1]), std::max(p[i], p[i + 1])}] += share;
        }
      }
    }
  }
  return out;
}

// Length of the longest directed path ending at each vertex when every edge
// points from the higher id to the lower id, by exhaustive path enumeration
// from every in-degree-0 vertex.
inline std::vector<int> longest_path_layers(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<int> best(n, 0);
  std::vector<bool> source(n, true);
  for (const auto& e : g.edges()) source[e.first] = false;  // e.first < e.second receives an arc
  std::function<void(Vertex, int)> walk = [&](Vertex u, int depth) {
    best[u] = std::max(best[u], depth);
    for (Vertex w : g.neighbors(u)) {
      if (w < u) walk(w, depth + 1);
    }
  };
  for (Vertex s = 0; s < n; ++s) {
    if (source[s]) walk(s, 0);
  }
  return best;
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double pvar(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

// All 25 properties straight from the definitions.
inline std::array<double, 25> features(const Graph& g) {
  const std::size_t n = g.num_vertices();
  const auto d = floyd_warshall(g);
  std::vector<double> deg(n), ecc(n), nbh(n), clo(n), lengths;
  std::size_t sources = 0, sinks = 0;
  for (Vertex v = 0; v < n; ++v) {
    std::size_t lower = 0, higher = 0, count = 0;
    for (Vertex u = 0; u < n; ++u) {
      if (u != v && d[v][u] == 1) {
        ++count;
        (u < v ? lower : higher)++;
      }
    }
    deg[v] = static_cast<double>(count);
    nbh[v] = static_cast<double>(count + 1);
    if (higher == 0) ++sources;
    if (lower == 0) ++sinks;
    int e = 0;
    double total = 0;
    for (Vertex u = 0; u < n; ++u) {
      e = std::max(e, d[v][u]);
      total += d[v][u];
      if (u > v) lengths.push_back(d[v][u]);
    }
    ecc[v] = e;
    clo[v] = static_cast<double>(n - 1) / total;
  }
  std::vector<double> btw;
  for (const auto& [edge, value] : betweenness_by_paths(g)) btw.push_back(value);
  const double m = static_cast<double>(g.num_edges());
  auto mn = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
  auto mx = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
  return {static_cast<double>(n),
          m,
          static_cast<double>(sources),
          static_cast<double>(sinks),
          mx(ecc),
          2.0 * m / (static_cast<double>(n) * static_cast<double>(n - 1)),
          mean(deg),
          pvar(deg),
          mean(ecc),
          pvar(ecc),
          mx(ecc),
          mean(nbh),
          pvar(nbh),
          mn(nbh),
          mx(nbh),
          mean(lengths),
          pvar(lengths),
          mn(clo),
          mean(clo),
          mx(clo),
          std::sqrt(pvar(clo)),
          mn(btw),
          mean(btw),
          mx(btw),
          std::sqrt(pvar(btw))};
}

}  // namespace oracle
