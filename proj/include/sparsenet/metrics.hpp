#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparsenet/dag.hpp"
#include "sparsenet/errors.hpp"
#include "sparsenet/graph.hpp"
#include "sparsenet/stats.hpp"

namespace sparsenet {

// Dense n x n hop-distance matrix, row-major.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  std::uint32_t operator()(std::size_t u, std::size_t v) const { return d_[u * n_ + v]; }
  std::uint32_t& operator()(std::size_t u, std::size_t v) { return d_[u * n_ + v]; }
  std::span<const std::uint32_t> row(std::size_t u) const { return {d_.data() + u * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint32_t> d_;
};

namespace detail {

inline void require_connected(const Graph& g, const char* op) {
  if (!is_connected(g)) throw StructuralError(std::string(op) + ": graph is not connected");
}

}  // namespace detail

// BFS from every vertex.
inline DistanceMatrix all_pairs_distances(const Graph& g) {
  const std::size_t n = g.num_vertices();
  DistanceMatrix dist(n);
  constexpr auto unseen = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> level(n);
  std::vector<Vertex> queue(n);
  for (Vertex s = 0; s < n; ++s) {
    std::fill(level.begin(), level.end(), unseen);
    level[s] = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = s;
    while (head < tail) {
      const Vertex v = queue[head++];
      for (Vertex w : g.neighbors(v)) {
        if (level[w] == unseen) {
          level[w] = level[v] + 1;
          queue[tail++] = w;
        }
      }
    }
    if (tail != n) throw StructuralError("all_pairs_distances: graph is not connected");
    for (Vertex v = 0; v < n; ++v) dist(s, v) = level[v];
  }
  return dist;
}

inline std::vector<double> eccentricities(const DistanceMatrix& dist) {
  std::vector<double> ecc(dist.size(), 0.0);
  for (std::size_t v = 0; v < dist.size(); ++v) {
    std::uint32_t m = 0;
    for (auto d : dist.row(v)) m = std::max(m, d);
    ecc[v] = m;
  }
  return ecc;
}

inline std::vector<double> eccentricities(const Graph& g) { return eccentricities(all_pairs_distances(g)); }

// (n - 1) / sum of distances. A single vertex has closeness 1.
inline std::vector<double> closeness(const DistanceMatrix& dist) {
  const std::size_t n = dist.size();
  std::vector<double> c(n, 1.0);
  if (n < 2) return c;
  for (std::size_t v = 0; v < n; ++v) {
    std::uint64_t total = 0;
    for (auto d : dist.row(v)) total += d;
    c[v] = static_cast<double>(n - 1) / static_cast<double>(total);
  }
  return c;
}

inline std::vector<double> closeness(const Graph& g) { return closeness(all_pairs_distances(g)); }

// Brandes accumulation. Entry i belongs to g.edges()[i]; each unordered vertex
// pair {s, t} contributes the fraction of its shortest paths through the edge.
inline std::vector<double> edge_betweenness(const Graph& g) {
  detail::require_connected(g, "edge_betweenness");
  const std::size_t n = g.num_vertices();
  const auto& edges = g.edges();

  auto edge_id = [&](Vertex a, Vertex b) {
    const Edge key{std::min(a, b), std::max(a, b)};
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), key) - edges.begin());
  };

  std::vector<double> score(edges.size(), 0.0);
  std::vector<double> sigma(n), delta(n);
  std::vector<std::int64_t> level(n);
  std::vector<Vertex> order;
  order.reserve(n);
  for (Vertex s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(level.begin(), level.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    level[s] = 0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const Vertex v = order[head];
      for (Vertex w : g.neighbors(v)) {
        if (level[w] < 0) {
          level[w] = level[v] + 1;
          order.push_back(w);
        }
        if (level[w] == level[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Vertex w = *it;
      for (Vertex v : g.neighbors(w)) {
        if (level[v] == level[w] - 1) {
          const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
          score[edge_id(v, w)] += c;
          delta[v] += c;
        }
      }
    }
  }
  // Every source visits each pair from both ends.
  for (auto& x : score) x *= 0.5;
  return score;
}

// Closed neighborhood size: degree + 1.
inline std::vector<double> neighborhood_sizes(const Graph& g) {
  std::vector<double> out(g.num_vertices());
  for (Vertex v = 0; v < g.num_vertices(); ++v) out[v] = static_cast<double>(g.degree(v) + 1);
  return out;
}

inline constexpr std::size_t kNumFeatures = 25;

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "number_vertices",        "number_edges",          "number_source_vertices", "number_sink_vertices",
    "diameter",               "density",               "degree_distribution_mean", "degree_distribution_var",
    "eccentricity_mean",      "eccentricity_var",      "eccentricity_max",       "neighborhood_mean",
    "neighborhood_var",       "neighborhood_min",      "neighborhood_max",       "path_length_mean",
    "path_length_var",        "closeness_min",         "closeness_mean",         "closeness_max",
    "closeness_std",          "edge_betweenness_min",  "edge_betweenness_mean",  "edge_betweenness_max",
    "edge_betweenness_std",
};

inline std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  return std::nullopt;
}

// The 25 structural properties of a graph, in the fixed column order of
// kFeatureNames. Integer-valued properties are stored as doubles.
struct FeatureVector {
  std::array<double, kNumFeatures> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double get(std::string_view name) const {
    auto i = feature_index(name);
    if (!i) throw SchemaError("unknown feature '" + std::string(name) + "'");
    return values[*i];
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class FeatureSetId { omega, np, op, var, small, min };

inline constexpr std::array<FeatureSetId, 6> kAllFeatureSets = {
    FeatureSetId::omega, FeatureSetId::np, FeatureSetId::op,
    FeatureSetId::var,   FeatureSetId::small, FeatureSetId::min};

inline std::string_view to_string(FeatureSetId id) {
  switch (id) {
    case FeatureSetId::omega: return "omega";
    case FeatureSetId::np: return "np";
    case FeatureSetId::op: return "op";
    case FeatureSetId::var: return "var";
    case FeatureSetId::small: return "small";
    case FeatureSetId::min: return "min";
  }
  return "unknown";
}

inline FeatureSetId parse_feature_set(std::string_view name) {
  for (auto id : kAllFeatureSets) {
    if (to_string(id) == name) return id;
  }
  throw ArgumentError("unknown feature set '" + std::string(name) + "' (expected omega, np, op, var, small or min)");
}

// Member names in column order.
inline std::vector<std::string_view> feature_set_members(FeatureSetId id) {
  static constexpr std::array<std::string_view, 4> parameter_counts = {
      "number_vertices", "number_edges", "number_source_vertices", "number_sink_vertices"};
  static constexpr std::array<std::string_view, 6> variances = {
      "degree_distribution_var", "eccentricity_var", "neighborhood_var",
      "path_length_var",         "closeness_std",    "edge_betweenness_std"};
  static constexpr std::array<std::string_view, 9> small = {
      "number_source_vertices", "number_sink_vertices", "degree_distribution_var",
      "density",                "neighborhood_var",     "path_length_var",
      "closeness_std",          "edge_betweenness_std", "eccentricity_var"};
  static constexpr std::array<std::string_view, 5> minimal = {
      "number_source_vertices", "number_sink_vertices", "degree_distribution_var", "path_length_var",
      "closeness_std"};

  auto in = [](std::string_view name, auto const& list) {
    return std::find(list.begin(), list.end(), name) != list.end();
  };
  std::vector<std::string_view> out;
  for (auto name : kFeatureNames) {
    bool keep = false;
    switch (id) {
      case FeatureSetId::omega: keep = true; break;
      case FeatureSetId::op: keep = in(name, parameter_counts); break;
      case FeatureSetId::np: keep = !in(name, parameter_counts); break;
      case FeatureSetId::var: keep = in(name, variances); break;
      case FeatureSetId::small: keep = in(name, small); break;
      case FeatureSetId::min: keep = in(name, minimal); break;
    }
    if (keep) out.push_back(name);
  }
  return out;
}

// All graph metrics use the undirected graph; only the source and sink counts
// come from the oriented DAG. Requires a connected graph with n >= 2.
inline FeatureVector feature_vector(const Graph& g, const LayeredDag& d) {
  const std::size_t n = g.num_vertices();
  if (n < 2) throw StructuralError("feature_vector: need at least two vertices");
  if (d.num_vertices() != n) throw ArgumentError("feature_vector: DAG vertex count differs from graph");
  const DistanceMatrix dist = all_pairs_distances(g);

  std::vector<double> degrees(n);
  for (Vertex v = 0; v < n; ++v) degrees[v] = static_cast<double>(g.degree(v));
  const auto ecc = eccentricities(dist);
  const auto nbh = neighborhood_sizes(g);
  const auto clo = closeness(dist);
  const auto btw = edge_betweenness(g);

  std::vector<double> pair_lengths;
  pair_lengths.reserve(n * (n - 1) / 2);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) pair_lengths.push_back(dist(u, v));
  }

  const Summary deg_s = summarize(degrees);
  const Summary ecc_s = summarize(ecc);
  const Summary nbh_s = summarize(nbh);
  const Summary path_s = summarize(pair_lengths);
  const Summary clo_s = summarize(clo);
  const Summary btw_s = summarize(btw);

  const double nn = static_cast<double>(n);
  const double m = static_cast<double>(g.num_edges());
  FeatureVector f;
  f.values = {
      nn,
      m,
      static_cast<double>(d.sources().size()),
      static_cast<double>(d.sinks().size()),
      ecc_s.max,
      2.0 * m / (nn * (nn - 1.0)),
      deg_s.mean,
      deg_s.var,
      ecc_s.mean,
      ecc_s.var,
      ecc_s.max,
      nbh_s.mean,
      nbh_s.var,
      nbh_s.min,
      nbh_s.max,
      path_s.mean,
      path_s.var,
      clo_s.min,
      clo_s.mean,
      clo_s.max,
      clo_s.std,
      btw_s.min,
      btw_s.mean,
      btw_s.max,
      btw_s.std,
  };
  return f;
}

inline FeatureVector feature_vector(const Graph& g) { return feature_vector(g, orient(g)); }

}  // namespace sparsenet
