#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sparsenet/errors.hpp"
#include "sparsenet/graph.hpp"
#include "sparsenet/rng.hpp"

namespace sparsenet {

enum class GeneratorKind { watts_strogatz, barabasi_albert, erdos_renyi };

inline std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::watts_strogatz: return "watts_strogatz";
    case GeneratorKind::barabasi_albert: return "barabasi_albert";
    case GeneratorKind::erdos_renyi: return "erdos_renyi";
  }
  return "unknown";
}

inline GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "watts_strogatz" || name == "ws") return GeneratorKind::watts_strogatz;
  if (name == "barabasi_albert" || name == "ba") return GeneratorKind::barabasi_albert;
  if (name == "erdos_renyi" || name == "er") return GeneratorKind::erdos_renyi;
  throw ArgumentError("unknown generator kind '" + std::string(name) + "' (expected ws, ba or er)");
}

// Parameters of one random graph draw. Only the fields of `kind` are used.
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::watts_strogatz;
  std::size_t n = 0;
  std::size_t ws_k = 0;
  double ws_p = 0.0;
  std::size_t ba_m = 0;
  double er_p = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;

  void validate() const {
    if (n == 0) throw ArgumentError("generator: n must be positive");
    auto probability = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError(std::string("generator: ") + name + " must lie in [0,1]");
    };
    switch (kind) {
      case GeneratorKind::watts_strogatz:
        if (ws_k % 2 != 0 || ws_k < 2 || ws_k >= n) {
          throw ArgumentError("generator: WS needs even k with 2 <= k < n (k=" + std::to_string(ws_k) +
                              ", n=" + std::to_string(n) + ")");
        }
        probability(ws_p, "ws_p");
        break;
      case GeneratorKind::barabasi_albert:
        if (ba_m < 1 || ba_m >= n) {
          throw ArgumentError("generator: BA needs 1 <= m < n (m=" + std::to_string(ba_m) + ", n=" +
                              std::to_string(n) + ")");
        }
        break;
      case GeneratorKind::erdos_renyi:
        probability(er_p, "er_p");
        break;
    }
  }

  std::string describe() const {
    std::ostringstream out;
    out << to_string(kind) << "(n=" << n;
    switch (kind) {
      case GeneratorKind::watts_strogatz: out << ", k=" << ws_k << ", p=" << ws_p; break;
      case GeneratorKind::barabasi_albert: out << ", m=" << ba_m; break;
      case GeneratorKind::erdos_renyi: out << ", p=" << er_p; break;
    }
    out << ", seed=" << seed << ")";
    return out.str();
  }
};

namespace detail {

inline Graph from_adjacency_sets(const std::vector<std::set<Vertex>>& adj) {
  std::vector<Edge> edges;
  for (Vertex u = 0; u < adj.size(); ++u) {
    for (Vertex v : adj[u]) {
      if (u < v) edges.push_back({u, v});
    }
  }
  return Graph(adj.size(), std::move(edges));
}

// Ring lattice, then for each offset j = 1..k/2 and each vertex u the lattice
// edge (u, u+j) is rewired to (u, w) with probability p. w is drawn uniformly
// among vertices that are neither u nor already adjacent to u, which keeps the
// edge count fixed.
inline Graph watts_strogatz(const GeneratorSpec& spec, Rng& rng) {
  const std::size_t n = spec.n;
  std::vector<std::set<Vertex>> adj(n);
  for (Vertex u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= spec.ws_k / 2; ++j) {
      const auto v = static_cast<Vertex>((u + j) % n);
      adj[u].insert(v);
      adj[v].insert(u);
    }
  }
  if (spec.ws_p > 0.0) {
    for (std::size_t j = 1; j <= spec.ws_k / 2; ++j) {
      for (Vertex u = 0; u < n; ++u) {
        const auto v = static_cast<Vertex>((u + j) % n);
        if (!rng.bernoulli(spec.ws_p)) continue;
        if (adj[u].size() >= n - 1) continue;
        // The lattice edge may already be gone if v rewired it away earlier.
        if (!adj[u].contains(v)) continue;
        Vertex w = 0;
        do {
          w = static_cast<Vertex>(rng.below(n));
        } while (w == u || adj[u].contains(w));
        adj[u].erase(v);
        adj[v].erase(u);
        adj[u].insert(w);
        adj[w].insert(u);
      }
    }
  }
  return from_adjacency_sets(adj);
}

// Clique on vertices 0..m, then every later vertex attaches m edges to distinct
// existing vertices chosen with probability proportional to current degree.
inline Graph barabasi_albert(const GeneratorSpec& spec, Rng& rng) {
  const std::size_t n = spec.n;
  const std::size_t m = spec.ba_m;
  std::vector<Edge> edges;
  std::vector<Vertex> endpoint_pool;  // each vertex appears degree-many times
  for (Vertex u = 0; u <= m; ++u) {
    for (Vertex v = u + 1; v <= m; ++v) {
      edges.push_back({u, v});
      endpoint_pool.push_back(u);
      endpoint_pool.push_back(v);
    }
  }
  // A single seed vertex (m = 0 is rejected, so this only arises for n = 1) has degree 0.
  std::vector<Vertex> targets;
  for (auto v = static_cast<Vertex>(m + 1); v < n; ++v) {
    targets.clear();
    while (targets.size() < m) {
      const Vertex t = endpoint_pool[rng.below(endpoint_pool.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (Vertex t : targets) {
      edges.push_back({t, v});
      endpoint_pool.push_back(t);
      endpoint_pool.push_back(v);
    }
  }
  return Graph(n, std::move(edges));
}

inline Graph erdos_renyi(const GeneratorSpec& spec, Rng& rng) {
  std::vector<Edge> edges;
  for (Vertex u = 0; u < spec.n; ++u) {
    for (Vertex v = u + 1; v < spec.n; ++v) {
      if (rng.bernoulli(spec.er_p)) edges.push_back({u, v});
    }
  }
  return Graph(spec.n, std::move(edges));
}

}  // namespace detail

// Deterministic in spec (including seed).
inline Graph generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  switch (spec.kind) {
    case GeneratorKind::watts_strogatz: return detail::watts_strogatz(spec, rng);
    case GeneratorKind::barabasi_albert: return detail::barabasi_albert(spec, rng);
    case GeneratorKind::erdos_renyi: return detail::erdos_renyi(spec, rng);
  }
  throw ArgumentError("generator: unknown kind");
}

// Attempt a uses seed + a. Returns the first connected sample together with
// the spec that produced it.
struct ConnectedSample {
  Graph graph;
  GeneratorSpec spec;
  int attempts = 0;
};

inline ConnectedSample generate_connected_sample(const GeneratorSpec& spec, int max_retries) {
  if (max_retries < 1) throw ArgumentError("generate_connected: max_retries must be >= 1");
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    GeneratorSpec trial = spec;
    trial.seed = spec.seed + static_cast<std::uint64_t>(attempt);
    Graph g = generate(trial);
    if (is_connected(g)) return {std::move(g), trial, attempt + 1};
  }
  throw GenerationError("no connected graph after " + std::to_string(max_retries) + " attempts for " +
                        spec.describe());
}

inline Graph generate_connected(const GeneratorSpec& spec, int max_retries) {
  return generate_connected_sample(spec, max_retries).graph;
}

// Parameter ranges for dataset sampling. The WS/BA ranges are calibrated so the
// pooled mean degree is about 10 and edge counts cover roughly 100..4400 at
// n in [50, 500].
struct SamplingRanges {
  std::size_t n_min = 50;
  std::size_t n_max = 500;
  std::size_t ws_half_k_min = 2;  // k in {4, 6, ..., 18}
  std::size_t ws_half_k_max = 9;
  double ws_p_min = 0.1;
  double ws_p_max = 0.9;
  std::size_t ba_m_min = 1;
  std::size_t ba_m_max = 9;
  double er_mean_degree_min = 5.0;
  double er_mean_degree_max = 15.0;
};

inline GeneratorSpec sample_spec(std::uint64_t seed, GeneratorKind kind, const SamplingRanges& ranges = {}) {
  if (ranges.n_min == 0 || ranges.n_min > ranges.n_max) throw ArgumentError("sample_spec: empty vertex range");
  Rng rng(seed);
  GeneratorSpec spec;
  spec.kind = kind;
  spec.n = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(ranges.n_min), static_cast<std::int64_t>(ranges.n_max)));
  switch (kind) {
    case GeneratorKind::watts_strogatz: {
      // Keep k < n for very small graphs.
      const std::size_t half_cap = spec.n >= 3 ? (spec.n - 1) / 2 : 1;
      const std::size_t hi = std::max<std::size_t>(1, std::min(ranges.ws_half_k_max, half_cap));
      const std::size_t lo = std::min(ranges.ws_half_k_min, hi);
      spec.ws_k = 2 * static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
      spec.ws_p = rng.uniform(ranges.ws_p_min, ranges.ws_p_max);
      break;
    }
    case GeneratorKind::barabasi_albert: {
      const std::size_t hi = std::min(ranges.ba_m_max, spec.n - 1);
      const std::size_t lo = std::min(ranges.ba_m_min, hi);
      spec.ba_m = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
      break;
    }
    case GeneratorKind::erdos_renyi: {
      const double k = rng.uniform(ranges.er_mean_degree_min, ranges.er_mean_degree_max);
      spec.er_p = spec.n > 1 ? std::min(1.0, k / static_cast<double>(spec.n - 1)) : 0.0;
      break;
    }
  }
  spec.seed = rng.next_u64();
  return spec;
}

}  // namespace sparsenet
