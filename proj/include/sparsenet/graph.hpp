#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sparsenet/errors.hpp"

namespace sparsenet {

using Vertex = std::uint32_t;

// Unordered pair stored with first < second.
struct Edge {
  Vertex first = 0;
  Vertex second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph over vertices 0..n-1. The vertex id order is the
// natural ordering that orientation depends on. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ == 0) throw ArgumentError("graph needs at least one vertex");
    for (auto& e : edges_) {
      if (e.first == e.second) throw ArgumentError("self-loop on vertex " + std::to_string(e.first));
      if (e.first > e.second) std::swap(e.first, e.second);
      if (e.second >= n_) {
        throw ArgumentError("edge endpoint " + std::to_string(e.second) + " out of range for n=" +
                            std::to_string(n_));
      }
    }
    std::sort(edges_.begin(), edges_.end());
    if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
      throw ArgumentError("duplicate edge {" + std::to_string(dup->first) + "," +
                          std::to_string(dup->second) + "}");
    }
    build_adjacency();
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  // Canonical edge list: (min,max) pairs in lexicographic order.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  // Sorted neighbor ids of v.
  std::span<const Vertex> neighbors(Vertex v) const {
    check_vertex(v);
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }

  std::size_t degree(Vertex v) const {
    check_vertex(v);
    return offsets_[v + 1] - offsets_[v];
  }

  bool has_edge(Vertex u, Vertex v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  void check_vertex(Vertex v) const {
    if (v >= n_) {
      throw ArgumentError("vertex " + std::to_string(v) + " out of range for n=" + std::to_string(n_));
    }
  }

  void build_adjacency() {
    offsets_.assign(n_ + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.first + 1];
      ++offsets_[e.second + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adj_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
      adj_[fill[e.first]++] = e.second;
      adj_[fill[e.second]++] = e.first;
    }
    for (std::size_t v = 0; v < n_; ++v) {
      std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
                adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> adj_;
};

inline std::size_t degree(const Graph& g, Vertex v) { return g.degree(v); }

// Single traversal from vertex 0.
inline bool is_connected(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (Vertex w : g.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == n;
}

namespace detail {

// Parses one line holding exactly two non-negative decimal integers.
inline bool parse_pair(const std::string& line, std::uint64_t& a, std::uint64_t& b) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
  };
  auto read_uint = [&](std::uint64_t& out) {
    skip_ws();
    if (pos >= line.size() || line[pos] < '0' || line[pos] > '9') return false;
    out = 0;
    while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') {
      if (out > (UINT64_MAX - 9) / 10) return false;
      out = out * 10 + static_cast<std::uint64_t>(line[pos] - '0');
      ++pos;
    }
    return true;
  };
  if (!read_uint(a) || !read_uint(b)) return false;
  skip_ws();
  return pos == line.size();
}

inline bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

// Format: header "n m", then m lines "u v". Trailing blank lines are allowed.
inline Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header 'n m'");
  ++line_no;
  if (!detail::parse_pair(line, n, m)) throw ParseError(line_no, "malformed header, expected 'n m'");
  if (n == 0) throw ParseError(line_no, "vertex count must be positive");

  std::vector<Edge> edges;
  edges.reserve(m);
  std::vector<std::pair<Edge, std::size_t>> seen;
  seen.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    ++line_no;
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    if (!detail::parse_pair(line, u, v)) throw ParseError(line_no, "malformed edge line, expected 'u v'");
    if (u >= n || v >= n) throw ParseError(line_no, "endpoint out of range for n=" + std::to_string(n));
    if (u == v) throw ParseError(line_no, "self-loop on vertex " + std::to_string(u));
    Edge e{static_cast<Vertex>(std::min(u, v)), static_cast<Vertex>(std::max(u, v))};
    seen.emplace_back(e, line_no);
    edges.push_back(e);
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 1; i < seen.size(); ++i) {
    if (seen[i].first == seen[i - 1].first) {
      throw ParseError(std::max(seen[i].second, seen[i - 1].second), "duplicate edge");
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::blank(line)) throw ParseError(line_no, "unexpected content after last edge");
  }
  return Graph(static_cast<std::size_t>(n), std::move(edges));
}

inline Graph read_edge_list(const std::string& text) {
  std::istringstream in(text);
  return read_edge_list(in);
}

// Canonical form: edges sorted, smaller endpoint first, LF line endings.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& e : g.edges()) out << e.first << ' ' << e.second << '\n';
}

inline std::string write_edge_list(const Graph& g) {
  std::ostringstream out;
  write_edge_list(g, out);
  return out.str();
}

}  // namespace sparsenet
