#pragma once

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sparsenet/errors.hpp"
#include "sparsenet/graph.hpp"

namespace sparsenet {

struct Arc {
  Vertex from = 0;
  Vertex to = 0;

  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

// Directed graph with optional layer assignment. Layer l holds the vertices
// whose longest incoming path from a source has length l.
class LayeredDag {
 public:
  LayeredDag() = default;

  LayeredDag(std::size_t n, std::vector<Arc> arcs) : n_(n), arcs_(std::move(arcs)) {
    for (const auto& a : arcs_) {
      if (a.from >= n_ || a.to >= n_) throw ArgumentError("arc endpoint out of range");
      if (a.from == a.to) throw StructuralError("self-loop arc on vertex " + std::to_string(a.from));
    }
    std::sort(arcs_.begin(), arcs_.end());
    if (std::adjacent_find(arcs_.begin(), arcs_.end()) != arcs_.end()) throw ArgumentError("duplicate arc");
    build_adjacency();
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_arcs() const noexcept { return arcs_.size(); }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

  std::span<const Vertex> predecessors(Vertex v) const {
    return {in_adj_.data() + in_off_[v], in_adj_.data() + in_off_[v + 1]};
  }
  std::span<const Vertex> successors(Vertex v) const {
    return {out_adj_.data() + out_off_[v], out_adj_.data() + out_off_[v + 1]};
  }
  std::size_t in_degree(Vertex v) const { return in_off_[v + 1] - in_off_[v]; }
  std::size_t out_degree(Vertex v) const { return out_off_[v + 1] - out_off_[v]; }

  // In-degree 0 / out-degree 0, ascending id.
  const std::vector<Vertex>& sources() const noexcept { return sources_; }
  const std::vector<Vertex>& sinks() const noexcept { return sinks_; }

  bool is_layered() const noexcept { return layer_of_.size() == n_ && n_ > 0; }
  const std::vector<std::size_t>& layer_of() const noexcept { return layer_of_; }
  std::size_t layer_of(Vertex v) const { return layer_of_.at(v); }
  // layers()[l] lists the vertices of layer l in ascending id.
  const std::vector<std::vector<Vertex>>& layers() const noexcept { return layers_; }

  bool is_lower_triangular() const {
    return std::all_of(arcs_.begin(), arcs_.end(), [](const Arc& a) { return a.from > a.to; });
  }

  friend bool operator==(const LayeredDag& a, const LayeredDag& b) {
    return a.n_ == b.n_ && a.arcs_ == b.arcs_ && a.layer_of_ == b.layer_of_;
  }

 private:
  friend LayeredDag layer_index(const LayeredDag& d);

  void build_adjacency() {
    in_off_.assign(n_ + 1, 0);
    out_off_.assign(n_ + 1, 0);
    for (const auto& a : arcs_) {
      ++out_off_[a.from + 1];
      ++in_off_[a.to + 1];
    }
    std::partial_sum(in_off_.begin(), in_off_.end(), in_off_.begin());
    std::partial_sum(out_off_.begin(), out_off_.end(), out_off_.begin());
    in_adj_.resize(arcs_.size());
    out_adj_.resize(arcs_.size());
    std::vector<std::size_t> in_fill(in_off_.begin(), in_off_.end() - 1);
    std::vector<std::size_t> out_fill(out_off_.begin(), out_off_.end() - 1);
    // arcs_ is sorted by (from, to), so successor lists come out sorted; predecessor
    // lists are filled in ascending `from` order and are sorted as well.
    for (const auto& a : arcs_) {
      out_adj_[out_fill[a.from]++] = a.to;
      in_adj_[in_fill[a.to]++] = a.from;
    }
    sources_.clear();
    sinks_.clear();
    for (Vertex v = 0; v < n_; ++v) {
      if (in_degree(v) == 0) sources_.push_back(v);
      if (out_degree(v) == 0) sinks_.push_back(v);
    }
  }

  std::size_t n_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> in_off_, out_off_;
  std::vector<Vertex> in_adj_, out_adj_;
  std::vector<Vertex> sources_, sinks_;
  std::vector<std::size_t> layer_of_;
  std::vector<std::vector<Vertex>> layers_;
};

// Every edge {u, v} with u > v becomes the arc u -> v. Layers are not computed.
inline LayeredDag orient(const Graph& g) {
  std::vector<Arc> arcs;
  arcs.reserve(g.num_edges());
  for (const auto& e : g.edges()) arcs.push_back({e.second, e.first});
  return LayeredDag(g.num_vertices(), std::move(arcs));
}

// layer(v) = 1 + max layer over predecessors, sources get 0. Computed layer by
// layer: a vertex is placed once all of its predecessors are placed.
inline LayeredDag layer_index(const LayeredDag& d) {
  LayeredDag out = d;
  const std::size_t n = d.num_vertices();
  std::vector<std::size_t> pending(n);
  std::vector<std::size_t> layer(n, 0);
  std::vector<Vertex> frontier;
  for (Vertex v = 0; v < n; ++v) {
    pending[v] = d.in_degree(v);
    if (pending[v] == 0) frontier.push_back(v);
  }
  out.layers_.clear();
  std::size_t placed = 0;
  std::size_t current = 0;
  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end());
    std::vector<Vertex> next;
    for (Vertex v : frontier) {
      layer[v] = current;
      for (Vertex w : d.successors(v)) {
        if (--pending[w] == 0) next.push_back(w);
      }
    }
    placed += frontier.size();
    out.layers_.push_back(std::move(frontier));
    frontier = std::move(next);
    ++current;
  }
  if (placed != n) {
    throw StructuralError("cycle detected: " + std::to_string(n - placed) + " vertices cannot be layered");
  }
  out.layer_of_ = std::move(layer);
  return out;
}

// Text form: header "n a", a lines "u v" (arc u -> v), then one "v:layer" line
// per vertex when the DAG is layered.
inline void write_layered_dag(const LayeredDag& d, std::ostream& out) {
  out << d.num_vertices() << ' ' << d.num_arcs() << '\n';
  for (const auto& a : d.arcs()) out << a.from << ' ' << a.to << '\n';
  if (d.is_layered()) {
    for (Vertex v = 0; v < d.num_vertices(); ++v) out << v << ':' << d.layer_of(v) << '\n';
  }
}

inline std::string write_layered_dag(const LayeredDag& d) {
  std::ostringstream out;
  write_layered_dag(d, out);
  return out.str();
}

// Reads the text form and returns a layered DAG. Layer lines, when present,
// must list every vertex and agree with the recomputed layering.
inline LayeredDag read_layered_dag(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  std::uint64_t n = 0;
  std::uint64_t a = 0;
  if (!std::getline(in, line) || !detail::parse_pair(line, n, a)) throw ParseError(1, "malformed header, expected 'n a'");
  if (n == 0) throw ParseError(1, "vertex count must be positive");
  std::vector<Arc> arcs;
  for (std::uint64_t i = 0; i < a; ++i) {
    ++line_no;
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    if (!std::getline(in, line)) throw ParseError(line_no, "missing arc line");
    if (!detail::parse_pair(line, u, v)) throw ParseError(line_no, "malformed arc line, expected 'u v'");
    if (u >= n || v >= n) throw ParseError(line_no, "arc endpoint out of range");
    if (u == v) throw ParseError(line_no, "self-loop arc");
    arcs.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
  }
  std::vector<std::pair<std::size_t, std::size_t>> layer_lines;  // (layer, line number) per vertex
  std::vector<char> have(n, 0);
  layer_lines.resize(n);
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto colon = line.find(':');
    std::uint64_t v = 0;
    std::uint64_t l = 0;
    if (colon == std::string::npos || !detail::parse_pair(line.substr(0, colon) + " " + line.substr(colon + 1), v, l)) {
      throw ParseError(line_no, "malformed layer line, expected 'v:layer'");
    }
    if (v >= n) throw ParseError(line_no, "layer line vertex out of range");
    if (have[v]) throw ParseError(line_no, "duplicate layer line for vertex " + std::to_string(v));
    have[v] = 1;
    layer_lines[v] = {l, line_no};
    ++count;
  }
  LayeredDag d;
  try {
    d = LayeredDag(n, std::move(arcs));
  } catch (const ArgumentError& e) {
    throw ParseError(line_no, e.what());
  }
  d = layer_index(d);
  if (count != 0) {
    if (count != n) throw ParseError(line_no, "layer lines present for only some vertices");
    for (Vertex v = 0; v < n; ++v) {
      if (layer_lines[v].first != d.layer_of(v)) {
        throw ParseError(layer_lines[v].second, "layer of vertex " + std::to_string(v) + " disagrees with arcs");
      }
    }
  }
  return d;
}

inline LayeredDag read_layered_dag(const std::string& text) {
  std::istringstream in(text);
  return read_layered_dag(in);
}

}  // namespace sparsenet
