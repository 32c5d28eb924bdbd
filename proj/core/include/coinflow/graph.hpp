#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coinflow/rng.hpp"

namespace coinflow {

using Vertex = std::uint32_t;

struct DirectedEdge {
  Vertex from;
  Vertex to;
  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

enum class NamedGraph { complete, path, cycle, star };

std::string_view to_string(NamedGraph kind) noexcept;
NamedGraph parse_named_graph(std::string_view name);

// Immutable social network on vertices 0..n-1. Construction guarantees a
// connected simple graph with at least one edge.
class GraphTopology {
 public:
  static GraphTopology build_named(NamedGraph kind, std::size_t n);
  static GraphTopology from_edge_list(std::size_t n,
                                      std::span<const std::pair<Vertex, Vertex>> pairs);

  std::size_t vertex_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  // Undirected edges normalized to (u, v) with u < v, sorted.
  const std::vector<std::pair<Vertex, Vertex>>& edges() const noexcept { return edges_; }
  // All 2*card(E) ordered pairs: (u,v) and (v,u) for every edge.
  const std::vector<DirectedEdge>& directed_edges() const noexcept { return directed_; }
  const std::vector<std::vector<Vertex>>& adjacency() const noexcept { return adjacency_; }

  std::size_t degree(Vertex v) const { return adjacency_.at(v).size(); }

  DirectedEdge sample_directed_edge(Xoshiro256& rng) const noexcept {
    return directed_[rng.below(directed_.size())];
  }

  std::size_t diameter() const;

  // Either "named:<kind>:<n>" or "file:<path>" as given at construction.
  const std::string& description() const noexcept { return description_; }
  void set_description(std::string d) { description_ = std::move(d); }

  friend bool operator==(const GraphTopology& a, const GraphTopology& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  GraphTopology() = default;

  std::size_t n_ = 0;
  std::vector<std::pair<Vertex, Vertex>> edges_;
  std::vector<DirectedEdge> directed_;
  std::vector<std::vector<Vertex>> adjacency_;
  std::string description_;
};

// BFS distances from `source`; unreachable vertices get SIZE_MAX.
std::vector<std::size_t> bfs_distances(const GraphTopology& g, Vertex source);

// Edge-list text: first line `n`, then `u v` per line; `#` starts a comment.
GraphTopology read_edge_list(std::istream& in);
GraphTopology load_edge_list(const std::string& path);
void write_edge_list(std::ostream& out, const GraphTopology& g);

// "named:complete:100" or "file:path/to/graph.txt".
GraphTopology parse_graph_spec(std::string_view spec);

}  // namespace coinflow
