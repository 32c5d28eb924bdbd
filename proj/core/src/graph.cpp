#include "coinflow/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include "coinflow/error.hpp"

namespace coinflow {

std::string_view to_string(NamedGraph kind) noexcept {
  switch (kind) {
    case NamedGraph::complete: return "complete";
    case NamedGraph::path: return "path";
    case NamedGraph::cycle: return "cycle";
    case NamedGraph::star: return "star";
  }
  return "unknown";
}

NamedGraph parse_named_graph(std::string_view name) {
  if (name == "complete") return NamedGraph::complete;
  if (name == "path") return NamedGraph::path;
  if (name == "cycle") return NamedGraph::cycle;
  if (name == "star") return NamedGraph::star;
  raise(ErrorCode::parse_error, "unknown graph family '" + std::string(name) + "'");
}

GraphTopology GraphTopology::build_named(NamedGraph kind, std::size_t n) {
  if (n < 2) raise(ErrorCode::invalid_size, "graph needs at least 2 vertices, got " + std::to_string(n));
  std::vector<std::pair<Vertex, Vertex>> pairs;
  const auto v = [](std::size_t i) { return static_cast<Vertex>(i); };
  switch (kind) {
    case NamedGraph::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(v(i), v(j));
      break;
    case NamedGraph::path:
      for (std::size_t i = 0; i + 1 < n; ++i) pairs.emplace_back(v(i), v(i + 1));
      break;
    case NamedGraph::cycle:
      for (std::size_t i = 0; i + 1 < n; ++i) pairs.emplace_back(v(i), v(i + 1));
      // The closing edge of a 2-cycle would duplicate (0,1).
      if (n > 2) pairs.emplace_back(v(n - 1), v(0));
      break;
    case NamedGraph::star:
      for (std::size_t i = 1; i < n; ++i) pairs.emplace_back(v(0), v(i));
      break;
  }
  GraphTopology g = from_edge_list(n, pairs);
  g.description_ = "named:" + std::string(to_string(kind)) + ":" + std::to_string(n);
  return g;
}

GraphTopology GraphTopology::from_edge_list(std::size_t n,
                                            std::span<const std::pair<Vertex, Vertex>> pairs) {
  if (n < 2) raise(ErrorCode::invalid_size, "graph needs at least 2 vertices, got " + std::to_string(n));
  if (n > std::numeric_limits<Vertex>::max())
    raise(ErrorCode::invalid_size, "too many vertices");
  if (pairs.empty()) raise(ErrorCode::empty_edge_set, "graph has no edges");

  GraphTopology g;
  g.n_ = n;
  g.edges_.reserve(pairs.size());
  for (auto [u, v] : pairs) {
    if (u >= n || v >= n)
      raise(ErrorCode::malformed_edge, "edge (" + std::to_string(u) + "," + std::to_string(v) +
                                           ") has an endpoint outside 0.." + std::to_string(n - 1));
    if (u == v) raise(ErrorCode::malformed_edge, "self-loop at vertex " + std::to_string(u));
    g.edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  if (auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end()); dup != g.edges_.end())
    raise(ErrorCode::malformed_edge, "duplicate edge {" + std::to_string(dup->first) + "," +
                                         std::to_string(dup->second) + "}");

  g.adjacency_.assign(n, {});
  g.directed_.reserve(2 * g.edges_.size());
  for (auto [u, v] : g.edges_) {
    g.adjacency_[u].push_back(v);
    g.adjacency_[v].push_back(u);
    g.directed_.push_back({u, v});
    g.directed_.push_back({v, u});
  }

  const auto dist = bfs_distances(g, 0);
  const auto unreached = std::count(dist.begin(), dist.end(), std::numeric_limits<std::size_t>::max());
  if (unreached > 0)
    raise(ErrorCode::connectivity, "graph is disconnected (" + std::to_string(unreached) +
                                       " vertices unreachable from vertex 0)");
  g.description_ = "edges:" + std::to_string(n);
  return g;
}

std::vector<std::size_t> bfs_distances(const GraphTopology& g, Vertex source) {
  constexpr auto kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.vertex_count(), kUnreached);
  std::queue<Vertex> frontier;
  dist.at(source) = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const Vertex u = frontier.front();
    frontier.pop();
    for (Vertex w : g.adjacency()[u]) {
      if (dist[w] == kUnreached) {
        dist[w] = dist[u] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

std::size_t GraphTopology::diameter() const {
  std::size_t best = 0;
  for (std::size_t s = 0; s < n_; ++s) {
    const auto dist = bfs_distances(*this, static_cast<Vertex>(s));
    best = std::max(best, *std::max_element(dist.begin(), dist.end()));
  }
  return best;
}

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

GraphTopology read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  long long n = -1;
  std::vector<std::pair<Vertex, Vertex>> pairs;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    if (is_blank(body)) continue;
    std::istringstream fields(body);
    if (n < 0) {
      if (!(fields >> n) || n < 0)
        raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected vertex count");
    } else {
      long long u = -1, v = -1;
      if (!(fields >> u >> v) || u < 0 || v < 0)
        raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected 'u v'");
      if (u >= n || v >= n)
        raise(ErrorCode::malformed_edge, "line " + std::to_string(line_no) + ": endpoint out of range");
      pairs.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    std::string extra;
    if (fields >> extra)
      raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": trailing tokens");
  }
  if (n < 0) raise(ErrorCode::parse_error, "missing vertex count");
  return GraphTopology::from_edge_list(static_cast<std::size_t>(n), pairs);
}

GraphTopology load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::parse_error, "cannot open edge list '" + path + "'");
  GraphTopology g = read_edge_list(in);
  g.set_description("file:" + path);
  return g;
}

void write_edge_list(std::ostream& out, const GraphTopology& g) {
  out << g.vertex_count() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

GraphTopology parse_graph_spec(std::string_view spec) {
  if (spec.starts_with("file:")) return load_edge_list(std::string(spec.substr(5)));
  if (spec.starts_with("named:")) {
    const auto rest = spec.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos)
      raise(ErrorCode::parse_error, "expected named:<kind>:<n>, got '" + std::string(spec) + "'");
    const auto kind = parse_named_graph(rest.substr(0, colon));
    const auto count = rest.substr(colon + 1);
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (ec != std::errc{} || ptr != count.data() + count.size())
      raise(ErrorCode::parse_error, "bad vertex count in '" + std::string(spec) + "'");
    return GraphTopology::build_named(kind, n);
  }
  raise(ErrorCode::parse_error, "graph spec must start with 'named:' or 'file:', got '" +
                                    std::string(spec) + "'");
}

}  // namespace coinflow
