#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coinflow/graph.hpp"
#include "coinflow/rng.hpp"
#include "coinflow/stats.hpp"
#include "test_util.hpp"

using namespace coinflow;
using coinflow::testing::fresh_dir;

namespace {

using Pairs = std::vector<std::pair<Vertex, Vertex>>;

GraphTopology from_pairs(std::size_t n, const Pairs& pairs) { return GraphTopology::from_edge_list(n, pairs); }

}  // namespace

TEST(Rng, SplitmixSeedingMatchesReference) {
  Xoshiro256 rng(0);
  const std::array<std::uint64_t, 4> expected{0xe220a8397b1dcdafULL, 0x6e789e6aa1b965f4ULL, 0x06c45d188009454fULL,
                                              0xf88bb8a8724c81ecULL};
  EXPECT_EQ(rng.state(), expected);
  EXPECT_EQ(rng(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(rng(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(rng(), 0x1a5f849d4933e6e0ULL);
}

TEST(Rng, BelowStaysInRange) {
  Xoshiro256 rng(3);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 5})
    for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(bound), bound);
}

TEST(Rng, ReplicaStreamsDifferAndAreReproducible) {
  auto a = Xoshiro256::for_replica(11, 2);
  auto b = Xoshiro256::for_replica(11, 2);
  auto c = Xoshiro256::for_replica(11, 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  Xoshiro256 manual(11);
  manual.jump();
  manual.jump();
  EXPECT_EQ(manual, a);
}

TEST(BuildNamed, EdgeCounts) {
  const auto k4 = GraphTopology::build_named(NamedGraph::complete, 4);
  EXPECT_EQ(k4.edge_count(), 6u);
  EXPECT_EQ(k4.directed_edges().size(), 12u);
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::path, 5).edge_count(), 4u);
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::cycle, 6).edge_count(), 6u);
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::star, 6).edge_count(), 5u);
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::cycle, 2).edge_count(), 1u);
}

TEST(BuildNamed, CycleThreeIsTriangle) {
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::cycle, 3).edges(),
            GraphTopology::build_named(NamedGraph::complete, 3).edges());
}

TEST(BuildNamed, RejectsTooFewVertices) {
  for (auto kind : {NamedGraph::complete, NamedGraph::path, NamedGraph::cycle, NamedGraph::star}) {
    EXPECT_ERROR(GraphTopology::build_named(kind, 1), invalid_size);
    EXPECT_ERROR(GraphTopology::build_named(kind, 0), invalid_size);
  }
}

TEST(BuildNamed, StarDegrees) {
  const auto g = GraphTopology::build_named(NamedGraph::star, 5);
  EXPECT_EQ(g.degree(0), 4u);
  for (Vertex v = 1; v < 5; ++v) EXPECT_EQ(g.degree(v), 1u);
}

TEST(GraphProperties, BfsReachesEverythingAndDirectedIsDoubled) {
  for (auto kind : {NamedGraph::complete, NamedGraph::path, NamedGraph::cycle, NamedGraph::star}) {
    for (std::size_t n = 2; n <= 9; ++n) {
      const auto g = GraphTopology::build_named(kind, n);
      for (auto d : bfs_distances(g, 0)) EXPECT_NE(d, SIZE_MAX);
      EXPECT_EQ(g.directed_edges().size(), 2 * g.edge_count());
      std::set<std::pair<Vertex, Vertex>> seen;
      for (const auto& e : g.directed_edges()) {
        EXPECT_NE(e.from, e.to);
        EXPECT_TRUE(seen.emplace(e.from, e.to).second);
      }
    }
  }
}

TEST(FromEdgeList, PathIsAccepted) {
  const auto g = from_pairs(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(g, GraphTopology::build_named(NamedGraph::path, 3));
}

TEST(FromEdgeList, NormalizesOrientation) {
  const auto g = from_pairs(3, {{2, 1}, {1, 0}});
  EXPECT_EQ(g.edges(), (Pairs{{0, 1}, {1, 2}}));
}

TEST(FromEdgeList, Errors) {
  EXPECT_ERROR(from_pairs(4, {{0, 1}, {2, 3}}), connectivity);
  EXPECT_ERROR(from_pairs(2, {{0, 0}}), malformed_edge);
  EXPECT_ERROR(from_pairs(3, {{0, 1}, {1, 0}, {1, 2}}), malformed_edge);
  EXPECT_ERROR(from_pairs(3, {{0, 1}, {1, 3}}), malformed_edge);
  EXPECT_ERROR(from_pairs(3, {}), empty_edge_set);
  EXPECT_ERROR(from_pairs(1, {}), invalid_size);
}

TEST(Sampling, TwoVertexGraphIsFair) {
  const auto g = GraphTopology::build_named(NamedGraph::complete, 2);
  Xoshiro256 rng(5);
  int forward = 0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) forward += g.sample_directed_edge(rng).from == 0;
  EXPECT_NEAR(forward / static_cast<double>(draws), 0.5, 5 * std::sqrt(0.25 / draws));
}

TEST(Sampling, UniformOverDirectedEdges) {
  for (auto kind : {NamedGraph::star, NamedGraph::path, NamedGraph::complete}) {
    const auto g = GraphTopology::build_named(kind, 6);
    const std::size_t k = g.directed_edges().size();
    Histogram hist(SupportWindow{0, static_cast<Balance>(k) - 1});
    std::map<std::pair<Vertex, Vertex>, Balance> index;
    for (std::size_t i = 0; i < k; ++i) index[{g.directed_edges()[i].from, g.directed_edges()[i].to}] = static_cast<Balance>(i);
    Xoshiro256 rng(2024);
    const std::uint64_t draws = 1000000;
    for (std::uint64_t i = 0; i < draws; ++i) {
      const auto e = g.sample_directed_edge(rng);
      hist.add(index.at({e.from, e.to}));
    }
    const double p = 1.0 / static_cast<double>(k);
    DensePmf uniform{0, std::vector<double>(k, p)};
    const auto chi = chi_square(hist, uniform);
    EXPECT_GT(chi.p_value, 0.001) << to_string(kind);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(draws));
    for (std::size_t i = 0; i < k; ++i) EXPECT_LT(std::abs(hist.frequency(static_cast<Balance>(i)) - p), 5 * sigma);
  }
}

TEST(Sampling, DeterministicForFixedSeed) {
  const auto g = GraphTopology::build_named(NamedGraph::cycle, 7);
  Xoshiro256 a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    const auto x = g.sample_directed_edge(a);
    const auto y = g.sample_directed_edge(b);
    EXPECT_EQ(x.from, y.from);
    EXPECT_EQ(x.to, y.to);
  }
}

TEST(Diameter, NamedGraphs) {
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::complete, 5).diameter(), 1u);
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::path, 5).diameter(), 4u);
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::cycle, 6).diameter(), 3u);
  EXPECT_EQ(GraphTopology::build_named(NamedGraph::star, 6).diameter(), 2u);
}

TEST(EdgeList, ReadWithComments) {
  std::istringstream in("# square with a tail\n5\n0 1\n1 2 # inline\n2 3\n3 0\n\n3 4\n");
  const auto g = read_edge_list(in);
  EXPECT_EQ(g.vertex_count(), 5u);
  EXPECT_EQ(g.edge_count(), 5u);
}

TEST(EdgeList, RoundTrip) {
  const auto g = GraphTopology::build_named(NamedGraph::star, 7);
  std::stringstream s;
  write_edge_list(s, g);
  EXPECT_EQ(read_edge_list(s), g);
}

TEST(EdgeList, MalformedInput) {
  std::istringstream missing_n("");
  EXPECT_ERROR(read_edge_list(missing_n), parse_error);
  std::istringstream half("3\n0 1\n2\n");
  EXPECT_ERROR(read_edge_list(half), parse_error);
  std::istringstream junk("3\n0 x\n");
  EXPECT_ERROR(read_edge_list(junk), parse_error);
}

TEST(GraphSpec, NamedAndFile) {
  const auto g = parse_graph_spec("named:complete:10");
  EXPECT_EQ(g.edge_count(), 45u);
  EXPECT_EQ(g.description(), "named:complete:10");

  const auto dir = fresh_dir("graph");
  const auto path = (dir / "ring.txt").string();
  {
    std::ofstream f(path);
    f << "4\n0 1\n1 2\n2 3\n3 0\n";
  }
  const auto h = parse_graph_spec("file:" + path);
  EXPECT_EQ(h, GraphTopology::build_named(NamedGraph::cycle, 4));
  EXPECT_EQ(h.description(), "file:" + path);

  EXPECT_ERROR(parse_graph_spec("named:torus:4"), parse_error);
  EXPECT_ERROR(parse_graph_spec("named:complete:x"), parse_error);
  EXPECT_ERROR(parse_graph_spec("complete:4"), parse_error);
  EXPECT_ERROR(parse_graph_spec("file:" + (dir / "missing.txt").string()), parse_error);
}
