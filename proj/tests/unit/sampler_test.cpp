// Copyright 2026 The GLN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "gln/sampler.hpp"

namespace gln {
namespace {

using Index = TextGraph::Index;

TEST(Sampler, NeighborsAreDistinctAdjacentAndCapped) {
  const auto g = testing::random_graph({.nodes = 40, .edge_prob = 0.3, .seed = 2});
  for (Index v = 0; v < g.node_count(); ++v) {
    for (std::size_t k : {1u, 3u, 10u, 100u}) {
      const auto s = sample_neighbors(g, v, k, 17);
      EXPECT_EQ(s.size(), std::min(k, g.degree(v)));
      EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), s.size());
      for (auto u : s) EXPECT_TRUE(g.adjacent(v, u));
      EXPECT_EQ(s, sample_neighbors(g, v, k, 17));
    }
  }
}

TEST(Sampler, NodeIdOverloadAgrees) {
  const auto g = testing::random_graph({.nodes = 20, .seed = 3});
  const auto by_index = sample_neighbors(g, Index{4}, 3, 5);
  const auto by_id = sample_neighbors(g, g.id(4), 3, 5);
  ASSERT_EQ(by_index.size(), by_id.size());
  for (std::size_t i = 0; i < by_id.size(); ++i) EXPECT_EQ(g.id(by_index[i]), by_id[i]);
}

TEST(Sampler, ZeroKIsRejected) {
  const auto g = testing::random_graph({.nodes = 10, .seed = 3});
  EXPECT_THROW(sample_neighbors(g, Index{0}, 0, 1), SamplingError);
}

// Chi-square over which neighbor lands in a 1-sample, across many seeds.
TEST(Sampler, SingleDrawIsUniform) {
  std::vector<std::pair<std::string, std::string>> nodes = {{"hub", "h"}};
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < 8; ++i) {
    nodes.emplace_back("s" + std::to_string(i), "t");
    edges.emplace_back("hub", "s" + std::to_string(i));
  }
  const auto g = TextGraph::build(nodes, edges, DomainTag::citation);
  std::map<Index, int> counts;
  const int trials = 16000;
  for (int seed = 0; seed < trials; ++seed) ++counts[sample_neighbors(g, Index{0}, 1, seed)[0]];
  ASSERT_EQ(counts.size(), 8u);
  double chi2 = 0;
  const double expected = trials / 8.0;
  for (const auto& [_, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 24.32);  // 7 dof, p = 0.999
}

TEST(Sampler, TwoHopMatchesBfs) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto g = testing::random_graph({.nodes = 45, .edge_prob = 0.08, .seed = seed});
    for (Index v = 0; v < g.node_count(); ++v) {
      const auto dist = testing::bfs_distances(g, v);
      std::size_t ring = 0;
      for (int d : dist) ring += d == 2;
      const auto s = sample_two_hop(g, v, 5, 6, seed);
      EXPECT_EQ(s.one_hop, sample_neighbors(g, v, 5, seed));
      EXPECT_EQ(s.two_hop.size(), std::min<std::size_t>(6, ring));
      for (auto u : s.two_hop) EXPECT_EQ(dist[u], 2);
    }
  }
}

TEST(Sampler, CorruptNeighborhoodMix) {
  const auto g = testing::dense_graph(60, 8, 40, 4);
  for (Index v = 0; v < g.node_count(); ++v) {
    const auto s = corrupt_neighborhood(g, v, 7, 3, 9);
    ASSERT_EQ(s.size(), 10u);
    int real = 0, noise = 0;
    for (auto u : s) {
      EXPECT_NE(u, v);
      (g.adjacent(v, u) ? real : noise)++;
    }
    EXPECT_EQ(real, 7);
    EXPECT_EQ(noise, 3);
    EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), 10u);
  }
}

TEST(Sampler, CorruptNeighborhoodDegenerateCase) {
  const auto g = testing::dense_graph(30, 10, 0, 4);
  EXPECT_EQ(corrupt_neighborhood(g, Index{3}, 10, 0, 5), sample_neighbors(g, Index{3}, 10, 5));
  EXPECT_THROW(corrupt_neighborhood(g, Index{3}, 50, 0, 5), SamplingError);
  EXPECT_THROW(corrupt_neighborhood(g, Index{3}, 7, 25, 5), SamplingError);
}

TEST(Sampler, TaskNodesRespectThreshold) {
  const auto g = testing::random_graph({.nodes = 80, .edge_prob = 0.1, .seed = 8});
  const auto nodes = sample_task_nodes(g, 20, 6, 1);
  EXPECT_EQ(std::set<NodeId>(nodes.begin(), nodes.end()).size(), 20u);
  for (const auto& id : nodes) EXPECT_GE(g.degree(id), 6u);
  EXPECT_EQ(nodes, sample_task_nodes(g, 20, 6, 1));
  EXPECT_NE(nodes, sample_task_nodes(g, 20, 6, 2));
  EXPECT_THROW(sample_task_nodes(g, 81, 0, 1), SamplingError);
}

TEST(Sampler, TaskEdgesUseStrictThreshold) {
  const auto g = testing::random_graph({.nodes = 80, .edge_prob = 0.1, .seed = 8});
  const auto edges = sample_task_edges(g, 30, 6, 1);
  EXPECT_EQ(edges.size(), 30u);
  for (const auto& e : edges) {
    EXPECT_GT(g.degree(e.src), 6u);
    EXPECT_GT(g.degree(e.dst), 6u);
    EXPECT_NE(std::find(g.edges().begin(), g.edges().end(), e), g.edges().end());
  }
  EXPECT_THROW(sample_task_edges(g, 30, 1000, 1), SamplingError);
}

TEST(Sampler, NegativesAvoidAnchorNeighborhood) {
  const auto g = testing::random_graph({.nodes = 50, .edge_prob = 0.1, .seed = 12});
  for (const auto& e : g.edges()) {
    const auto neg = sample_negatives(g, e.src, e.dst, 4, 3);
    ASSERT_EQ(neg.size(), 4u);
    EXPECT_EQ(std::set<Index>(neg.begin(), neg.end()).size(), 4u);
    for (auto u : neg) {
      EXPECT_NE(u, e.src);
      EXPECT_NE(u, e.dst);
      EXPECT_FALSE(g.adjacent(e.src, u));
    }
  }
  const auto small = TextGraph::build({{"a", "x"}, {"b", "y"}, {"c", "z"}}, {{"a", "b"}},
                                      DomainTag::citation);
  EXPECT_THROW(sample_negatives(small, 0, 1, 4, 1), SamplingError);
}

TEST(Sampler, ManifestRoundTrip) {
  testing::TempDir dir("manifest");
  const auto file = dir / "sampling.jsonl";
  append_manifest(file, {"task_nodes", 3, {nlohmann::json("n1"), nlohmann::json("n2")}});
  append_manifest(file, {"task_edges", 4, {nlohmann::json::array({"a", "b"})}});
  const auto back = read_manifests(file);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].kind, "task_nodes");
  EXPECT_EQ(back[0].items.size(), 2u);
  EXPECT_EQ(back[1].seed, 4u);
}

}  // namespace
}  // namespace gln
