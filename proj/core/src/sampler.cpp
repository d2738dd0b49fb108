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

#include "gln/sampler.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gln/rng.hpp"

namespace gln {

using Index = TextGraph::Index;

std::string_view to_string(SampleScope scope) {
  switch (scope) {
    case SampleScope::one_hop:
      return "one_hop";
    case SampleScope::two_hop:
      return "two_hop";
    case SampleScope::task_nodes:
      return "task_nodes";
    case SampleScope::task_edges:
      return "task_edges";
    case SampleScope::negatives:
      return "negatives";
    case SampleScope::corrupted_neighborhood:
      return "corrupted_neighborhood";
  }
  return "one_hop";
}

namespace {

void require_k(std::size_t k) {
  if (k < 1) throw SamplingError("sample size must be >= 1");
}

void require_node(const TextGraph& g, Index v) {
  if (v >= g.node_count()) throw GraphError(GraphErrc::unknown_node, "unknown node index");
}

// Uniform sample of size k from `population` (consumed), in draw order.
template <typename T>
std::vector<T> draw(std::vector<T> population, std::size_t k, Rng& rng) {
  k = std::min(k, population.size());
  rng.select_prefix(std::span(population), k);
  population.resize(k);
  return population;
}

}  // namespace

std::vector<Index> sample_neighbors(const TextGraph& g, Index v, std::size_t k,
                                    std::uint64_t seed) {
  require_node(g, v);
  require_k(k);
  const auto nbrs = g.neighbor_indices(v);
  Rng rng(seed, "neighbors", g.id(v).value);
  return draw(std::vector<Index>(nbrs.begin(), nbrs.end()), k, rng);
}

std::vector<NodeId> sample_neighbors(const TextGraph& g, const NodeId& v,
                                     std::size_t k, std::uint64_t seed) {
  std::vector<NodeId> out;
  for (Index i : sample_neighbors(g, g.index_of(v), k, seed)) out.push_back(g.id(i));
  return out;
}

TwoHopSample sample_two_hop(const TextGraph& g, Index v, std::size_t k1,
                            std::size_t k2, std::uint64_t seed) {
  require_node(g, v);
  require_k(k1);
  require_k(k2);
  TwoHopSample out;
  out.one_hop = sample_neighbors(g, v, k1, seed);

  std::vector<bool> near(g.node_count(), false);
  near[v] = true;
  for (Index u : g.neighbor_indices(v)) near[u] = true;
  std::vector<Index> ring;
  for (Index u : g.neighbor_indices(v)) {
    for (Index w : g.neighbor_indices(u)) {
      if (!near[w]) {
        near[w] = true;
        ring.push_back(w);
      }
    }
  }
  std::sort(ring.begin(), ring.end());
  Rng rng(seed, "two_hop", g.id(v).value);
  out.two_hop = draw(std::move(ring), k2, rng);
  return out;
}

std::vector<Index> corrupt_neighborhood(const TextGraph& g, Index v,
                                        std::size_t true_k, std::size_t noise_k,
                                        std::uint64_t seed) {
  require_node(g, v);
  require_k(true_k);
  if (g.degree(v) < true_k) {
    throw SamplingError("insufficient degree: node '" + g.id(v).value +
                        "' has " + std::to_string(g.degree(v)) +
                        " neighbors, need " + std::to_string(true_k));
  }
  if (g.node_count() <= true_k + noise_k) {
    throw SamplingError("graph too small for corrupted neighborhood");
  }
  std::vector<Index> out = sample_neighbors(g, v, true_k, seed);
  if (noise_k == 0) return out;

  std::vector<Index> outside;
  for (Index u = 0; u < g.node_count(); ++u) {
    if (u != v && !g.adjacent(v, u)) outside.push_back(u);
  }
  if (outside.size() < noise_k) {
    throw SamplingError("graph too small: not enough non-neighbors of '" +
                        g.id(v).value + "'");
  }
  Rng noise_rng(seed, "corrupt_noise", g.id(v).value);
  for (Index u : draw(std::move(outside), noise_k, noise_rng)) out.push_back(u);
  Rng mix_rng(seed, "corrupt_shuffle", g.id(v).value);
  mix_rng.shuffle(std::span(out));
  return out;
}

std::vector<NodeId> sample_task_nodes(const TextGraph& g, std::size_t n,
                                      std::size_t min_degree,
                                      std::uint64_t seed) {
  require_k(n);
  std::vector<Index> eligible;
  for (Index v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) >= min_degree) eligible.push_back(v);
  }
  if (eligible.size() < n) {
    throw SamplingError("insufficient eligible nodes: " +
                        std::to_string(eligible.size()) + " have degree >= " +
                        std::to_string(min_degree) + ", need " +
                        std::to_string(n));
  }
  Rng rng(seed, "task_nodes");
  std::vector<NodeId> out;
  for (Index v : draw(std::move(eligible), n, rng)) out.push_back(g.id(v));
  return out;
}

std::vector<TextGraph::Edge> sample_task_edges(const TextGraph& g,
                                               std::size_t n,
                                               std::size_t min_degree,
                                               std::uint64_t seed) {
  require_k(n);
  std::vector<TextGraph::Edge> eligible;
  for (const auto& e : g.edges()) {
    if (g.degree(e.src) > min_degree && g.degree(e.dst) > min_degree) {
      eligible.push_back(e);
    }
  }
  if (eligible.size() < n) {
    throw SamplingError("insufficient eligible edges: " +
                        std::to_string(eligible.size()) +
                        " have both endpoint degrees > " +
                        std::to_string(min_degree) + ", need " +
                        std::to_string(n));
  }
  Rng rng(seed, "task_edges");
  return draw(std::move(eligible), n, rng);
}

std::vector<Index> sample_negatives(const TextGraph& g, Index anchor,
                                    Index true_node, std::size_t m,
                                    std::uint64_t seed) {
  require_node(g, anchor);
  require_node(g, true_node);
  require_k(m);
  if (g.node_count() <= m + 2) {
    throw SamplingError("graph too small to supply " + std::to_string(m) +
                        " negatives");
  }
  std::vector<Index> pool;
  for (Index u = 0; u < g.node_count(); ++u) {
    if (u != anchor && u != true_node && !g.adjacent(anchor, u)) pool.push_back(u);
  }
  if (pool.size() < m) {
    throw SamplingError("graph too small: only " + std::to_string(pool.size()) +
                        " nodes are non-adjacent to '" + g.id(anchor).value + "'");
  }
  Rng rng(seed, "negatives", g.id(anchor).value + "\x1f" + g.id(true_node).value);
  return draw(std::move(pool), m, rng);
}

void append_manifest(const std::filesystem::path& file,
                     const SampleManifest& manifest) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::app);
  nlohmann::json rec = {{"kind", manifest.kind},
                        {"seed", manifest.seed},
                        {"items", manifest.items}};
  out << rec.dump() << '\n';
}

std::vector<SampleManifest> read_manifests(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw SamplingError("cannot open sampling manifest " + file.string());
  std::vector<SampleManifest> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    SampleManifest m;
    m.kind = rec.at("kind").get<std::string>();
    m.seed = rec.at("seed").get<std::uint64_t>();
    for (const auto& item : rec.at("items")) m.items.push_back(item);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace gln
