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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gln/graph.hpp"

namespace gln {

// Every sampler is a pure function of (graph, arguments, seed). Each call
// draws from its own Rng stream keyed by an operation tag and the node id,
// so results do not depend on call order or on other threads.

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SampleScope {
  one_hop,
  two_hop,
  task_nodes,
  task_edges,
  negatives,
  corrupted_neighborhood,
};

std::string_view to_string(SampleScope scope);

struct SampleSpec {
  std::uint64_t seed = 0;
  std::size_t k = 1;
  SampleScope scope = SampleScope::one_hop;
};

// min(k, degree) distinct neighbors in draw order.
std::vector<TextGraph::Index> sample_neighbors(const TextGraph& g,
                                               TextGraph::Index v,
                                               std::size_t k,
                                               std::uint64_t seed);
std::vector<NodeId> sample_neighbors(const TextGraph& g, const NodeId& v,
                                     std::size_t k, std::uint64_t seed);

struct TwoHopSample {
  std::vector<TextGraph::Index> one_hop;
  // Nodes at shortest-path distance exactly 2.
  std::vector<TextGraph::Index> two_hop;
};

TwoHopSample sample_two_hop(const TextGraph& g, TextGraph::Index v,
                            std::size_t k1, std::size_t k2, std::uint64_t seed);

// true_k real neighbors plus noise_k nodes outside {v} and its neighborhood,
// shuffled together. With noise_k == 0 this is exactly
// sample_neighbors(g, v, true_k, seed).
std::vector<TextGraph::Index> corrupt_neighborhood(const TextGraph& g,
                                                   TextGraph::Index v,
                                                   std::size_t true_k,
                                                   std::size_t noise_k,
                                                   std::uint64_t seed);

// n distinct nodes with degree >= min_degree.
std::vector<NodeId> sample_task_nodes(const TextGraph& g, std::size_t n,
                                      std::size_t min_degree,
                                      std::uint64_t seed);

// n distinct edges whose endpoints both have degree > min_degree. Each edge
// keeps its stored orientation.
std::vector<TextGraph::Edge> sample_task_edges(const TextGraph& g,
                                               std::size_t n,
                                               std::size_t min_degree,
                                               std::uint64_t seed);

// m distinct nodes, none of them anchor or true_node, none adjacent to anchor.
std::vector<TextGraph::Index> sample_negatives(const TextGraph& g,
                                               TextGraph::Index anchor,
                                               TextGraph::Index true_node,
                                               std::size_t m,
                                               std::uint64_t seed);

// Persisted selection: {"kind": ..., "seed": ..., "items": [...]}.
struct SampleManifest {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<nlohmann::json> items;
};

void append_manifest(const std::filesystem::path& file,
                     const SampleManifest& manifest);
std::vector<SampleManifest> read_manifests(const std::filesystem::path& file);

}  // namespace gln
