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
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gln/graph.hpp"

namespace gln::testing {

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "graph",    "neural",   "language", "model",   "citation", "network",  "learning",
      "semantic", "node",     "edge",     "message", "passing",  "attention", "residual",
      "layer",    "text",     "encoder",  "sampling", "benchmark", "retrieval", "protein",
      "vision",   "robust",   "sparse",   "kernel",  "spectral", "optimizer", "dataset"};
  return words;
}

// A few sentences of filler built from the vocabulary.
inline std::string random_text(std::mt19937_64& rng, int min_words = 8, int max_words = 40) {
  const auto& vocab = vocabulary();
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  const int n = len(rng);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += (i % 9 == 0) ? ". " : " ";
    out += vocab[pick(rng)];
  }
  out += '.';
  return out;
}

struct FixtureSpec {
  std::size_t nodes = 30;
  double edge_prob = 0.15;
  std::uint64_t seed = 1;
  DomainTag domain = DomainTag::citation;
  // Keeps every node at degree >= 1 by chaining stragglers.
  bool connect_isolated = true;
};

inline TextGraph random_graph(const FixtureSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<std::pair<std::string, std::string>> nodes;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    nodes.emplace_back("n" + std::to_string(i), random_text(rng));
  }
  std::bernoulli_distribution coin(spec.edge_prob);
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<int> degree(spec.nodes, 0);
  for (std::size_t a = 0; a < spec.nodes; ++a) {
    for (std::size_t b = a + 1; b < spec.nodes; ++b) {
      if (!coin(rng)) continue;
      // Random orientation, so anchors are not always the lower id.
      if (rng() & 1) {
        edges.emplace_back(nodes[a].first, nodes[b].first);
      } else {
        edges.emplace_back(nodes[b].first, nodes[a].first);
      }
      ++degree[a];
      ++degree[b];
    }
  }
  if (spec.connect_isolated) {
    for (std::size_t a = 0; a < spec.nodes; ++a) {
      if (degree[a] == 0) {
        const auto b = (a + 1) % spec.nodes;
        edges.emplace_back(nodes[a].first, nodes[b].first);
        ++degree[a];
        ++degree[b];
      }
    }
  }
  return TextGraph::build(std::move(nodes), edges, spec.domain);
}

// Random graph where every node has degree >= min_degree: a ring lattice of
// half-width min_degree/2+1 plus random chords.
inline TextGraph dense_graph(std::size_t n, std::size_t min_degree, std::size_t chords,
                             std::uint64_t seed, DomainTag domain = DomainTag::citation) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::string, std::string>> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.emplace_back("v" + std::to_string(i), random_text(rng, 4, 12));
  std::vector<std::pair<std::string, std::string>> edges;
  const std::size_t half = min_degree / 2 + 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 1; d <= half; ++d) edges.emplace_back(nodes[i].first, nodes[(i + d) % n].first);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t c = 0; c < chords; ++c) {
    edges.emplace_back(nodes[pick(rng)].first, nodes[pick(rng)].first);
  }
  return TextGraph::build(std::move(nodes), edges, domain);
}

inline std::map<NodeId, std::string> random_labels(const TextGraph& g, std::size_t classes,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, classes - 1);
  std::map<NodeId, std::string> labels;
  for (TextGraph::Index v = 0; v < g.node_count(); ++v) {
    labels[g.id(v)] = "class_" + std::to_string(pick(rng));
  }
  return labels;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gln_" + name + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// BFS distances from v.
inline std::vector<int> bfs_distances(const TextGraph& g, TextGraph::Index v) {
  std::vector<int> dist(g.node_count(), -1);
  std::vector<TextGraph::Index> queue{v};
  dist[v] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    for (auto w : g.neighbor_indices(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace gln::testing
