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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gln {

enum class DomainTag { citation, co_purchase, hyperlink };

std::string_view to_string(DomainTag tag);
DomainTag parse_domain_tag(std::string_view text);

// Opaque node identifier. Non-empty, unique within a graph.
struct NodeId {
  std::string value;

  NodeId() = default;
  explicit NodeId(std::string v) : value(std::move(v)) {}

  friend bool operator==(const NodeId&, const NodeId&) = default;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

enum class GraphErrc {
  missing_file,
  malformed_record,
  dangling_endpoint,
  empty_text,
  count_mismatch,
  duplicate_node,
  unknown_node,
  invalid_argument,
};

class GraphError : public std::runtime_error {
 public:
  GraphError(GraphErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  GraphErrc code() const noexcept { return code_; }

 private:
  GraphErrc code_;
};

}  // namespace gln

template <>
struct std::hash<gln::NodeId> {
  std::size_t operator()(const gln::NodeId& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};

namespace gln {

// Immutable undirected graph whose nodes carry a text attribute.
//
// Nodes are addressed either by NodeId or by their dense index (position in
// load order). Adjacency lists hold indices sorted ascending, which fixes the
// population order every sampler draws from.
class TextGraph {
 public:
  using Index = std::uint32_t;

  // An edge in its stored orientation (first occurrence in the source).
  struct Edge {
    Index src;
    Index dst;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  struct BuildStats {
    std::size_t duplicate_edges = 0;
    std::size_t self_loops = 0;
  };

  // Validates and assembles a graph. Duplicate edges (either orientation)
  // and self-loops are dropped and counted in stats(). Empty node text is an
  // error unless `allow_empty_text` is set (used for corrupted copies).
  static TextGraph build(std::vector<std::pair<std::string, std::string>> nodes,
                         const std::vector<std::pair<std::string, std::string>>& edges,
                         DomainTag domain, bool allow_empty_text = false);

  std::size_t node_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  DomainTag domain() const noexcept { return domain_; }
  const BuildStats& stats() const noexcept { return stats_; }

  const NodeId& id(Index i) const { return ids_.at(i); }
  const std::string& text(Index i) const { return texts_.at(i); }
  const std::string& text(const NodeId& v) const { return texts_[index_of(v)]; }

  bool contains(const NodeId& v) const { return index_.contains(v); }
  std::optional<Index> find(const NodeId& v) const;
  // Throws GraphError(unknown_node).
  Index index_of(const NodeId& v) const;

  std::span<const Index> neighbor_indices(Index i) const {
    return adjacency_.at(i);
  }
  std::vector<NodeId> neighbors(const NodeId& v) const;
  std::size_t degree(const NodeId& v) const {
    return adjacency_[index_of(v)].size();
  }
  std::size_t degree(Index i) const { return adjacency_.at(i).size(); }
  bool adjacent(Index a, Index b) const;
  // Digest of ids, texts and edges.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }

  // Same topology, new attribute texts (one per node, index order).
  TextGraph with_texts(std::vector<std::string> texts,
                       bool allow_empty_text = false) const;

  // Copy without the given edges (matched as unordered pairs).
  TextGraph without_edges(std::span<const Edge> removed) const;

 private:
  TextGraph() = default;
  void rebuild_adjacency();
  void refresh_fingerprint();

  std::vector<NodeId> ids_;
  std::vector<std::string> texts_;
  std::unordered_map<NodeId, Index> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Index>> adjacency_;
  DomainTag domain_ = DomainTag::citation;
  BuildStats stats_;
  std::string fingerprint_;
};

// Graph bundle directory: meta.json, nodes.jsonl, edges.jsonl and an
// optional labels.jsonl.
TextGraph load_graph(const std::filesystem::path& bundle, DomainTag domain);
// Same, taking the domain from meta.json.
TextGraph load_graph(const std::filesystem::path& bundle);
void save_graph(const TextGraph& g, const std::filesystem::path& bundle);

// labels.jsonl, if present; ordered by node id.
std::optional<std::map<NodeId, std::string>> load_labels(
    const std::filesystem::path& bundle);
void save_labels(const std::map<NodeId, std::string>& labels,
                 const std::filesystem::path& bundle);

// Maximal whitespace-delimited tokens.
std::vector<std::string_view> split_words(std::string_view text);

struct CorruptionReport {
  TextGraph graph;
  std::size_t words_removed = 0;
  // Nodes whose text became empty.
  std::vector<NodeId> emptied;
};

// Removes floor(ratio * w) of each node's w words uniformly at random,
// keeping survivors in order. Topology is untouched.
CorruptionReport corrupt_attributes(const TextGraph& g, double removal_ratio,
                                    std::uint64_t seed);

}  // namespace gln
