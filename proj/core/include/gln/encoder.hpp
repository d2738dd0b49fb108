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
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gln/gateway.hpp"
#include "gln/graph.hpp"
#include "gln/prompts.hpp"

namespace gln {

// Texts of one node for layers 0..L. Layer 0 is the node's attribute as seen
// by the encoder (after corruption or denoising, if those ran).
struct LayeredRepresentation {
  NodeId node;
  std::map<int, std::string> texts;
  std::string config_hash;

  // texts[1..L] only, the shape render_final_representation expects.
  std::map<int, std::string> refined() const;
};

class CacheIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Content-addressed store of representations keyed by
// (node, layer, config hash). On disk: one JSONL shard per config hash,
// records {"node", "layer", "text", "prompt_tokens", "completion_tokens"}.
// A key is write-once; writing different text to it throws
// CacheIntegrityError.
class RepresentationCache {
 public:
  struct Entry {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
  };

  RepresentationCache() = default;  // memory only
  explicit RepresentationCache(std::filesystem::path dir);

  std::optional<Entry> get(const NodeId& node, int layer,
                           const std::string& config_hash) const;
  void put(const NodeId& node, int layer, const std::string& config_hash,
           const Entry& entry);
  std::size_t size(const std::string& config_hash) const;
  std::filesystem::path shard_path(const std::string& config_hash) const;

 private:
  using Shard = std::unordered_map<std::string, Entry>;
  Shard& shard_locked(const std::string& config_hash) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, Shard> shards_;
};

// Nodes whose layer-l text is needed, for l = 0..L, plus the fixed neighbor
// list each refined node aggregates from.
struct ReceptiveFieldPlan {
  int layers = 0;
  // required[l] sorted ascending; required[L] are the targets.
  std::vector<std::vector<TextGraph::Index>> required;
  std::unordered_map<TextGraph::Index, std::vector<TextGraph::Index>> neighbor_lists;

  // Sum over l >= 1 of |required[l]|.
  std::size_t size() const;
  // Backend calls a cold run issues: size() minus refinements of nodes
  // without neighbors (those copy the previous layer forward).
  std::size_t call_count() const;
};

// Replaces the neighbor lists of the given nodes (used for corrupted
// neighborhoods).
using NeighborOverrides =
    std::unordered_map<TextGraph::Index, std::vector<TextGraph::Index>>;

ReceptiveFieldPlan plan_receptive_field(const TextGraph& g,
                                        std::span<const NodeId> targets,
                                        const EncoderConfig& cfg,
                                        const NeighborOverrides* overrides = nullptr);

struct EncodeKey {
  NodeId node;
  int layer = 0;
};

// Thrown when a run stops early. Completed entries stay in the cache; a
// rerun with the same inputs resumes from `remaining`.
class EncodeAborted : public std::runtime_error {
 public:
  EncodeAborted(const std::string& what, GatewayErrc code,
                std::vector<EncodeKey> remaining)
      : std::runtime_error(what), code_(code), remaining_(std::move(remaining)) {}
  GatewayErrc code() const noexcept { return code_; }
  const std::vector<EncodeKey>& remaining() const noexcept { return remaining_; }

 private:
  GatewayErrc code_;
  std::vector<EncodeKey> remaining_;
};

struct EncodeOptions {
  std::size_t concurrency = 4;
  int max_output_tokens = 1024;
};

struct EncodeStats {
  std::size_t plan_size = 0;
  std::size_t planned_calls = 0;
  std::size_t gateway_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t copied_forward = 0;
  // Token cost of every text the run used, whether fresh or cached; one
  // record per (node, layer) backend output. Identical on warm reruns.
  std::vector<UsageRecord> usage;
};

class Encoder {
 public:
  Encoder(Gateway& gateway, RepresentationCache& cache,
          const TemplatePack& pack = TemplatePack::builtin(),
          EncodeOptions opts = {});

  std::map<NodeId, LayeredRepresentation> encode(const TextGraph& g,
                                                 std::span<const NodeId> targets,
                                                 const EncoderConfig& cfg);

  // As encode(), but each target aggregates from corrupt_neighborhood()
  // (true_k real + noise_k random non-neighbors) at every layer.
  std::map<NodeId, LayeredRepresentation> encode_corrupted(
      const TextGraph& g, std::span<const NodeId> targets, const EncoderConfig& cfg,
      std::size_t true_k, std::size_t noise_k);

  // Replaces attributes with the backend's key-concept extraction. When
  // `only` is given, other nodes keep their text.
  TextGraph denoise_attributes(const TextGraph& g,
                               std::optional<std::span<const NodeId>> only = std::nullopt);

  // Key under which representations of g under cfg are cached.
  std::string cache_hash(const TextGraph& g, const EncoderConfig& cfg,
                         std::string_view salt = {}) const;

  const EncodeStats& last_stats() const noexcept { return stats_; }

 private:
  std::map<NodeId, LayeredRepresentation> run(const TextGraph& g,
                                              std::span<const NodeId> targets,
                                              const EncoderConfig& cfg,
                                              const NeighborOverrides* overrides,
                                              std::string_view salt);
  std::map<NodeId, LayeredRepresentation> run_all_in_one(const TextGraph& g,
                                                         std::span<const NodeId> targets,
                                                         const EncoderConfig& cfg);

  Gateway& gateway_;
  RepresentationCache& cache_;
  const TemplatePack& pack_;
  EncodeOptions opts_;
  EncodeStats stats_;
};

}  // namespace gln
