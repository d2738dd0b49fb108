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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gln/encoder.hpp"
#include "gln/gateway.hpp"
#include "gln/graph.hpp"
#include "gln/prompts.hpp"

namespace gln {

// --- answer contract ---------------------------------------------------------

enum class ParseFailure { none, no_answer_line, no_match, multiple_matches };
std::string_view to_string(ParseFailure f);

struct ParsedAnswer {
  std::optional<std::string> choice;
  ParseFailure failure = ParseFailure::none;
  bool ok() const noexcept { return choice.has_value(); }
};

// Finds "ANSWER:" lines and matches their value case-insensitively against
// the valid choices. Exactly one distinct choice must match.
ParsedAnswer parse_answer(std::string_view text, std::span<const std::string> valid_choices);

// --- task items --------------------------------------------------------------

enum class TaskKind { classification, link };
std::string_view to_string(TaskKind k);

struct TaskItem {
  TaskKind kind = TaskKind::classification;
  // classification
  NodeId target;
  std::optional<std::string> gold_label;
  // link
  NodeId anchor;
  NodeId true_node;
  std::vector<NodeId> candidates;
  int gold_index = -1;
};

nlohmann::json to_json(const TaskItem& item);
TaskItem task_item_from_json(const nlohmann::json& j);

// Distinct labels, sorted.
std::vector<std::string> class_list(const std::map<NodeId, std::string>& labels);

std::vector<TaskItem> build_classification_items(const TextGraph& g,
                                                 const std::map<NodeId, std::string>& labels,
                                                 std::size_t n, std::size_t min_degree,
                                                 std::uint64_t seed);

// One item per sampled edge: the stored first endpoint is the anchor, the
// candidates are the other endpoint plus `negatives` non-neighbors of the
// anchor, shuffled under the seed.
std::vector<TaskItem> build_link_items(const TextGraph& g, std::size_t n,
                                       std::size_t min_degree, std::size_t negatives,
                                       std::uint64_t seed);

// The graph link items are encoded on: g without any (anchor, true_node)
// edge.
TextGraph link_working_graph(const TextGraph& g, std::span<const TaskItem> items);

// --- reports -----------------------------------------------------------------

struct ItemRecord {
  std::size_t item = 0;
  std::string subject;  // target id, or anchor id for link items
  std::string prediction;
  std::string gold;
  bool correct = false;
  int parse_failures = 0;  // failed parse attempts, 0..2
  int retries = 0;
  std::string response;
};

struct EvalReport {
  TaskKind kind = TaskKind::classification;
  std::string label;
  std::string config_hash;
  std::vector<ItemRecord> records;
  double metric = 0.0;
  std::size_t correct = 0;
  // Items still unparsed after the retry; they are scored incorrect.
  std::size_t parse_failures = 0;
  // Token cost of the representations and task responses behind the report,
  // counted from their recorded usage whether served fresh or from cache.
  UsageSummary encode_usage;
  UsageSummary task_usage;
};

// Accuracy or HR@1: mean of the per-item correctness indicator.
double recompute_metric(std::span<const ItemRecord> records);

nlohmann::json to_json(const EvalReport& report);
// With a run hash, every line carries it as "run_hash".
void write_records_jsonl(const EvalReport& report, const std::filesystem::path& file,
                         std::string_view run_hash = {});
std::vector<ItemRecord> read_records_jsonl(const std::filesystem::path& file);

// --- runners -----------------------------------------------------------------

// Neighborhood corruption applied while encoding task targets.
struct NeighborCorruption {
  std::size_t true_k = 7;
  std::size_t noise_k = 3;
};

struct EvalContext {
  Encoder& encoder;
  Gateway& task_gateway;
  const TemplatePack& pack = TemplatePack::builtin();
  std::size_t concurrency = 4;
  int max_output_tokens = 256;
  std::optional<NeighborCorruption> corruption;
};

EvalReport run_node_classification(const TextGraph& g, std::span<const TaskItem> items,
                                   std::span<const std::string> classes,
                                   const EncoderConfig& cfg, EvalContext& ctx);

EvalReport run_link_prediction(const TextGraph& g, std::span<const TaskItem> items,
                               const EncoderConfig& cfg, EvalContext& ctx);

struct AblationRow {
  bool graph_attention = false;
  bool initial_residual = false;
  std::optional<EvalReport> node;
  std::optional<EvalReport> link;
};

// Both tasks under the four (graph_attention x initial_residual) settings,
// sharing items and seeds. Either item list may be empty to skip that task.
std::vector<AblationRow> run_ablation_grid(const TextGraph& g,
                                           std::span<const TaskItem> node_items,
                                           std::span<const std::string> classes,
                                           std::span<const TaskItem> link_items,
                                           const EncoderConfig& base, EvalContext& ctx);

std::string ablation_table(std::span<const AblationRow> rows);
std::string ablation_csv(std::span<const AblationRow> rows);

}  // namespace gln
