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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gln/gateway.hpp"
#include "gln/graph.hpp"
#include "gln/prompts.hpp"

namespace gln::cli {

struct BackendSpec {
  // mock | openai | anthropic
  std::string kind = "mock";
  std::string model;
  std::string base_url;
  std::string path;
  std::string api_key_env;
  double requests_per_minute = 0.0;
  int max_in_flight = 4;
  int max_attempts = 5;
  int timeout_s = 60;
  // Mock only; 0 = unbounded.
  std::int64_t context_window = 0;

  bool is_mock() const { return kind == "mock"; }
};

struct TaskSpec {
  // node-classification | link-prediction
  std::string kind = "node-classification";
  // 0 = protocol default: 1000 nodes, or 500 edges.
  std::size_t n = 0;
  std::size_t min_degree = 10;
  std::size_t negatives = 4;
  std::uint64_t seed = 0;
  int max_output_tokens = 256;

  bool is_link() const { return kind == "link-prediction"; }
  std::size_t effective_n() const { return n ? n : (is_link() ? 500 : 1000); }
};

struct JudgeSpec {
  std::size_t n = 100;
  std::size_t min_degree = 1;
  std::uint64_t seed = 0;
};

struct CorruptSpec {
  // neighborhood | attributes
  std::string mode = "neighborhood";
  std::size_t true_k = 7;
  std::size_t noise_k = 3;
  double attribute_ratio = 0.3;
};

struct SweepSpec {
  std::vector<std::size_t> neighbor_k = {3, 5, 10};
  std::vector<OutputConstraint> output_constraints = {OutputConstraint::two_paragraphs,
                                                      OutputConstraint::three_sentences};
};

struct BudgetSpec {
  // Per backend role; 0 = unlimited (mock only).
  std::size_t max_calls = 0;
  std::int64_t max_total_tokens = 0;
};

struct RunConfig {
  std::filesystem::path bundle;
  std::optional<DomainTag> domain;
  EncoderConfig encoder;
  int encode_max_output_tokens = 1024;
  std::size_t concurrency = 4;
  TaskSpec task;
  JudgeSpec judge;
  CorruptSpec corrupt;
  SweepSpec sweep;
  BackendSpec encoder_backend;
  BackendSpec task_backend;
  BackendSpec judge_backend;
  BudgetSpec budget;
  std::filesystem::path out = "out";
  // Defaults to <out>/cache.
  std::filesystem::path cache_dir;

  std::filesystem::path cache_root() const { return cache_dir.empty() ? out / "cache" : cache_dir; }

  // Everything that can change an artifact, keys sorted. Paths for output,
  // cache and budget caps are left out.
  nlohmann::json canonical() const;
  // Full configuration, for the manifest.
  nlohmann::json to_json() const;
  std::string run_hash() const;
};

// Builds a RunConfig from a parsed config tree. Unknown sections or keys are
// errors.
RunConfig run_config_from_tree(const nlohmann::json& tree);

// Precedence, lowest first: built-in defaults, the config file, then each
// override in order.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides);

// Real backends must carry explicit call and token caps. Throws ConfigError.
void check_budget_guard(const RunConfig& cfg);

}  // namespace gln::cli
