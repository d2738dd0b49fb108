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

#include <array>
#include <cstdint>
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

enum class JudgeCategory { agree, disagree, unclear };
std::string_view to_string(JudgeCategory c);

inline constexpr std::size_t kJudgeQuestions = 3;
inline constexpr std::size_t kJudgeCategories = 3;

struct JudgeAnswer {
  std::optional<JudgeCategory> category;
  std::string response;
  int parse_failures = 0;
  // Gateway failure, if the call itself failed.
  std::string error;
};

struct JudgeNodeRecord {
  NodeId node;
  JudgeRepresentations reps;
  std::string initial;
  // Set when encoding failed; the node then has no answers.
  std::string encode_error;
  std::array<std::optional<JudgeAnswer>, kJudgeQuestions> answers;
};

struct QuestionTally {
  std::array<std::size_t, kJudgeCategories> counts{};
  // Nodes with a parsed category.
  std::size_t judged = 0;
  // Nodes asked but unparsed after the retry, or whose call failed.
  std::size_t excluded = 0;

  std::array<double, kJudgeCategories> ratios() const;
};

struct JudgeStudy {
  std::vector<JudgeNodeRecord> nodes;
  std::array<QuestionTally, kJudgeQuestions> questions;
  std::size_t judge_calls = 0;
  std::string base_hash;
  std::string attention_hash;
  std::string residual_hash;
};

struct JudgeOptions {
  std::size_t n = 100;
  std::size_t min_degree = 1;
  std::uint64_t seed = 0;
  // Domain, neighbor_k, output constraint and phrasing come from here; layer
  // count and the two flags are set per study config.
  EncoderConfig base;
  // Explicit nodes instead of sampling.
  std::optional<std::vector<NodeId>> nodes;
  std::size_t concurrency = 4;
  int max_output_tokens = 256;
};

// The three encoding regimes of a study.
EncoderConfig judge_base_config(const EncoderConfig& base);       // L=2, no flags
EncoderConfig judge_attention_config(const EncoderConfig& base);  // L=1, attention
EncoderConfig judge_residual_config(const EncoderConfig& base);   // L=2, residual

// Encodes every node under the three regimes, then asks the judge one
// question per observation. Questions run one after another.
JudgeStudy run_judge_study(const TextGraph& g, Encoder& encoder, Gateway& judge,
                           const JudgeOptions& opts,
                           const TemplatePack& pack = TemplatePack::builtin());

// Tallies from the per-node records alone.
std::array<QuestionTally, kJudgeQuestions> recompute_tallies(
    std::span<const JudgeNodeRecord> nodes);

nlohmann::json to_json(const JudgeStudy& study);
// question,category,ratio
std::string judge_csv(const JudgeStudy& study);

}  // namespace gln
