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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gln/graph.hpp"

namespace gln {

class PromptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant { gln, gln_base, all_in_one, promptgfm, direct };
enum class OutputConstraint { two_paragraphs, three_sentences };
enum class GaPhrase { standard, alternative };
enum class IrcStyle { itemized, plain_text };

std::string_view to_string(Variant v);
std::string_view to_string(OutputConstraint c);
std::string_view to_string(GaPhrase p);
std::string_view to_string(IrcStyle s);
Variant parse_variant(std::string_view text);
OutputConstraint parse_output_constraint(std::string_view text);
GaPhrase parse_ga_phrase(std::string_view text);
IrcStyle parse_irc_style(std::string_view text);

// One encoding regime.
struct EncoderConfig {
  int layers = 2;
  std::size_t neighbor_k = 10;
  bool graph_attention = true;
  bool initial_residual = true;
  OutputConstraint output_constraint = OutputConstraint::two_paragraphs;
  DomainTag domain = DomainTag::citation;
  Variant variant = Variant::gln;
  std::uint64_t seed = 0;
  GaPhrase ga_phrase = GaPhrase::standard;
  IrcStyle irc_style = IrcStyle::itemized;
  // All-in-One neighbor caps.
  std::size_t one_hop_k = 10;
  std::size_t two_hop_k = 20;

  // Throws PromptError when the invariants do not hold.
  void validate() const;
  // Stable key=value rendering of every field.
  std::string canonical() const;

  static EncoderConfig gln_base();
  static EncoderConfig gln_base(EncoderConfig base);
};

// Immutable set of prompt templates, one directory per domain tag plus
// `common/`. The built-in pack is compiled from core/templates.
class TemplatePack {
 public:
  static const TemplatePack& builtin();
  static TemplatePack load(const std::filesystem::path& dir);

  const std::string& version() const noexcept { return version_; }
  // Raw template text, e.g. file("citation/encode.txt"). Throws PromptError.
  const std::string& file(std::string_view relpath) const;
  // A string from <domain>/pack.json.
  const std::string& domain_string(DomainTag domain, std::string_view key) const;
  // A string from common/strings.json.
  const std::string& common_string(std::string_view key) const;

 private:
  TemplatePack() = default;
  static TemplatePack from_files(std::map<std::string, std::string, std::less<>> files);

  std::string version_;
  std::map<std::string, std::string, std::less<>> files_;
  std::map<std::string, std::string, std::less<>> strings_;
};

// Substitutes {{name}} placeholders. Every placeholder must have a value;
// substituted text is not rescanned.
std::string render_template(
    std::string_view tpl,
    const std::map<std::string, std::string, std::less<>>& values);

// Digest of cfg.canonical() and the template pack version.
std::string config_hash(const EncoderConfig& cfg,
                        const TemplatePack& pack = TemplatePack::builtin());

enum class PromptPurpose { encode, classify, link_predict, judge, denoise };
std::string_view to_string(PromptPurpose p);

struct PromptBundle {
  std::string instruction_text;
  std::string content_text;
  PromptPurpose purpose = PromptPurpose::encode;
  std::optional<int> layer;
  // Node id, or "anchor" for link items.
  std::string target;
  std::string config_hash;
};

// A node as it appears in an encode prompt.
struct NodeText {
  NodeId id;
  std::string initial;
  // Previous-layer output; equals `initial` at layer 1.
  std::string previous;
};

// Labeled representations for the judge: l1_base, l2_base, l1_attention,
// l2_residual.
using JudgeRepresentations = std::map<std::string, std::string, std::less<>>;

class PromptForge {
 public:
  explicit PromptForge(const TemplatePack& pack = TemplatePack::builtin(),
                       bool node_markers = false)
      : pack_(&pack), markers_(node_markers) {}

  const TemplatePack& pack() const noexcept { return *pack_; }
  bool node_markers() const noexcept { return markers_; }

  // Per-layer message-passing prompt for the gln and gln_base variants.
  PromptBundle message_prompt(const NodeText& target,
                              std::span<const NodeText> neighbors,
                              const EncoderConfig& cfg, int layer) const;

  PromptBundle all_in_one_prompt(const NodeText& target,
                                 std::span<const NodeText> one_hop,
                                 std::span<const NodeText> two_hop,
                                 const EncoderConfig& cfg) const;

  PromptBundle promptgfm_prompt(const NodeText& target,
                                std::span<const NodeText> neighbors,
                                const EncoderConfig& cfg, int layer) const;

  PromptBundle node_classification_prompt(std::string_view final_rep,
                                          std::span<const std::string> classes,
                                          DomainTag domain) const;

  // Candidates are presented in the given order, indexed from 0.
  PromptBundle link_prediction_prompt(std::string_view anchor_rep,
                                      std::span<const std::string> candidates,
                                      DomainTag domain) const;

  // observation: 1 (generality across layers), 2 (graph attention),
  // 3 (initial residual).
  PromptBundle judge_prompt(const JudgeRepresentations& reps,
                            std::string_view initial, int observation,
                            DomainTag domain) const;

  PromptBundle denoise_prompt(std::string_view raw_text) const;

  // Appended to a task prompt when the first reply failed to parse.
  const std::string& format_reminder() const;

  static constexpr std::size_t kLinkCandidates = 5;

 private:
  std::string describe(const NodeText& node, const EncoderConfig& cfg,
                       bool residual) const;
  std::string neighbor_blocks(std::span<const NodeText> nodes,
                              const EncoderConfig& cfg, bool residual) const;
  std::map<std::string, std::string, std::less<>> domain_values(DomainTag d) const;

  const TemplatePack* pack_;
  bool markers_;
};

// Composite representation, e.g. for citation graphs:
//   Paper: {
//   - Detailed description: <initial>,
//   - General description: <layer 1>,
//   - Highly general description: <layer 2>}
// `layered` must hold layers 1..L without gaps.
std::string render_final_representation(
    const std::map<int, std::string>& layered, std::string_view initial,
    DomainTag domain, const TemplatePack& pack = TemplatePack::builtin());

// Representation carrying only the initial attribute (Direct baseline).
std::string render_initial_representation(
    std::string_view initial, DomainTag domain,
    const TemplatePack& pack = TemplatePack::builtin());

}  // namespace gln
