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

#include "gln/prompts.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gln/hash.hpp"
#include "gln/markers.hpp"

namespace gln {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kEmbeddedTemplates[];
extern const std::size_t kEmbeddedTemplateCount;
}  // namespace detail

namespace fs = std::filesystem;
using Values = std::map<std::string, std::string, std::less<>>;

// --- enums -------------------------------------------------------------------

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::gln:
      return "gln";
    case Variant::gln_base:
      return "gln_base";
    case Variant::all_in_one:
      return "all_in_one";
    case Variant::promptgfm:
      return "promptgfm";
    case Variant::direct:
      return "direct";
  }
  return "gln";
}

std::string_view to_string(OutputConstraint c) {
  return c == OutputConstraint::two_paragraphs ? "two_paragraphs" : "three_sentences";
}

std::string_view to_string(GaPhrase p) {
  return p == GaPhrase::standard ? "default" : "alternative";
}

std::string_view to_string(IrcStyle s) {
  return s == IrcStyle::itemized ? "itemized" : "plain_text";
}

std::string_view to_string(PromptPurpose p) {
  switch (p) {
    case PromptPurpose::encode:
      return "encode";
    case PromptPurpose::classify:
      return "classify";
    case PromptPurpose::link_predict:
      return "link_predict";
    case PromptPurpose::judge:
      return "judge";
    case PromptPurpose::denoise:
      return "denoise";
  }
  return "encode";
}

Variant parse_variant(std::string_view t) {
  if (t == "gln") return Variant::gln;
  if (t == "gln_base" || t == "gln-base") return Variant::gln_base;
  if (t == "all_in_one" || t == "all-in-one") return Variant::all_in_one;
  if (t == "promptgfm") return Variant::promptgfm;
  if (t == "direct") return Variant::direct;
  throw PromptError("unknown variant '" + std::string(t) + "'");
}

OutputConstraint parse_output_constraint(std::string_view t) {
  if (t == "two_paragraphs" || t == "2-paragraphs") return OutputConstraint::two_paragraphs;
  if (t == "three_sentences" || t == "3-sentences") return OutputConstraint::three_sentences;
  throw PromptError("unknown output constraint '" + std::string(t) + "'");
}

GaPhrase parse_ga_phrase(std::string_view t) {
  if (t == "default" || t == "standard") return GaPhrase::standard;
  if (t == "alternative") return GaPhrase::alternative;
  throw PromptError("unknown ga_phrase '" + std::string(t) + "'");
}

IrcStyle parse_irc_style(std::string_view t) {
  if (t == "itemized") return IrcStyle::itemized;
  if (t == "plain_text" || t == "plain-text") return IrcStyle::plain_text;
  throw PromptError("unknown irc_style '" + std::string(t) + "'");
}

// --- config ------------------------------------------------------------------

void EncoderConfig::validate() const {
  if (layers < 1) throw PromptError("layers must be >= 1");
  if (neighbor_k < 1) throw PromptError("neighbor_k must be >= 1");
  if (one_hop_k < 1 || two_hop_k < 1) throw PromptError("All-in-One caps must be >= 1");
  if (variant == Variant::gln_base && (graph_attention || initial_residual)) {
    throw PromptError("gln_base requires graph_attention and initial_residual off");
  }
}

std::string EncoderConfig::canonical() const {
  std::ostringstream out;
  out << "variant=" << to_string(variant) << ";layers=" << layers
      << ";neighbor_k=" << neighbor_k << ";graph_attention=" << graph_attention
      << ";initial_residual=" << initial_residual
      << ";output_constraint=" << to_string(output_constraint)
      << ";domain=" << to_string(domain) << ";seed=" << seed
      << ";ga_phrase=" << to_string(ga_phrase) << ";irc_style=" << to_string(irc_style)
      << ";one_hop_k=" << one_hop_k << ";two_hop_k=" << two_hop_k;
  return out.str();
}

EncoderConfig EncoderConfig::gln_base() { return gln_base(EncoderConfig{}); }

EncoderConfig EncoderConfig::gln_base(EncoderConfig base) {
  base.variant = Variant::gln_base;
  base.graph_attention = false;
  base.initial_residual = false;
  return base;
}

std::string config_hash(const EncoderConfig& cfg, const TemplatePack& pack) {
  return sha256_hex(cfg.canonical() + ";templates=" + pack.version());
}

// --- templates ---------------------------------------------------------------

std::string render_template(std::string_view tpl, const Values& values) {
  std::string out;
  out.reserve(tpl.size() * 2);
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const auto open = tpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      break;
    }
    const auto close = tpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw PromptError("unterminated placeholder in template");
    }
    out.append(tpl.substr(pos, open - pos));
    const auto name = tpl.substr(open + 2, close - open - 2);
    const auto it = values.find(name);
    if (it == values.end()) {
      throw PromptError("template placeholder '{{" + std::string(name) + "}}' has no value");
    }
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

TemplatePack TemplatePack::from_files(std::map<std::string, std::string, std::less<>> files) {
  TemplatePack pack;
  const auto version = files.find("VERSION");
  if (version == files.end()) throw PromptError("template pack has no VERSION file");
  pack.version_ = version->second;
  while (!pack.version_.empty() && std::isspace(static_cast<unsigned char>(pack.version_.back())))
    pack.version_.pop_back();

  for (const auto& [path, text] : files) {
    std::string prefix;
    if (path == "common/strings.json") {
      prefix = "common";
    } else if (path.ends_with("/pack.json")) {
      prefix = path.substr(0, path.size() - std::string_view("/pack.json").size());
    } else {
      continue;
    }
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw PromptError("template pack file " + path + " is not a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
      pack.strings_[prefix + "/" + key] = value.get<std::string>();
    }
  }
  pack.files_ = std::move(files);
  return pack;
}

const TemplatePack& TemplatePack::builtin() {
  static const TemplatePack pack = [] {
    std::map<std::string, std::string, std::less<>> files;
    for (std::size_t i = 0; i < detail::kEmbeddedTemplateCount; ++i) {
      const auto& [path, text] = detail::kEmbeddedTemplates[i];
      files.emplace(std::string(path), std::string(text));
    }
    return from_files(std::move(files));
  }();
  return pack;
}

TemplatePack TemplatePack::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw PromptError("template directory not found: " + dir.string());
  std::map<std::string, std::string, std::less<>> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel.starts_with("golden/")) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files.emplace(std::move(rel), buf.str());
  }
  return from_files(std::move(files));
}

const std::string& TemplatePack::file(std::string_view relpath) const {
  const auto it = files_.find(relpath);
  if (it == files_.end()) throw PromptError("missing template " + std::string(relpath));
  return it->second;
}

const std::string& TemplatePack::domain_string(DomainTag domain, std::string_view key) const {
  std::string full(to_string(domain));
  full.push_back('/');
  full.append(key);
  const auto it = strings_.find(full);
  if (it == strings_.end()) throw PromptError("missing template string " + full);
  return it->second;
}

const std::string& TemplatePack::common_string(std::string_view key) const {
  const auto it = strings_.find("common/" + std::string(key));
  if (it == strings_.end()) throw PromptError("missing template string common/" + std::string(key));
  return it->second;
}

// --- builders ----------------------------------------------------------------

namespace {

std::string with_period(std::string_view text) {
  std::string out(text);
  while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
  if (!out.empty() && out.back() != '.' && out.back() != '!' && out.back() != '?') {
    out.push_back('.');
  }
  return out;
}

std::string tpl_path(DomainTag d, std::string_view name) {
  return std::string(to_string(d)) + "/" + std::string(name);
}

}  // namespace

Values PromptForge::domain_values(DomainTag d) const {
  Values v;
  for (const char* key : {"entity", "entity_lower", "entity_plural", "entity_plural_cap",
                          "relation_verb", "link_question"}) {
    v[key] = pack_->domain_string(d, key);
  }
  v["answer_contract"] = pack_->common_string("answer_contract");
  return v;
}

std::string PromptForge::describe(const NodeText& node, const EncoderConfig& cfg,
                                  bool residual) const {
  const std::string mark = markers_ ? node_marker(node.id.value) : std::string();
  if (!residual) return markers_ ? mark + " " + node.previous : node.previous;
  if (cfg.irc_style == IrcStyle::plain_text) {
    const auto text = render_template(pack_->domain_string(cfg.domain, "residual_plain"),
                                      {{"initial", with_period(node.initial)},
                                       {"updated", node.previous}});
    return markers_ ? mark + " " + text : text;
  }
  std::string out = mark;
  if (!out.empty()) out.push_back('\n');
  out += "- " + pack_->domain_string(cfg.domain, "residual_initial_label") + ": " +
         node.initial + "\n- " +
         pack_->domain_string(cfg.domain, "residual_updated_label") + ": " + node.previous;
  return out;
}

std::string PromptForge::neighbor_blocks(std::span<const NodeText> nodes,
                                         const EncoderConfig& cfg, bool residual) const {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) out += "\n\n";
    const auto block = describe(nodes[i], cfg, residual);
    out += "[" + std::to_string(i + 1) + "]";
    out += block.starts_with("- ") ? "\n" : " ";
    out += block;
  }
  return out;
}

PromptBundle PromptForge::message_prompt(const NodeText& target,
                                         std::span<const NodeText> neighbors,
                                         const EncoderConfig& cfg, int layer) const {
  cfg.validate();
  if (layer < 1 || layer > cfg.layers) {
    throw PromptError("layer " + std::to_string(layer) + " outside 1.." +
                      std::to_string(cfg.layers));
  }
  if (neighbors.empty()) throw PromptError("message prompt needs at least one neighbor");
  if (neighbors.size() > cfg.neighbor_k) {
    throw PromptError("too many neighbors: " + std::to_string(neighbors.size()) + " > " +
                      std::to_string(cfg.neighbor_k));
  }
  const bool residual = cfg.initial_residual && layer >= 2;
  Values v = domain_values(cfg.domain);
  v["target"] = describe(target, cfg, residual);
  v["neighbors"] = neighbor_blocks(neighbors, cfg, residual);
  v["attention"] =
      cfg.graph_attention
          ? " " + pack_->domain_string(cfg.domain, cfg.ga_phrase == GaPhrase::standard
                                                       ? "attention_default"
                                                       : "attention_alternative")
          : std::string();
  v["length"] = pack_->common_string(cfg.output_constraint == OutputConstraint::two_paragraphs
                                         ? "length_two_paragraphs"
                                         : "length_three_sentences");
  PromptBundle b;
  b.instruction_text = pack_->domain_string(cfg.domain, "encode_instruction");
  b.content_text = render_template(pack_->file(tpl_path(cfg.domain, "encode.txt")), v);
  b.purpose = PromptPurpose::encode;
  b.layer = layer;
  b.target = target.id.value;
  b.config_hash = config_hash(cfg, *pack_);
  return b;
}

PromptBundle PromptForge::promptgfm_prompt(const NodeText& target,
                                           std::span<const NodeText> neighbors,
                                           const EncoderConfig& cfg, int layer) const {
  cfg.validate();
  if (layer < 1 || layer > cfg.layers) {
    throw PromptError("layer " + std::to_string(layer) + " outside 1.." +
                      std::to_string(cfg.layers));
  }
  if (neighbors.empty()) throw PromptError("message prompt needs at least one neighbor");
  if (neighbors.size() > cfg.neighbor_k) {
    throw PromptError("too many neighbors: " + std::to_string(neighbors.size()) + " > " +
                      std::to_string(cfg.neighbor_k));
  }
  Values v = domain_values(cfg.domain);
  v["target"] = describe(target, cfg, false);
  v["neighbors"] = neighbor_blocks(neighbors, cfg, false);
  PromptBundle b;
  b.instruction_text = pack_->domain_string(cfg.domain, "promptgfm_instruction");
  b.content_text = render_template(pack_->file(tpl_path(cfg.domain, "promptgfm.txt")), v);
  b.purpose = PromptPurpose::encode;
  b.layer = layer;
  b.target = target.id.value;
  b.config_hash = config_hash(cfg, *pack_);
  return b;
}

PromptBundle PromptForge::all_in_one_prompt(const NodeText& target,
                                            std::span<const NodeText> one_hop,
                                            std::span<const NodeText> two_hop,
                                            const EncoderConfig& cfg) const {
  cfg.validate();
  if (one_hop.size() > cfg.one_hop_k || two_hop.size() > cfg.two_hop_k) {
    throw PromptError("All-in-One neighbor cap exceeded: " + std::to_string(one_hop.size()) +
                      "/" + std::to_string(two_hop.size()) + " > " +
                      std::to_string(cfg.one_hop_k) + "/" + std::to_string(cfg.two_hop_k));
  }
  const auto& none = pack_->common_string("none");
  Values v = domain_values(cfg.domain);
  v["target"] = describe(target, cfg, false);
  v["one_hop"] = one_hop.empty() ? none : neighbor_blocks(one_hop, cfg, false);
  v["two_hop"] = two_hop.empty() ? none : neighbor_blocks(two_hop, cfg, false);
  v["length"] = pack_->common_string(cfg.output_constraint == OutputConstraint::two_paragraphs
                                         ? "length_two_paragraphs"
                                         : "length_three_sentences");
  PromptBundle b;
  b.instruction_text = pack_->domain_string(cfg.domain, "encode_instruction");
  b.content_text = render_template(pack_->file(tpl_path(cfg.domain, "all_in_one.txt")), v);
  b.purpose = PromptPurpose::encode;
  b.layer = 1;
  b.target = target.id.value;
  b.config_hash = config_hash(cfg, *pack_);
  return b;
}

PromptBundle PromptForge::node_classification_prompt(std::string_view final_rep,
                                                     std::span<const std::string> classes,
                                                     DomainTag domain) const {
  if (classes.empty()) throw PromptError("empty class list");
  std::set<std::string_view> unique(classes.begin(), classes.end());
  if (unique.size() != classes.size()) throw PromptError("duplicate class labels");
  std::string listing, choices;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i > 0) {
      listing += "\n";
      choices += " | ";
    }
    listing += std::to_string(i) + ". " + classes[i];
    choices += classes[i];
  }
  Values v = domain_values(domain);
  v["representation"] = std::string(final_rep);
  v["classes"] = listing;
  v["choices"] = choices;
  PromptBundle b;
  b.instruction_text = pack_->domain_string(domain, "classify_instruction");
  b.content_text = render_template(pack_->file(tpl_path(domain, "classify.txt")), v);
  b.purpose = PromptPurpose::classify;
  return b;
}

PromptBundle PromptForge::link_prediction_prompt(std::string_view anchor_rep,
                                                 std::span<const std::string> candidates,
                                                 DomainTag domain) const {
  if (candidates.size() != kLinkCandidates) {
    throw PromptError("link prediction needs exactly 5 candidates, got " +
                      std::to_string(candidates.size()));
  }
  std::string listing, choices;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i > 0) {
      listing += "\n\n";
      choices += " | ";
    }
    listing += "[" + std::to_string(i) + "] " + candidates[i];
    choices += std::to_string(i);
  }
  Values v = domain_values(domain);
  v["anchor"] = std::string(anchor_rep);
  v["candidates"] = listing;
  v["choices"] = choices;
  PromptBundle b;
  b.instruction_text = pack_->domain_string(domain, "link_instruction");
  b.content_text = render_template(pack_->file(tpl_path(domain, "link.txt")), v);
  b.purpose = PromptPurpose::link_predict;
  return b;
}

PromptBundle PromptForge::judge_prompt(const JudgeRepresentations& reps,
                                       std::string_view initial, int observation,
                                       DomainTag domain) const {
  static constexpr std::string_view kLabels[] = {"l1_base", "l2_base", "l1_attention",
                                                 "l2_residual"};
  if (reps.size() != 4) {
    throw PromptError("judge needs exactly 4 representations, got " +
                      std::to_string(reps.size()));
  }
  for (auto label : kLabels) {
    if (!reps.contains(label)) throw PromptError("judge representation missing: " + std::string(label));
  }
  std::string_view first, second;
  switch (observation) {
    case 1:
      first = "l1_base";
      second = "l2_base";
      break;
    case 2:
      first = "l1_base";
      second = "l1_attention";
      break;
    case 3:
      first = "l2_base";
      second = "l2_residual";
      break;
    default:
      throw PromptError("observation must be 1, 2 or 3");
  }
  Values v = domain_values(domain);
  v["initial"] = std::string(initial);
  v["first"] = reps.find(first)->second;
  v["second"] = reps.find(second)->second;
  PromptBundle b;
  b.instruction_text = pack_->file("common/judge.instruction.txt");
  b.content_text = render_template(
      pack_->file("common/judge_" + std::to_string(observation) + ".txt"), v);
  b.purpose = PromptPurpose::judge;
  return b;
}

PromptBundle PromptForge::denoise_prompt(std::string_view raw_text) const {
  if (raw_text.empty()) throw PromptError("denoise input is empty");
  PromptBundle b;
  b.instruction_text = pack_->file("common/denoise.instruction.txt");
  b.content_text = render_template(pack_->file("common/denoise.txt"),
                                   {{"text", std::string(raw_text)}});
  b.purpose = PromptPurpose::denoise;
  return b;
}

const std::string& PromptForge::format_reminder() const {
  return pack_->common_string("format_reminder");
}

// --- final representation ----------------------------------------------------

std::string render_final_representation(const std::map<int, std::string>& layered,
                                        std::string_view initial, DomainTag domain,
                                        const TemplatePack& pack) {
  if (layered.empty()) throw PromptError("missing layer 1");
  int expect = 1;
  for (const auto& [layer, _] : layered) {
    if (layer != expect) throw PromptError("missing layer " + std::to_string(expect));
    ++expect;
  }
  std::string out = pack.domain_string(domain, "entity") + ": {\n- Detailed description: ";
  out.append(initial);
  for (const auto& [layer, text] : layered) {
    out += ",\n- ";
    if (layer == 1) {
      out += "General description: ";
    } else if (layer == 2) {
      out += "Highly general description: ";
    } else {
      out += "Highly general description (layer " + std::to_string(layer) + "): ";
    }
    out += text;
  }
  out += "}";
  return out;
}

std::string render_initial_representation(std::string_view initial, DomainTag domain,
                                          const TemplatePack& pack) {
  std::string out = pack.domain_string(domain, "entity") + ": {\n- Detailed description: ";
  out.append(initial);
  out += "}";
  return out;
}

}  // namespace gln
