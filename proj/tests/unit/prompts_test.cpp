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


#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gln/markers.hpp"
#include "gln/prompts.hpp"
#include "grammar.hpp"

#ifndef GLN_GOLDEN_DIR
#error "GLN_GOLDEN_DIR must point at core/templates/golden"
#endif

namespace gln {
namespace {

using testing::kAttention;
using testing::kAttentionAlt;
using testing::kItemized;
using testing::kThreeSentences;
using testing::kTwoParagraphs;
using testing::parse_final;

NodeText node(const std::string& id, const std::string& initial, const std::string& prev) {
  return {NodeId(id), initial, prev};
}

std::vector<NodeText> two_neighbors() {
  return {node("n1", "Neighbor one initial.", "Neighbor one layer text."),
          node("n2", "Neighbor two initial.", "Neighbor two layer text.")};
}

EncoderConfig cfg_with(bool ga, bool irc, OutputConstraint oc = OutputConstraint::two_paragraphs) {
  EncoderConfig cfg;
  cfg.graph_attention = ga;
  cfg.initial_residual = irc;
  cfg.output_constraint = oc;
  return cfg;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_golden(const std::string& name, const PromptBundle& b) {
  const std::string actual =
      "=== instruction ===\n" + b.instruction_text + "\n=== content ===\n" + b.content_text + "\n";
  const auto path = std::filesystem::path(GLN_GOLDEN_DIR) / (name + ".txt");
  if (const char* up = std::getenv("GLN_UPDATE_GOLDEN"); up && std::string(up) == "1") {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << "missing golden " << path
                                             << " (rerun with GLN_UPDATE_GOLDEN=1)";
  EXPECT_EQ(read_file(path), actual) << "golden mismatch: " << name;
}

TEST(EncoderConfig, ValidatesGlnBase) {
  auto cfg = EncoderConfig::gln_base();
  EXPECT_NO_THROW(cfg.validate());
  cfg.graph_attention = true;
  EXPECT_THROW(cfg.validate(), PromptError);
  EncoderConfig bad;
  bad.layers = 0;
  EXPECT_THROW(bad.validate(), PromptError);
}

TEST(EncoderConfig, HashTracksEveryField) {
  const EncoderConfig a;
  auto b = a;
  b.neighbor_k = 5;
  auto c = a;
  c.seed = 1;
  auto d = a;
  d.ga_phrase = GaPhrase::alternative;
  EXPECT_EQ(config_hash(a), config_hash(EncoderConfig{}));
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_NE(config_hash(a), config_hash(d));
  EXPECT_EQ(config_hash(a).size(), 64u);
}

TEST(EncoderConfig, EnumsRoundTrip) {
  for (auto v : {Variant::gln, Variant::gln_base, Variant::all_in_one, Variant::promptgfm,
                 Variant::direct}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_EQ(parse_output_constraint("three_sentences"), OutputConstraint::three_sentences);
  EXPECT_EQ(parse_ga_phrase(to_string(GaPhrase::alternative)), GaPhrase::alternative);
  EXPECT_EQ(parse_irc_style("plain_text"), IrcStyle::plain_text);
  EXPECT_THROW(parse_variant("bogus"), PromptError);
}

TEST(Template, RendersPlaceholders) {
  EXPECT_EQ(render_template("a {{x}} b {{y}}", {{"x", "1"}, {"y", "{{x}}"}}), "a 1 b {{x}}");
  EXPECT_THROW(render_template("{{missing}}", {}), PromptError);
}

TEST(Template, BuiltinPackMatchesDisk) {
  const auto disk = TemplatePack::load(std::filesystem::path(GLN_GOLDEN_DIR).parent_path());
  const auto& builtin = TemplatePack::builtin();
  EXPECT_EQ(disk.version(), builtin.version());
  EXPECT_EQ(disk.file("citation/encode.txt"), builtin.file("citation/encode.txt"));
  EXPECT_THROW(builtin.file("nope.txt"), PromptError);
}

// Attention clause, itemized residual and length instruction each appear iff
// their flag is set.
TEST(MessagePrompt, ToggleGrid) {
  const auto target = node("t", "Target initial.", "Target layer text.");
  const auto nbrs = two_neighbors();
  for (bool ga : {false, true}) {
    for (bool irc : {false, true}) {
      for (auto oc : {OutputConstraint::two_paragraphs, OutputConstraint::three_sentences}) {
        const auto cfg = cfg_with(ga, irc, oc);
        const auto p = PromptForge().message_prompt(target, nbrs, cfg, 2).content_text;
        EXPECT_EQ(p.find(kAttention) != std::string::npos, ga);
        EXPECT_EQ(p.find(kItemized) != std::string::npos, irc);
        EXPECT_EQ(p.find(kTwoParagraphs) != std::string::npos,
                  oc == OutputConstraint::two_paragraphs);
        EXPECT_EQ(p.find(kThreeSentences) != std::string::npos,
                  oc == OutputConstraint::three_sentences);
      }
    }
  }
}

TEST(MessagePrompt, ResidualStartsAtLayerTwo) {
  const auto cfg = cfg_with(true, true);
  const auto target = node("t", "Target initial.", "Target initial.");
  const auto l1 = PromptForge().message_prompt(target, two_neighbors(), cfg, 1).content_text;
  EXPECT_EQ(l1.find(kItemized), std::string::npos);
  const auto l2 = PromptForge().message_prompt(target, two_neighbors(), cfg, 2).content_text;
  EXPECT_NE(l2.find("- Version updated by papers that cite or are cited by it: "),
            std::string::npos);
}

TEST(MessagePrompt, AlternativePhraseAndPlainResidual) {
  auto cfg = cfg_with(true, true);
  cfg.ga_phrase = GaPhrase::alternative;
  cfg.irc_style = IrcStyle::plain_text;
  const auto p =
      PromptForge().message_prompt(node("t", "Init", "Prev"), two_neighbors(), cfg, 2).content_text;
  EXPECT_NE(p.find(kAttentionAlt), std::string::npos);
  EXPECT_EQ(p.find(kAttention), std::string::npos);
  EXPECT_EQ(p.find(kItemized), std::string::npos);
  EXPECT_NE(p.find("The detailed description is Init."), std::string::npos);
}

TEST(MessagePrompt, MarkersOnlyWhenRequested) {
  const auto cfg = cfg_with(true, true);
  const auto t = node("t", "Init", "Prev");
  const auto plain = PromptForge(TemplatePack::builtin(), false).message_prompt(t, two_neighbors(), cfg, 1);
  EXPECT_EQ(plain.content_text.find(node_marker("n1")), std::string::npos);
  const auto marked = PromptForge(TemplatePack::builtin(), true).message_prompt(t, two_neighbors(), cfg, 1);
  EXPECT_NE(marked.content_text.find(node_marker("t")), std::string::npos);
  EXPECT_NE(marked.content_text.find(node_marker("n2")), std::string::npos);
}

TEST(MessagePrompt, RejectsBadShapes) {
  auto cfg = cfg_with(true, true);
  cfg.neighbor_k = 1;
  const auto t = node("t", "Init", "Prev");
  EXPECT_THROW(PromptForge().message_prompt(t, two_neighbors(), cfg, 1), PromptError);
  EXPECT_THROW(PromptForge().message_prompt(t, {}, cfg_with(true, true), 1), PromptError);
  EXPECT_THROW(PromptForge().message_prompt(t, two_neighbors(), cfg_with(true, true), 3),
               PromptError);
}

TEST(TaskPrompts, ClassificationListsClasses) {
  const std::vector<std::string> classes = {"cs.AI", "cs.LG"};
  const auto p = PromptForge().node_classification_prompt("REP", classes, DomainTag::citation);
  EXPECT_NE(p.content_text.find("0. cs.AI\n1. cs.LG"), std::string::npos);
  EXPECT_NE(p.content_text.find("Valid choices: cs.AI | cs.LG\n"
                                "Respond with exactly one line: `ANSWER: <choice>`"),
            std::string::npos);
}

TEST(TaskPrompts, LinkNeedsFiveCandidates) {
  const std::vector<std::string> five = {"a", "b", "c", "d", "e"};
  const auto p = PromptForge().link_prediction_prompt("ANCHOR", five, DomainTag::co_purchase);
  EXPECT_NE(p.content_text.find("[0] a"), std::string::npos);
  EXPECT_NE(p.content_text.find("[4] e"), std::string::npos);
  EXPECT_NE(p.content_text.find("Which book is most likely to be co-purchased with the target book?"),
            std::string::npos);
  EXPECT_NE(p.content_text.find("Valid choices: 0 | 1 | 2 | 3 | 4"), std::string::npos);
  const std::vector<std::string> four = {"a", "b", "c", "d"};
  EXPECT_THROW(PromptForge().link_prediction_prompt("A", four, DomainTag::citation), PromptError);
}

TEST(TaskPrompts, JudgeNeedsAllFour) {
  JudgeRepresentations reps = {{"l1_base", "A"}, {"l2_base", "B"}, {"l1_attention", "C"}};
  EXPECT_THROW(PromptForge().judge_prompt(reps, "init", 1, DomainTag::citation), PromptError);
  reps["l2_residual"] = "D";
  const auto q3 = PromptForge().judge_prompt(reps, "init", 3, DomainTag::citation);
  EXPECT_NE(q3.content_text.find("B"), std::string::npos);
  EXPECT_NE(q3.content_text.find("Valid choices: agree | disagree | unclear"), std::string::npos);
  EXPECT_THROW(PromptForge().judge_prompt(reps, "init", 4, DomainTag::citation), PromptError);
}

TEST(TaskPrompts, PromptGfmCarriesItsInstruction) {
  auto cfg = cfg_with(false, false);
  cfg.variant = Variant::promptgfm;
  const auto p = PromptForge().promptgfm_prompt(node("t", "I", "P"), two_neighbors(), cfg, 1);
  EXPECT_NE(p.content_text.find("Please aggregate neighbor nodes and update a concise yet "
                                "meaningful representation for the central node."),
            std::string::npos);
}

TEST(TaskPrompts, AllInOneRendersNoneForEmptyRing) {
  auto cfg = cfg_with(false, false);
  cfg.variant = Variant::all_in_one;
  const std::vector<NodeText> none;
  const auto p = PromptForge().all_in_one_prompt(node("t", "I", "I"), two_neighbors(), none, cfg);
  EXPECT_NE(p.content_text.find("none"), std::string::npos);
}

TEST(FinalRepresentation, Grammar) {
  const std::map<DomainTag, std::string> entity = {{DomainTag::citation, "Paper"},
                                                   {DomainTag::co_purchase, "Book"},
                                                   {DomainTag::hyperlink, "Web page"}};
  for (const auto& [domain, name] : entity) {
    const auto one = render_final_representation({{1, "L1"}}, "INIT", domain);
    auto parsed = parse_final(one);
    ASSERT_TRUE(parsed);
    EXPECT_EQ(parsed->entity, name);
    ASSERT_EQ(parsed->items.size(), 2u);
    EXPECT_EQ(parsed->items[0].first, "Detailed description");
    EXPECT_EQ(parsed->items[0].second, "INIT");
    EXPECT_EQ(parsed->items[1].first, "General description");
    EXPECT_EQ(parsed->items[1].second, "L1");

    const auto two = render_final_representation({{1, "L1"}, {2, "L2"}}, "INIT", domain);
    parsed = parse_final(two);
    ASSERT_TRUE(parsed);
    ASSERT_EQ(parsed->items.size(), 3u);
    EXPECT_EQ(parsed->items[2].first, "Highly general description");
    EXPECT_EQ(parsed->items[2].second, "L2");
  }
  EXPECT_THROW(render_final_representation({}, "x", DomainTag::citation), PromptError);
  EXPECT_THROW(render_final_representation({{2, "x"}}, "x", DomainTag::citation), PromptError);
}

TEST(FinalRepresentation, InitialOnly) {
  EXPECT_EQ(render_initial_representation("abc", DomainTag::citation),
            "Paper: {\n- Detailed description: abc}");
}

TEST(Golden, Prompts) {
  const PromptForge forge;
  const auto target = node("t", "Graph learning with language models.", "Layer one target text.");
  for (auto domain : {DomainTag::citation, DomainTag::co_purchase, DomainTag::hyperlink}) {
    const std::string d(to_string(domain));
    auto cfg = cfg_with(true, true);
    cfg.domain = domain;
    check_golden(d + "_encode_l1_ga_irc", forge.message_prompt(target, two_neighbors(), cfg, 1));
    check_golden(d + "_encode_l2_ga_irc", forge.message_prompt(target, two_neighbors(), cfg, 2));
    auto base = EncoderConfig::gln_base(cfg);
    base.output_constraint = OutputConstraint::three_sentences;
    check_golden(d + "_encode_l2_base_3s", forge.message_prompt(target, two_neighbors(), base, 2));
    auto gfm = base;
    gfm.variant = Variant::promptgfm;
    check_golden(d + "_promptgfm_l1", forge.promptgfm_prompt(target, two_neighbors(), gfm, 1));
    auto aio = base;
    aio.variant = Variant::all_in_one;
    check_golden(d + "_all_in_one",
                 forge.all_in_one_prompt(target, two_neighbors(), two_neighbors(), aio));
    const std::vector<std::string> classes = {"alpha", "beta", "gamma"};
    check_golden(d + "_classify", forge.node_classification_prompt("REP", classes, domain));
    const std::vector<std::string> cands = {"c0", "c1", "c2", "c3", "c4"};
    check_golden(d + "_link", forge.link_prediction_prompt("ANCHOR", cands, domain));
  }
  JudgeRepresentations reps = {
      {"l1_base", "A"}, {"l2_base", "B"}, {"l1_attention", "C"}, {"l2_residual", "D"}};
  for (int q = 1; q <= 3; ++q) {
    check_golden("judge_q" + std::to_string(q), forge.judge_prompt(reps, "INIT", q, DomainTag::citation));
  }
  check_golden("denoise", forge.denoise_prompt("noisy words here"));
}

}  // namespace
}  // namespace gln
