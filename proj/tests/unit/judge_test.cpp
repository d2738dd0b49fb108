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


#include <atomic>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gln/judge.hpp"
#include "gln/sampler.hpp"
#include "pipeline.hpp"

namespace gln {
namespace {

using testing::MockStack;

std::shared_ptr<ScriptedBackend> cycling_judge() {
  auto counter = std::make_shared<std::atomic<std::size_t>>(0);
  return std::make_shared<ScriptedBackend>([counter](const CompletionRequest&) {
    static const char* kAnswers[] = {"ANSWER: agree", "ANSWER: disagree", "ANSWER: unclear"};
    return std::string(kAnswers[counter->fetch_add(1) % 3]);
  });
}

TEST(Judge, ConfigsMatchTheStudyDesign) {
  const EncoderConfig base;
  const auto b = judge_base_config(base);
  EXPECT_EQ(b.variant, Variant::gln_base);
  EXPECT_EQ(b.layers, 2);
  const auto a = judge_attention_config(base);
  EXPECT_EQ(a.layers, 1);
  EXPECT_TRUE(a.graph_attention);
  EXPECT_FALSE(a.initial_residual);
  const auto r = judge_residual_config(base);
  EXPECT_EQ(r.layers, 2);
  EXPECT_FALSE(r.graph_attention);
  EXPECT_TRUE(r.initial_residual);
}

TEST(Judge, CyclingStubGivesThirds) {
  const auto g = testing::random_graph({.nodes = 120, .edge_prob = 0.05, .seed = 2});
  MockStack stack;
  Gateway judge(cycling_judge(), testing::instant_gateway());
  JudgeOptions opts;
  opts.n = 99;
  const auto study = run_judge_study(g, stack.encoder, judge, opts);
  EXPECT_EQ(study.judge_calls, 297u);
  for (const auto& q : study.questions) {
    EXPECT_EQ(q.judged, 99u);
    for (double r : q.ratios()) EXPECT_DOUBLE_EQ(r, 1.0 / 3.0);
  }
}

TEST(Judge, AlwaysAgree) {
  const auto g = testing::random_graph({.nodes = 30, .edge_prob = 0.1, .seed = 3});
  MockStack stack;
  Gateway judge(std::make_shared<ScriptedBackend>(
                    [](const CompletionRequest&) { return std::string("ANSWER: agree"); }),
                testing::instant_gateway());
  JudgeOptions opts;
  opts.n = 10;
  const auto study = run_judge_study(g, stack.encoder, judge, opts);
  EXPECT_EQ(study.judge_calls, 30u);
  for (const auto& q : study.questions) {
    EXPECT_EQ(q.ratios(), (std::array<double, 3>{1.0, 0.0, 0.0}));
  }
  EXPECT_NE(judge_csv(study).find("Q1,agree,1"), std::string::npos);
}

TEST(Judge, RatiosRecomputeFromRecordsAndProvenance) {
  const auto g = testing::random_graph({.nodes = 40, .edge_prob = 0.1, .seed = 4});
  MockStack stack;
  Gateway judge(stack.backend, testing::instant_gateway());
  JudgeOptions opts;
  opts.n = 12;
  const auto study = run_judge_study(g, stack.encoder, judge, opts);
  const auto again = recompute_tallies(study.nodes);
  for (std::size_t q = 0; q < kJudgeQuestions; ++q) {
    EXPECT_EQ(again[q].counts, study.questions[q].counts);
    double sum = 0;
    for (double r : study.questions[q].ratios()) sum += r;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const auto base_hash = stack.encoder.cache_hash(g, judge_base_config(opts.base));
  const auto att_hash = stack.encoder.cache_hash(g, judge_attention_config(opts.base));
  const auto res_hash = stack.encoder.cache_hash(g, judge_residual_config(opts.base));
  for (const auto& rec : study.nodes) {
    EXPECT_EQ(rec.reps.at("l1_base"), stack.cache.get(rec.node, 1, base_hash)->text);
    EXPECT_EQ(rec.reps.at("l2_base"), stack.cache.get(rec.node, 2, base_hash)->text);
    EXPECT_EQ(rec.reps.at("l1_attention"), stack.cache.get(rec.node, 1, att_hash)->text);
    EXPECT_EQ(rec.reps.at("l2_residual"), stack.cache.get(rec.node, 2, res_hash)->text);
  }
  MockStack stack2;
  Gateway judge2(stack2.backend, testing::instant_gateway());
  EXPECT_EQ(to_json(run_judge_study(g, stack2.encoder, judge2, opts)).dump(),
            to_json(study).dump());
}

TEST(Judge, UnparsedAnswersLeaveTheDenominator) {
  const auto g = testing::random_graph({.nodes = 30, .edge_prob = 0.1, .seed = 5});
  MockStack stack;
  std::atomic<int> n{0};
  Gateway judge(std::make_shared<ScriptedBackend>([&](const CompletionRequest& r) {
                  ++n;
                  if (r.content_text.find("Description B is more general") != std::string::npos) {
                    return std::string("hmm");
                  }
                  return std::string("ANSWER: disagree");
                }),
                testing::instant_gateway());
  JudgeOptions opts;
  opts.n = 6;
  const auto study = run_judge_study(g, stack.encoder, judge, opts);
  EXPECT_EQ(study.questions[0].judged, 0u);
  EXPECT_EQ(study.questions[0].excluded, 6u);
  EXPECT_EQ(study.questions[1].judged, 6u);
  EXPECT_EQ(study.judge_calls, 6u * 2 + 12u);
}

TEST(Judge, EncodingFailuresArePerNode) {
  const auto g = testing::random_graph({.nodes = 30, .edge_prob = 0.1, .seed = 6});
  JudgeOptions opts;
  opts.n = 8;
  const auto nodes = sample_task_nodes(g, opts.n, opts.min_degree, opts.seed);
  const std::string poison = g.text(nodes[0]);
  auto mock = std::make_shared<MockBackend>();
  auto flaky = std::make_shared<ScriptedBackend>([&](const CompletionRequest& r) {
    if (r.content_text.find(poison) != std::string::npos) {
      throw GatewayError(GatewayErrc::provider, "refused");
    }
    return mock->complete(r).text;
  });
  Gateway enc(flaky, testing::instant_gateway());
  RepresentationCache cache;
  Encoder encoder(enc, cache);
  Gateway judge(std::make_shared<MockBackend>(MockBackend::Options{.answer_mode = MockBackend::AnswerMode::hash}),
                testing::instant_gateway());
  const auto study = run_judge_study(g, encoder, judge, opts);
  std::size_t failed = 0;
  for (const auto& rec : study.nodes) failed += !rec.encode_error.empty();
  EXPECT_FALSE(study.nodes[0].encode_error.empty());
  EXPECT_LT(failed, 8u);
  for (const auto& q : study.questions) EXPECT_EQ(q.judged + q.excluded, 8u - failed);
  EXPECT_EQ(study.judge_calls, 3 * (8u - failed));
}

}  // namespace
}  // namespace gln
