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

#include "gln/judge.hpp"

#include <atomic>
#include <mutex>
#include <sstream>

#include "gln/eval.hpp"
#include "gln/sampler.hpp"
#include "parallel.hpp"

namespace gln {

using json = nlohmann::json;

std::string_view to_string(JudgeCategory c) {
  switch (c) {
    case JudgeCategory::agree:
      return "agree";
    case JudgeCategory::disagree:
      return "disagree";
    case JudgeCategory::unclear:
      return "unclear";
  }
  return "unclear";
}

std::array<double, kJudgeCategories> QuestionTally::ratios() const {
  std::array<double, kJudgeCategories> out{};
  if (judged == 0) return out;
  for (std::size_t c = 0; c < kJudgeCategories; ++c) {
    out[c] = static_cast<double>(counts[c]) / static_cast<double>(judged);
  }
  return out;
}

EncoderConfig judge_base_config(const EncoderConfig& base) {
  EncoderConfig cfg = EncoderConfig::gln_base(base);
  cfg.layers = 2;
  return cfg;
}

EncoderConfig judge_attention_config(const EncoderConfig& base) {
  EncoderConfig cfg = base;
  cfg.variant = Variant::gln;
  cfg.layers = 1;
  cfg.graph_attention = true;
  cfg.initial_residual = false;
  return cfg;
}

EncoderConfig judge_residual_config(const EncoderConfig& base) {
  EncoderConfig cfg = base;
  cfg.variant = Variant::gln;
  cfg.layers = 2;
  cfg.graph_attention = false;
  cfg.initial_residual = true;
  return cfg;
}

namespace {

const std::vector<std::string> kChoices = {"agree", "disagree", "unclear"};

struct Regime {
  EncoderConfig cfg;
  std::map<NodeId, LayeredRepresentation> reps;
};

// Encodes all nodes at once; on failure falls back to one node at a time so
// a single bad node does not sink the batch.
void encode_regime(const TextGraph& g, Encoder& encoder, std::span<const NodeId> nodes,
                   Regime& regime, std::map<NodeId, std::string>& errors) {
  try {
    regime.reps = encoder.encode(g, nodes, regime.cfg);
    return;
  } catch (const EncodeAborted&) {
  } catch (const GatewayError&) {
  }
  for (const auto& id : nodes) {
    if (errors.contains(id)) continue;
    try {
      auto one = encoder.encode(g, std::span(&id, 1), regime.cfg);
      regime.reps.insert(one.begin(), one.end());
    } catch (const std::exception& e) {
      errors[id] = e.what();
    }
  }
}

JudgeCategory category_of(const std::string& choice) {
  if (choice == "agree") return JudgeCategory::agree;
  if (choice == "disagree") return JudgeCategory::disagree;
  return JudgeCategory::unclear;
}

}  // namespace

JudgeStudy run_judge_study(const TextGraph& g, Encoder& encoder, Gateway& judge,
                           const JudgeOptions& opts, const TemplatePack& pack) {
  const std::vector<NodeId> nodes =
      opts.nodes ? *opts.nodes : sample_task_nodes(g, opts.n, opts.min_degree, opts.seed);

  Regime base{judge_base_config(opts.base), {}};
  Regime attention{judge_attention_config(opts.base), {}};
  Regime residual{judge_residual_config(opts.base), {}};
  std::map<NodeId, std::string> errors;
  for (Regime* r : {&base, &attention, &residual}) encode_regime(g, encoder, nodes, *r, errors);

  JudgeStudy study;
  study.base_hash = config_hash(base.cfg, pack);
  study.attention_hash = config_hash(attention.cfg, pack);
  study.residual_hash = config_hash(residual.cfg, pack);
  for (const auto& id : nodes) {
    JudgeNodeRecord rec;
    rec.node = id;
    rec.initial = g.text(id);
    if (auto it = errors.find(id); it != errors.end()) {
      rec.encode_error = it->second;
    } else {
      rec.reps["l1_base"] = base.reps.at(id).texts.at(1);
      rec.reps["l2_base"] = base.reps.at(id).texts.at(2);
      rec.reps["l1_attention"] = attention.reps.at(id).texts.at(1);
      rec.reps["l2_residual"] = residual.reps.at(id).texts.at(2);
    }
    study.nodes.push_back(std::move(rec));
  }

  const PromptForge forge(pack, false);
  std::atomic<std::size_t> calls{0};
  auto call = [&](CompletionRequest req) {
    ++calls;
    return judge.complete(req).text;
  };
  for (std::size_t q = 0; q < kJudgeQuestions; ++q) {
    const auto tag = "judge.q" + std::to_string(q + 1);
    detail::parallel_for(study.nodes.size(), opts.concurrency, [&](std::size_t i) {
      auto& rec = study.nodes[i];
      if (!rec.encode_error.empty()) return;
      const auto bundle =
          forge.judge_prompt(rec.reps, rec.initial, static_cast<int>(q + 1), opts.base.domain);
      CompletionRequest req;
      req.instruction_text = bundle.instruction_text;
      req.content_text = bundle.content_text;
      req.max_output_tokens = opts.max_output_tokens;
      req.temperature = 0.0;
      req.request_tag = tag;
      JudgeAnswer ans;
      try {
        ans.response = call(req);
        auto parsed = parse_answer(ans.response, kChoices);
        if (!parsed.ok()) {
          ++ans.parse_failures;
          req.content_text += "\n\n" + forge.format_reminder();
          req.request_tag = tag + ".retry";
          ans.response = call(req);
          parsed = parse_answer(ans.response, kChoices);
          if (!parsed.ok()) ++ans.parse_failures;
        }
        if (parsed.ok()) ans.category = category_of(*parsed.choice);
      } catch (const GatewayError& e) {
        ans.error = std::string(to_string(e.code())) + ": " + e.what();
      }
      rec.answers[q] = std::move(ans);
    });
  }
  study.judge_calls = calls.load();
  study.questions = recompute_tallies(study.nodes);
  return study;
}

std::array<QuestionTally, kJudgeQuestions> recompute_tallies(
    std::span<const JudgeNodeRecord> nodes) {
  std::array<QuestionTally, kJudgeQuestions> out{};
  for (const auto& rec : nodes) {
    for (std::size_t q = 0; q < kJudgeQuestions; ++q) {
      const auto& ans = rec.answers[q];
      if (!ans) continue;
      if (ans->category) {
        ++out[q].counts[static_cast<std::size_t>(*ans->category)];
        ++out[q].judged;
      } else {
        ++out[q].excluded;
      }
    }
  }
  return out;
}

json to_json(const JudgeStudy& study) {
  json nodes = json::array();
  for (const auto& rec : study.nodes) {
    json answers = json::array();
    for (const auto& ans : rec.answers) {
      if (!ans) {
        answers.push_back(nullptr);
        continue;
      }
      json a = {{"response", ans->response}, {"parse_failures", ans->parse_failures}};
      a["category"] = ans->category ? json(std::string(to_string(*ans->category))) : json(nullptr);
      if (!ans->error.empty()) a["error"] = ans->error;
      answers.push_back(std::move(a));
    }
    json n = {{"node", rec.node.value}, {"representations", rec.reps}, {"answers", answers}};
    if (!rec.encode_error.empty()) n["encode_error"] = rec.encode_error;
    nodes.push_back(std::move(n));
  }
  json questions = json::array();
  for (std::size_t q = 0; q < kJudgeQuestions; ++q) {
    const auto& t = study.questions[q];
    const auto r = t.ratios();
    json ratios = json::object();
    json counts = json::object();
    for (std::size_t c = 0; c < kJudgeCategories; ++c) {
      const auto name = std::string(to_string(static_cast<JudgeCategory>(c)));
      ratios[name] = r[c];
      counts[name] = t.counts[c];
    }
    questions.push_back({{"question", q + 1},
                         {"judged", t.judged},
                         {"excluded", t.excluded},
                         {"counts", counts},
                         {"ratios", ratios}});
  }
  return {{"judge_calls", study.judge_calls},
          {"config_hashes",
           {{"base", study.base_hash},
            {"attention", study.attention_hash},
            {"residual", study.residual_hash}}},
          {"questions", questions},
          {"nodes", nodes}};
}

std::string judge_csv(const JudgeStudy& study) {
  std::ostringstream out;
  out << "question,category,ratio\n";
  for (std::size_t q = 0; q < kJudgeQuestions; ++q) {
    const auto r = study.questions[q].ratios();
    for (std::size_t c = 0; c < kJudgeCategories; ++c) {
      out << "Q" << q + 1 << ',' << to_string(static_cast<JudgeCategory>(c)) << ',' << r[c]
          << '\n';
    }
  }
  return out.str();
}

}  // namespace gln
