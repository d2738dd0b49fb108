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

#include "gln/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "gln/rng.hpp"
#include "gln/sampler.hpp"
#include "parallel.hpp"

namespace gln {

using json = nlohmann::json;
using Index = TextGraph::Index;

std::string_view to_string(ParseFailure f) {
  switch (f) {
    case ParseFailure::none:
      return "none";
    case ParseFailure::no_answer_line:
      return "no_answer_line";
    case ParseFailure::no_match:
      return "no_match";
    case ParseFailure::multiple_matches:
      return "multiple_matches";
  }
  return "none";
}

std::string_view to_string(TaskKind k) {
  return k == TaskKind::classification ? "node_classification" : "link_prediction";
}

// --- answer parsing ----------------------------------------------------------

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strips decoration a model may wrap around the choice.
std::string_view unwrap(std::string_view s) {
  constexpr std::string_view kWrap = "`'\"*<>[]()";
  s = trim(s);
  while (!s.empty() && kWrap.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
  while (!s.empty() && kWrap.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
  return trim(s);
}

std::vector<std::size_t> matches(std::string_view value,
                                 std::span<const std::string> choices) {
  std::vector<std::size_t> out;
  const auto v = lower(value);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (lower(choices[i]) == v) out.push_back(i);
  }
  return out;
}

}  // namespace

ParsedAnswer parse_answer(std::string_view text, std::span<const std::string> valid_choices) {
  static constexpr std::string_view kMarker = "answer:";
  const auto low = lower(text);
  std::set<std::size_t> chosen;
  bool saw_line = false;
  bool ambiguous = false;

  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    auto line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    const auto pos = std::string_view(low).substr(line_start, line_end - line_start).find(kMarker);
    if (pos != std::string_view::npos) {
      saw_line = true;
      const auto value_start = line_start + pos + kMarker.size();
      auto value = unwrap(text.substr(value_start, line_end - value_start));
      auto hit = matches(value, valid_choices);
      if (hit.empty() && !value.empty() && (value.back() == '.' || value.back() == ',')) {
        value.remove_suffix(1);
        hit = matches(unwrap(value), valid_choices);
      }
      if (hit.size() > 1) ambiguous = true;
      chosen.insert(hit.begin(), hit.end());
    }
    line_start = line_end + 1;
  }

  ParsedAnswer out;
  if (!saw_line) {
    out.failure = ParseFailure::no_answer_line;
  } else if (ambiguous || chosen.size() > 1) {
    out.failure = ParseFailure::multiple_matches;
  } else if (chosen.empty()) {
    out.failure = ParseFailure::no_match;
  } else {
    out.choice = valid_choices[*chosen.begin()];
  }
  return out;
}

// --- items -------------------------------------------------------------------

json to_json(const TaskItem& item) {
  if (item.kind == TaskKind::classification) {
    json j = {{"kind", "classification"}, {"target", item.target.value}};
    if (item.gold_label) j["gold_label"] = *item.gold_label;
    return j;
  }
  json cands = json::array();
  for (const auto& c : item.candidates) cands.push_back(c.value);
  return {{"kind", "link"},
          {"anchor", item.anchor.value},
          {"true_node", item.true_node.value},
          {"candidates", cands},
          {"gold_index", item.gold_index}};
}

TaskItem task_item_from_json(const json& j) {
  TaskItem item;
  if (j.at("kind").get<std::string>() == "classification") {
    item.kind = TaskKind::classification;
    item.target = NodeId(j.at("target").get<std::string>());
    if (j.contains("gold_label")) item.gold_label = j["gold_label"].get<std::string>();
    return item;
  }
  item.kind = TaskKind::link;
  item.anchor = NodeId(j.at("anchor").get<std::string>());
  item.true_node = NodeId(j.at("true_node").get<std::string>());
  for (const auto& c : j.at("candidates")) item.candidates.emplace_back(c.get<std::string>());
  item.gold_index = j.at("gold_index").get<int>();
  return item;
}

std::vector<std::string> class_list(const std::map<NodeId, std::string>& labels) {
  std::set<std::string> distinct;
  for (const auto& [_, label] : labels) distinct.insert(label);
  return {distinct.begin(), distinct.end()};
}

std::vector<TaskItem> build_classification_items(const TextGraph& g,
                                                 const std::map<NodeId, std::string>& labels,
                                                 std::size_t n, std::size_t min_degree,
                                                 std::uint64_t seed) {
  // Only labeled nodes are eligible; with full labels this matches
  // sample_task_nodes.
  std::vector<NodeId> pool;
  for (Index v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) >= min_degree && labels.contains(g.id(v))) pool.push_back(g.id(v));
  }
  if (n == 0 || pool.size() < n) {
    throw SamplingError("insufficient eligible nodes: " + std::to_string(pool.size()) +
                        " labeled nodes have degree >= " + std::to_string(min_degree) +
                        ", need " + std::to_string(n));
  }
  Rng rng(seed, "task_nodes");
  rng.select_prefix(std::span(pool), n);
  pool.resize(n);
  std::vector<TaskItem> items;
  std::vector<NodeId>& chosen = pool;
  for (auto& id : chosen) {
    TaskItem item;
    item.kind = TaskKind::classification;
    item.gold_label = labels.at(id);
    item.target = std::move(id);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<TaskItem> build_link_items(const TextGraph& g, std::size_t n,
                                       std::size_t min_degree, std::size_t negatives,
                                       std::uint64_t seed) {
  std::vector<TaskItem> items;
  for (const auto& e : sample_task_edges(g, n, min_degree, seed)) {
    TaskItem item;
    item.kind = TaskKind::link;
    item.anchor = g.id(e.src);
    item.true_node = g.id(e.dst);
    std::vector<Index> cands = sample_negatives(g, e.src, e.dst, negatives, seed);
    cands.insert(cands.begin(), e.dst);
    Rng rng(seed, "candidates", item.anchor.value + "\x1f" + item.true_node.value);
    rng.shuffle(std::span(cands));
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (cands[i] == e.dst) item.gold_index = static_cast<int>(i);
      item.candidates.push_back(g.id(cands[i]));
    }
    items.push_back(std::move(item));
  }
  return items;
}

TextGraph link_working_graph(const TextGraph& g, std::span<const TaskItem> items) {
  std::vector<TextGraph::Edge> removed;
  for (const auto& item : items) {
    if (item.kind != TaskKind::link) continue;
    removed.push_back({g.index_of(item.anchor), g.index_of(item.true_node)});
  }
  return g.without_edges(removed);
}

// --- reports -----------------------------------------------------------------

double recompute_metric(std::span<const ItemRecord> records) {
  if (records.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : records) hits += r.correct ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace {

json usage_json(const UsageSummary& u) {
  json tags = json::object();
  for (const auto& [tag, t] : u.by_tag) {
    tags[tag] = {{"calls", t.calls},
                 {"failed_attempts", t.failed_attempts},
                 {"prompt_tokens", t.prompt_tokens},
                 {"completion_tokens", t.completion_tokens},
                 {"mean_prompt_tokens", t.mean_prompt_tokens},
                 {"mean_completion_tokens", t.mean_completion_tokens}};
  }
  return {{"attempts", u.attempts},
          {"calls", u.calls},
          {"failed_attempts", u.failed_attempts},
          {"prompt_tokens", u.prompt_tokens},
          {"completion_tokens", u.completion_tokens},
          {"by_tag", tags}};
}

}  // namespace

json to_json(const EvalReport& r) {
  return {{"task", std::string(to_string(r.kind))},
          {"label", r.label},
          {"config_hash", r.config_hash},
          {"metric", r.metric},
          {"items", r.records.size()},
          {"correct", r.correct},
          {"parse_failures", r.parse_failures},
          {"encode_usage", usage_json(r.encode_usage)},
          {"task_usage", usage_json(r.task_usage)}};
}

void write_records_jsonl(const EvalReport& report, const std::filesystem::path& file,
                         std::string_view run_hash) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  for (const auto& r : report.records) {
    json j = {{"item", r.item},
              {"subject", r.subject},
              {"prediction", r.prediction},
              {"gold", r.gold},
              {"correct", r.correct},
              {"parse_failures", r.parse_failures},
              {"retries", r.retries},
              {"response", r.response}};
    if (!run_hash.empty()) j["run_hash"] = run_hash;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed to write " + file.string());
}

std::vector<ItemRecord> read_records_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::vector<ItemRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    ItemRecord r;
    r.item = j.at("item").get<std::size_t>();
    r.subject = j.at("subject").get<std::string>();
    r.prediction = j.at("prediction").get<std::string>();
    r.gold = j.at("gold").get<std::string>();
    r.correct = j.at("correct").get<bool>();
    r.parse_failures = j.at("parse_failures").get<int>();
    r.retries = j.at("retries").get<int>();
    r.response = j.value("response", "");
    out.push_back(std::move(r));
  }
  return out;
}

// --- runners -----------------------------------------------------------------

namespace {

std::string final_representation(const LayeredRepresentation& rep, const std::string& initial,
                                 DomainTag domain, const TemplatePack& pack) {
  const auto refined = rep.refined();
  if (refined.empty()) return render_initial_representation(initial, domain, pack);
  return render_final_representation(refined, initial, domain, pack);
}

struct AskResult {
  std::optional<std::string> choice;
  int parse_failures = 0;
  int retries = 0;
  std::string response;
  std::vector<UsageRecord> usage;
};

UsageRecord usage_of(const CompletionRequest& req, const CompletionResponse& resp) {
  return {.request_tag = req.request_tag,
          .model_id = resp.model_id,
          .prompt_tokens = resp.prompt_tokens,
          .completion_tokens = resp.completion_tokens};
}

// One task call plus a single format-reminder retry.
AskResult ask(Gateway& gw, const PromptBundle& bundle, std::span<const std::string> choices,
              const std::string& tag, int max_tokens, const PromptForge& forge) {
  CompletionRequest req;
  req.instruction_text = bundle.instruction_text;
  req.content_text = bundle.content_text;
  req.max_output_tokens = max_tokens;
  req.request_tag = tag;
  AskResult out;
  auto resp = gw.complete(req);
  out.usage.push_back(usage_of(req, resp));
  out.response = resp.text;
  auto parsed = parse_answer(resp.text, choices);
  if (!parsed.ok()) {
    ++out.parse_failures;
    ++out.retries;
    req.content_text += "\n\n" + forge.format_reminder();
    req.request_tag = tag + ".retry";
    resp = gw.complete(req);
    out.usage.push_back(usage_of(req, resp));
    out.response = resp.text;
    parsed = parse_answer(resp.text, choices);
    if (!parsed.ok()) ++out.parse_failures;
  }
  out.choice = parsed.choice;
  return out;
}

std::map<NodeId, LayeredRepresentation> encode_targets(const TextGraph& g,
                                                      std::span<const NodeId> targets,
                                                      const EncoderConfig& cfg,
                                                      EvalContext& ctx) {
  if (ctx.corruption) {
    return ctx.encoder.encode_corrupted(g, targets, cfg, ctx.corruption->true_k,
                                        ctx.corruption->noise_k);
  }
  return ctx.encoder.encode(g, targets, cfg);
}

// Collects per-item task usage in item order.
struct TaskUsage {
  std::vector<std::vector<UsageRecord>> per_item;
  explicit TaskUsage(std::size_t n) : per_item(n) {}
  UsageSummary summary() const {
    std::vector<UsageRecord> all;
    for (const auto& v : per_item) all.insert(all.end(), v.begin(), v.end());
    return usage_report(all);
  }
};

void finish(EvalReport& report) {
  report.correct = 0;
  report.parse_failures = 0;
  for (const auto& r : report.records) {
    report.correct += r.correct ? 1 : 0;
    report.parse_failures += r.prediction.empty() ? 1 : 0;
  }
  report.metric = recompute_metric(report.records);
}

}  // namespace

EvalReport run_node_classification(const TextGraph& g, std::span<const TaskItem> items,
                                   std::span<const std::string> classes,
                                   const EncoderConfig& cfg, EvalContext& ctx) {
  if (classes.empty()) throw PromptError("missing labels: empty class list");
  std::vector<NodeId> targets;
  for (const auto& item : items) {
    if (item.kind != TaskKind::classification || !item.gold_label) {
      throw PromptError("classification items need a gold label");
    }
    targets.push_back(item.target);
  }
  const auto reps = encode_targets(g, targets, cfg, ctx);
  const auto encode_usage = usage_report(ctx.encoder.last_stats().usage);

  const PromptForge forge(ctx.pack, false);
  TaskUsage task_usage(items.size());
  EvalReport report;
  report.kind = TaskKind::classification;
  report.label = std::string(to_string(cfg.variant));
  report.config_hash = config_hash(cfg, ctx.pack);
  report.records.resize(items.size());
  detail::parallel_for(items.size(), ctx.concurrency, [&](std::size_t i) {
    const auto& item = items[i];
    const auto& rep = reps.at(item.target);
    const auto final_rep = final_representation(rep, g.text(item.target), cfg.domain, ctx.pack);
    const auto bundle = forge.node_classification_prompt(final_rep, classes, cfg.domain);
    auto ans = ask(ctx.task_gateway, bundle, classes, "task.classify",
                   ctx.max_output_tokens, forge);
    task_usage.per_item[i] = std::move(ans.usage);
    auto& rec = report.records[i];
    rec.item = i;
    rec.subject = item.target.value;
    rec.gold = *item.gold_label;
    rec.prediction = ans.choice.value_or("");
    rec.correct = ans.choice && *ans.choice == *item.gold_label;
    rec.parse_failures = ans.parse_failures;
    rec.retries = ans.retries;
    rec.response = ans.response;
  });
  finish(report);
  report.encode_usage = encode_usage;
  report.task_usage = task_usage.summary();
  return report;
}

EvalReport run_link_prediction(const TextGraph& g, std::span<const TaskItem> items,
                               const EncoderConfig& cfg, EvalContext& ctx) {
  std::set<NodeId> needed;
  for (const auto& item : items) {
    if (item.kind != TaskKind::link || item.candidates.size() != PromptForge::kLinkCandidates ||
        item.gold_index < 0 ||
        item.gold_index >= static_cast<int>(item.candidates.size()) ||
        item.candidates[static_cast<std::size_t>(item.gold_index)] != item.true_node) {
      throw PromptError("malformed link item for anchor '" + item.anchor.value + "'");
    }
    needed.insert(item.anchor);
    needed.insert(item.candidates.begin(), item.candidates.end());
  }
  const TextGraph working = link_working_graph(g, items);
  const std::vector<NodeId> targets(needed.begin(), needed.end());

  const auto reps = encode_targets(working, targets, cfg, ctx);
  const auto encode_usage = usage_report(ctx.encoder.last_stats().usage);

  static const std::vector<std::string> kChoices = {"0", "1", "2", "3", "4"};
  const PromptForge forge(ctx.pack, false);
  TaskUsage task_usage(items.size());
  EvalReport report;
  report.kind = TaskKind::link;
  report.label = std::string(to_string(cfg.variant));
  report.config_hash = config_hash(cfg, ctx.pack);
  report.records.resize(items.size());
  detail::parallel_for(items.size(), ctx.concurrency, [&](std::size_t i) {
    const auto& item = items[i];
    auto render = [&](const NodeId& id) {
      return final_representation(reps.at(id), working.text(id), cfg.domain, ctx.pack);
    };
    std::vector<std::string> cands;
    for (const auto& c : item.candidates) cands.push_back(render(c));
    const auto bundle = forge.link_prediction_prompt(render(item.anchor), cands, cfg.domain);
    auto ans =
        ask(ctx.task_gateway, bundle, kChoices, "task.link", ctx.max_output_tokens, forge);
    task_usage.per_item[i] = std::move(ans.usage);
    auto& rec = report.records[i];
    rec.item = i;
    rec.subject = item.anchor.value;
    rec.gold = std::to_string(item.gold_index);
    rec.prediction = ans.choice.value_or("");
    rec.correct = ans.choice && *ans.choice == rec.gold;
    rec.parse_failures = ans.parse_failures;
    rec.retries = ans.retries;
    rec.response = ans.response;
  });
  finish(report);
  report.encode_usage = encode_usage;
  report.task_usage = task_usage.summary();
  return report;
}

std::vector<AblationRow> run_ablation_grid(const TextGraph& g,
                                           std::span<const TaskItem> node_items,
                                           std::span<const std::string> classes,
                                           std::span<const TaskItem> link_items,
                                           const EncoderConfig& base, EvalContext& ctx) {
  std::vector<AblationRow> rows;
  for (const auto& [ga, irc] : {std::pair{false, false}, std::pair{true, false},
                                std::pair{false, true}, std::pair{true, true}}) {
    EncoderConfig cfg = base;
    cfg.variant = Variant::gln;
    cfg.graph_attention = ga;
    cfg.initial_residual = irc;
    AblationRow row{ga, irc, std::nullopt, std::nullopt};
    if (!node_items.empty()) row.node = run_node_classification(g, node_items, classes, cfg, ctx);
    if (!link_items.empty()) row.link = run_link_prediction(g, link_items, cfg, ctx);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string pct(const std::optional<EvalReport>& r) {
  if (!r) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << r->metric * 100.0;
  return out.str();
}

}  // namespace

std::string ablation_table(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "G.A.  I.R.C.  Node.   Link.\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(6) << (r.graph_attention ? "yes" : "no") << std::setw(8)
        << (r.initial_residual ? "yes" : "no") << std::setw(8) << pct(r.node) << pct(r.link)
        << '\n';
  }
  return out.str();
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "graph_attention,initial_residual,node_accuracy,link_hr1,node_config_hash\n";
  for (const auto& r : rows) {
    out << r.graph_attention << ',' << r.initial_residual << ','
        << (r.node ? std::to_string(r.node->metric) : "") << ','
        << (r.link ? std::to_string(r.link->metric) : "") << ','
        << (r.node ? r.node->config_hash : r.link ? r.link->config_hash : "") << '\n';
  }
  return out.str();
}

}  // namespace gln
