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

#include "gln_cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "gln/encoder.hpp"
#include "gln/eval.hpp"
#include "gln/gateway.hpp"
#include "gln/judge.hpp"
#include "gln/sampler.hpp"
#include "gln_cli/toml.hpp"

namespace gln::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::string_view kStampPrefix = "# run_hash=";

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

double mean_prompt(const UsageSummary& u) {
  return u.calls ? static_cast<double>(u.prompt_tokens) / static_cast<double>(u.calls) : 0.0;
}
double mean_completion(const UsageSummary& u) {
  return u.calls ? static_cast<double>(u.completion_tokens) / static_cast<double>(u.calls)
                 : 0.0;
}

// Plain aligned table, first row is the header.
std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream os;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t i = 0; i < rows[n].size(); ++i) {
      if (i + 1 < rows[n].size()) {
        os << std::left << std::setw(static_cast<int>(width[i])) << rows[n][i] << "  ";
      } else {
        os << rows[n][i];
      }
    }
    os << '\n';
    if (n == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return os.str();
}

std::string to_csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      if (r[i].find_first_of(",\"") != std::string::npos) {
        out += '"';
        for (char c : r[i]) out += c == '"' ? std::string("\"\"") : std::string(1, c);
        out += '"';
      } else {
        out += r[i];
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<NodeId> read_targets(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open targets file " + file.string());
  std::vector<NodeId> out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    auto id = line.substr(b, e - b + 1);
    if (seen.insert(id).second) out.emplace_back(std::move(id));
  }
  return out;
}

struct Role {
  std::shared_ptr<UsageLedger> ledger;
  std::shared_ptr<ResponseCache> responses;
  std::unique_ptr<Gateway> gateway;
  const BackendSpec* spec = nullptr;
};

std::shared_ptr<Backend> make_backend(const BackendSpec& b) {
  if (b.is_mock()) {
    MockBackend::Options o;
    o.answer_mode = MockBackend::AnswerMode::hash;
    o.context_window = b.context_window;
    if (!b.model.empty()) o.model_id = b.model;
    return std::make_shared<MockBackend>(o);
  }
  HttpBackend::Options o;
  o.flavor = b.kind == "anthropic" ? HttpBackend::Flavor::anthropic : HttpBackend::Flavor::openai;
  o.base_url = b.base_url;
  o.path = b.path;
  o.model_id = b.model;
  o.api_key_env = !b.api_key_env.empty()                         ? b.api_key_env
                  : o.flavor == HttpBackend::Flavor::anthropic ? "ANTHROPIC_API_KEY"
                                                               : "OPENAI_API_KEY";
  o.timeout = std::chrono::seconds(b.timeout_s);
  return std::make_shared<HttpBackend>(o);
}

TextGraph load_bundle(const RunConfig& cfg) {
  if (cfg.bundle.empty()) throw ConfigError("[graph] bundle is required");
  return cfg.domain ? load_graph(cfg.bundle, *cfg.domain) : load_graph(cfg.bundle);
}

// Output directory, backends and caches for one command invocation.
class Workspace {
 public:
  Workspace(const RunConfig& cfg, std::string command, std::ostream& err)
      : cfg_(cfg),
        hash_(cfg.run_hash()),
        command_(std::move(command)),
        graph_(load_bundle(cfg)),
        labels_(load_labels(cfg.bundle)),
        enc_(cfg.encoder) {
    enc_.domain = graph_.domain();
    if (const auto& st = graph_.stats(); st.duplicate_edges || st.self_loops) {
      err << "warning: dropped " << st.duplicate_edges << " duplicate edges and "
          << st.self_loops << " self-loops from " << cfg_.bundle.string() << '\n';
    }
    const auto prior = cfg_.out / "manifest.json";
    if (fs::exists(prior)) {
      std::ifstream in(prior);
      const auto j = json::parse(in, nullptr, false);
      if (!j.is_discarded() && j.value("run_hash", hash_) != hash_) {
        err << "warning: " << cfg_.out.string()
            << " holds artifacts of a different configuration (run_hash "
            << j.value("run_hash", "") << ")\n";
      }
    }
  }

  const RunConfig& cfg() const { return cfg_; }
  const std::string& run_hash() const { return hash_; }
  const TextGraph& graph() const { return graph_; }
  const std::optional<std::map<NodeId, std::string>>& labels() const { return labels_; }
  const EncoderConfig& encoder_config() const { return enc_; }

  void prepare_dirs() {
    for (const char* d : {"reports", "records"}) fs::create_directories(cfg_.out / d);
    fs::create_directories(cfg_.cache_root() / "reps");
  }

  Role& role(const std::string& name) {
    if (auto it = roles_.find(name); it != roles_.end()) return it->second;
    const BackendSpec& spec = name == "encoder" ? cfg_.encoder_backend
                              : name == "task"  ? cfg_.task_backend
                                                : cfg_.judge_backend;
    Role r;
    r.spec = &spec;
    r.ledger = std::make_shared<UsageLedger>();
    fs::create_directories(cfg_.cache_root());
    r.responses =
        std::make_shared<ResponseCache>(cfg_.cache_root() / ("responses." + name + ".jsonl"));
    GatewayOptions go;
    go.max_attempts = spec.max_attempts;
    go.requests_per_minute = spec.requests_per_minute;
    go.max_in_flight = spec.max_in_flight;
    go.max_calls = cfg_.budget.max_calls;
    go.max_total_tokens = cfg_.budget.max_total_tokens;
    r.gateway = std::make_unique<Gateway>(make_backend(spec), go, r.ledger, r.responses);
    r.gateway->set_default_model(spec.model.empty() ? "mock" : spec.model);
    return roles_.emplace(name, std::move(r)).first->second;
  }

  RepresentationCache& reps() {
    if (!reps_) reps_ = std::make_unique<RepresentationCache>(cfg_.cache_root() / "reps");
    return *reps_;
  }

  Encoder& encoder() {
    if (!encoder_) {
      encoder_ = std::make_unique<Encoder>(
          *role("encoder").gateway, reps(), TemplatePack::builtin(),
          EncodeOptions{cfg_.concurrency, cfg_.encode_max_output_tokens});
    }
    return *encoder_;
  }

  bool budget_reached() const {
    for (const auto& [_, r] : roles_) {
      if (cfg_.budget.max_calls && r.gateway->attempts() >= cfg_.budget.max_calls) return true;
    }
    return false;
  }

  std::size_t new_calls() const {
    std::size_t n = 0;
    for (const auto& [_, r] : roles_) n += r.gateway->attempts();
    return n;
  }

  void write_json(const fs::path& rel, json j) {
    j["run_hash"] = hash_;
    std::ofstream(cfg_.out / rel) << j.dump(2) << '\n';
    artifacts_.push_back(rel.generic_string());
  }

  void write_text(const fs::path& rel, std::string_view text) {
    std::ofstream(cfg_.out / rel) << kStampPrefix << hash_ << '\n' << text;
    artifacts_.push_back(rel.generic_string());
  }

  // Report JSON with its per-item records written alongside.
  json eval_report(const EvalReport& report, const std::string& stem) {
    const fs::path rec = fs::path("records") / (stem + ".jsonl");
    write_records_jsonl(report, cfg_.out / rec, hash_);
    artifacts_.push_back(rec.generic_string());
    auto j = to_json(report);
    j["records_file"] = rec.generic_string();
    return j;
  }

  void finish(std::string_view status, json extra, std::ostream& out) {
    json calls = json::object(), hits = json::object();
    for (const auto& [name, r] : roles_) {
      calls[name] = r.gateway->attempts();
      hits[name] = r.gateway->cache_hits();
      const fs::path usage = fs::path("records") / ("usage." + name + ".jsonl");
      fs::create_directories(cfg_.out / "records");
      std::ofstream f(cfg_.out / usage);
      for (const auto& u : r.ledger->records()) {
        json rec = {{"request_tag", u.request_tag},     {"model_id", u.model_id},
                    {"attempt", u.attempt},             {"ok", u.ok},
                    {"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens},
                    {"latency_ms", u.latency_ms},       {"run_hash", hash_}};
        if (!u.ok) rec["error"] = u.error;
        f << rec.dump() << '\n';
      }
      artifacts_.push_back(usage.generic_string());
    }
    json m = {{"run_hash", hash_},
              {"command", command_},
              {"status", status},
              {"config", cfg_.to_json()},
              {"bundle",
               {{"nodes", graph_.node_count()},
                {"edges", graph_.edge_count()},
                {"domain", std::string(to_string(graph_.domain()))},
                {"fingerprint", graph_.fingerprint()}}},
              {"new_calls", calls},
              {"cache_hits", hits},
              {"artifacts", artifacts_}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    fs::create_directories(cfg_.out);
    std::ofstream(cfg_.out / "manifest.json") << m.dump(2) << '\n';
    for (const auto& [name, r] : roles_) {
      out << name << ": " << r.gateway->attempts() << " new calls, "
          << r.gateway->cache_hits() << " cache hits\n";
    }
    out << new_calls() << " new calls\n";
  }

 private:
  const RunConfig& cfg_;
  std::string hash_;
  std::string command_;
  TextGraph graph_;
  std::optional<std::map<NodeId, std::string>> labels_;
  EncoderConfig enc_;
  std::map<std::string, Role> roles_;
  std::unique_ptr<RepresentationCache> reps_;
  std::unique_ptr<Encoder> encoder_;
  std::vector<std::string> artifacts_;
};

// Task items plus the graph their representations are encoded on.
struct TaskSetup {
  TaskKind kind = TaskKind::classification;
  std::vector<TaskItem> items;
  std::vector<std::string> classes;
  std::optional<TextGraph> working;
};

const std::map<NodeId, std::string>& require_labels(const Workspace& ws) {
  if (!ws.labels()) {
    throw ConfigError("node classification needs labels.jsonl in " +
                      ws.cfg().bundle.string());
  }
  return *ws.labels();
}

TaskSetup classification_setup(const Workspace& ws, const TextGraph& g, std::size_t n) {
  TaskSetup s;
  const auto& labels = require_labels(ws);
  const auto& t = ws.cfg().task;
  s.items = build_classification_items(g, labels, n, t.min_degree, t.seed);
  s.classes = class_list(labels);
  return s;
}

TaskSetup link_setup(const Workspace& ws, const TextGraph& g, std::size_t n) {
  TaskSetup s;
  const auto& t = ws.cfg().task;
  s.kind = TaskKind::link;
  s.items = build_link_items(g, n, t.min_degree, t.negatives, t.seed);
  s.working = link_working_graph(g, s.items);
  return s;
}

TaskSetup task_setup(const Workspace& ws, const TextGraph& g) {
  const auto& t = ws.cfg().task;
  return t.is_link() ? link_setup(ws, g, t.effective_n())
                     : classification_setup(ws, g, t.effective_n());
}

// Nodes whose representations a task needs.
std::vector<NodeId> task_targets(const TaskSetup& s) {
  std::set<NodeId> out;
  for (const auto& it : s.items) {
    if (s.kind == TaskKind::classification) {
      out.insert(it.target);
    } else {
      out.insert(it.anchor);
      out.insert(it.candidates.begin(), it.candidates.end());
    }
  }
  return {out.begin(), out.end()};
}

void save_items(Workspace& ws, const TaskSetup& s) {
  json items = json::array();
  for (const auto& it : s.items) items.push_back(to_json(it));
  ws.write_json(fs::path("records") / ("items." + std::string(to_string(s.kind)) + ".json"),
                {{"kind", to_string(s.kind)},
                 {"seed", ws.cfg().task.seed},
                 {"min_degree", ws.cfg().task.min_degree},
                 {"items", items}});
}

EvalReport run_task(const TextGraph& g, const TaskSetup& s, const EncoderConfig& cfg,
                    EvalContext& ctx) {
  return s.kind == TaskKind::classification
             ? run_node_classification(g, s.items, s.classes, cfg, ctx)
             : run_link_prediction(g, s.items, cfg, ctx);
}

EvalContext make_context(Workspace& ws) {
  return EvalContext{ws.encoder(), *ws.role("task").gateway, TemplatePack::builtin(),
                     ws.cfg().concurrency, ws.cfg().task.max_output_tokens, std::nullopt};
}

// One row of a comparison table.
struct Row {
  std::string label;
  EvalReport report;
  std::string stem;
};

std::vector<std::vector<std::string>> comparison_rows(const std::vector<Row>& rows,
                                                      std::string_view metric_name) {
  std::vector<std::vector<std::string>> out = {{"row", std::string(metric_name),
                                                "encode_in_tokens", "encode_out_tokens",
                                                "task_in_tokens", "task_out_tokens",
                                                "config_hash"}};
  for (const auto& r : rows) {
    out.push_back({r.label, fixed(r.report.metric), fixed(mean_prompt(r.report.encode_usage), 1),
                   fixed(mean_completion(r.report.encode_usage), 1),
                   fixed(mean_prompt(r.report.task_usage), 1),
                   fixed(mean_completion(r.report.task_usage), 1),
                   r.report.config_hash.substr(0, 12)});
  }
  return out;
}

void write_comparison(Workspace& ws, const std::string& name, const std::vector<Row>& rows,
                      TaskKind kind, json extra, std::ostream& out) {
  const auto metric = kind == TaskKind::classification ? "accuracy" : "hr@1";
  const auto table = comparison_rows(rows, metric);
  json j = {{"task", to_string(kind)}, {"rows", json::array()}};
  for (const auto& r : rows) {
    auto rj = ws.eval_report(r.report, r.stem);
    rj["row"] = r.label;
    j["rows"].push_back(rj);
  }
  for (auto& [k, v] : extra.items()) j[k] = v;
  ws.write_json(fs::path("reports") / (name + ".json"), j);
  ws.write_text(fs::path("reports") / (name + ".csv"), to_csv(table));
  const auto text = format_table(table);
  ws.write_text(fs::path("reports") / (name + ".txt"), text);
  out << text;
}

std::string slug(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return s;
}

// --- subcommands -----------------------------------------------------------

int do_encode(Workspace& ws, const CommandOptions& opts, std::ostream& out) {
  const auto& enc = ws.encoder_config();
  std::optional<TaskSetup> setup;
  std::vector<NodeId> targets;
  if (opts.targets) {
    targets = read_targets(*opts.targets);
  } else {
    setup = task_setup(ws, ws.graph());
    targets = task_targets(*setup);
  }
  const TextGraph& g = setup && setup->working ? *setup->working : ws.graph();

  if (opts.dry_run) {
    const auto plan = plan_receptive_field(g, targets, enc);
    const auto hash = ws.encoder().cache_hash(g, enc);
    std::size_t uncached = 0;
    for (int l = 1; l <= plan.layers; ++l) {
      for (auto v : plan.required[static_cast<std::size_t>(l)]) {
        const auto it = plan.neighbor_lists.find(v);
        const bool calls = it == plan.neighbor_lists.end() || !it->second.empty();
        if (calls && !ws.reps().get(g.id(v), l, hash)) ++uncached;
      }
    }
    out << "targets: " << targets.size() << '\n'
        << "plan size: " << plan.size() << '\n'
        << "planned calls: " << plan.call_count() << '\n'
        << "uncached calls: " << uncached << '\n';
    return kExitOk;
  }

  ws.prepare_dirs();
  if (setup) save_items(ws, *setup);
  Encoder& encoder = ws.encoder();
  try {
    const auto reps = encoder.encode(g, targets, enc);
    const auto& st = encoder.last_stats();
    const fs::path rec = "records/encode.jsonl";
    {
      std::ofstream f(ws.cfg().out / rec);
      for (const auto& [id, rep] : reps) {
        f << json{{"node", id.value},
                  {"config_hash", rep.config_hash},
                  {"representation",
                   render_final_representation(rep.refined(), g.text(id), g.domain())},
                  {"run_hash", ws.run_hash()}}
                 .dump()
          << '\n';
      }
    }
    const auto usage = usage_report(st.usage);
    ws.write_json("reports/encode.json",
                  {{"targets", targets.size()},
                   {"plan_size", st.plan_size},
                   {"planned_calls", st.planned_calls},
                   {"config_hash", config_hash(enc)},
                   {"records_file", rec.generic_string()},
                   {"mean_prompt_tokens", mean_prompt(usage)},
                   {"mean_completion_tokens", mean_completion(usage)},
                   {"prompt_tokens", usage.prompt_tokens},
                   {"completion_tokens", usage.completion_tokens}});
    out << "encoded " << targets.size() << " targets: plan size " << st.plan_size
        << ", planned calls " << st.planned_calls << ", cache hits " << st.cache_hits
        << ", copied forward " << st.copied_forward
        << '\n';
    ws.finish("ok", {{"encode",
                      {{"gateway_calls", st.gateway_calls},
                       {"cache_hits", st.cache_hits},
                       {"copied_forward", st.copied_forward}}}},
              out);
    return kExitOk;
  } catch (const EncodeAborted& e) {
    json remaining = json::array();
    for (const auto& k : e.remaining()) remaining.push_back({{"node", k.node.value}, {"layer", k.layer}});
    ws.finish("aborted", {{"error", e.what()}, {"remaining", remaining}}, out);
    out << "aborted: " << e.what() << "; " << e.remaining().size()
        << " keys remaining, rerun to resume\n";
    return e.code() == GatewayErrc::budget_exceeded ? kExitBudget : kExitError;
  }
}

int do_eval(Workspace& ws, const CommandOptions& opts, std::ostream& out) {
  ws.prepare_dirs();
  auto ctx = make_context(ws);
  const auto& enc = ws.encoder_config();
  const auto& t = ws.cfg().task;
  if (!opts.ablation) {
    const auto setup = task_setup(ws, ws.graph());
    save_items(ws, setup);
    auto report = run_task(ws.graph(), setup, enc, ctx);
    const std::string label(to_string(setup.kind));
    report.label = label;
    ws.write_json("reports/" + label + ".json", ws.eval_report(report, label));
    const auto table = comparison_rows({{"GLN", report, label}},
                                       t.is_link() ? "hr@1" : "accuracy");
    ws.write_text("reports/" + label + ".csv", to_csv(table));
    const auto text = format_table(table);
    ws.write_text("reports/" + label + ".txt", text);
    out << text << label << ": " << fixed(report.metric) << " (" << report.correct << "/"
        << report.records.size() << "), " << report.parse_failures << " unparsed\n";
    ws.finish("ok", {}, out);
    return kExitOk;
  }

  // Both tasks; an explicit n applies to both.
  std::optional<TaskSetup> node, link;
  if (ws.labels()) node = classification_setup(ws, ws.graph(), t.n ? t.n : 1000);
  link = link_setup(ws, ws.graph(), t.n ? t.n : 500);
  if (node) save_items(ws, *node);
  save_items(ws, *link);
  const std::vector<TaskItem> none;
  const auto rows = run_ablation_grid(ws.graph(), node ? node->items : none,
                                      node ? node->classes : std::vector<std::string>{},
                                      link->items, enc, ctx);
  json j = {{"rows", json::array()}};
  for (const auto& r : rows) {
    const std::string tag = std::string(r.graph_attention ? "ga" : "noga") + "_" +
                            (r.initial_residual ? "irc" : "noirc");
    json rj = {{"graph_attention", r.graph_attention}, {"initial_residual", r.initial_residual}};
    if (r.node) rj["node"] = ws.eval_report(*r.node, "ablation." + tag + ".node");
    if (r.link) rj["link"] = ws.eval_report(*r.link, "ablation." + tag + ".link");
    j["rows"].push_back(rj);
  }
  ws.write_json("reports/ablation.json", j);
  ws.write_text("reports/ablation.csv", ablation_csv(rows));
  const auto text = ablation_table(rows);
  ws.write_text("reports/ablation.txt", text);
  out << text;
  ws.finish("ok", {}, out);
  return kExitOk;
}

int do_judge(Workspace& ws, std::ostream& out) {
  ws.prepare_dirs();
  const auto& c = ws.cfg();
  JudgeOptions jo;
  jo.n = c.judge.n;
  jo.min_degree = c.judge.min_degree;
  jo.seed = c.judge.seed;
  jo.base = ws.encoder_config();
  jo.concurrency = c.concurrency;
  jo.max_output_tokens = c.task.max_output_tokens;
  const auto study =
      run_judge_study(ws.graph(), ws.encoder(), *ws.role("judge").gateway, jo);
  ws.write_json("reports/judge.json", to_json(study));
  ws.write_text("reports/judge.csv", judge_csv(study));
  std::vector<std::vector<std::string>> table = {
      {"question", "agree", "disagree", "unclear", "judged", "excluded"}};
  for (std::size_t q = 0; q < kJudgeQuestions; ++q) {
    const auto& t = study.questions[q];
    const auto r = t.ratios();
    table.push_back({"Q" + std::to_string(q + 1), fixed(r[0]), fixed(r[1]), fixed(r[2]),
                     std::to_string(t.judged), std::to_string(t.excluded)});
  }
  const auto text = format_table(table);
  ws.write_text("reports/judge.txt", text);
  out << text << "judge calls: " << study.judge_calls << '\n';

  std::size_t failed = 0;
  for (const auto& n : study.nodes) {
    bool bad = !n.encode_error.empty();
    for (const auto& a : n.answers) bad = bad || (a && !a->error.empty());
    failed += bad;
  }
  if (failed) {
    ws.finish("partial", {{"failed_nodes", failed}}, out);
    out << failed << " nodes failed\n";
    return ws.budget_reached() ? kExitBudget : kExitError;
  }
  ws.finish("ok", {}, out);
  return kExitOk;
}

int do_corrupt(Workspace& ws, std::ostream& out) {
  ws.prepare_dirs();
  const auto& c = ws.cfg();
  auto ctx = make_context(ws);
  const auto setup = task_setup(ws, ws.graph());
  save_items(ws, setup);
  auto enc = ws.encoder_config();
  std::vector<Row> rows;
  json extra;

  if (c.corrupt.mode == "neighborhood") {
    if (c.corrupt.true_k + c.corrupt.noise_k > enc.neighbor_k) {
      throw ConfigError("[corrupt] true_k + noise_k exceeds [encoder] neighbor_k");
    }
    rows.push_back({"orig", run_task(ws.graph(), setup, enc, ctx), "corrupt.orig"});
    ctx.corruption = NeighborCorruption{c.corrupt.true_k, c.corrupt.noise_k};
    auto off = enc;
    off.graph_attention = false;
    rows.push_back({"w/o GA", run_task(ws.graph(), setup, off, ctx), "corrupt.without_ga"});
    auto on = enc;
    on.graph_attention = true;
    rows.push_back({"w/ GA", run_task(ws.graph(), setup, on, ctx), "corrupt.with_ga"});
    extra = {{"mode", "neighborhood"},
             {"true_k", c.corrupt.true_k},
             {"noise_k", c.corrupt.noise_k}};
  } else {
    const auto corrupted = corrupt_attributes(ws.graph(), c.corrupt.attribute_ratio, enc.seed);
    rows.push_back({"orig", run_task(ws.graph(), setup, enc, ctx), "corrupt.orig"});
    rows.push_back(
        {"w/o denoising", run_task(corrupted.graph, setup, enc, ctx), "corrupt.noisy"});
    // Only the nodes the task reads attributes from are denoised.
    TaskSetup probe = setup;
    if (probe.kind == TaskKind::link) probe.working = link_working_graph(corrupted.graph, setup.items);
    const TextGraph& pg = probe.working ? *probe.working : corrupted.graph;
    const auto plan = plan_receptive_field(pg, task_targets(probe), enc);
    std::vector<NodeId> base_nodes;
    for (auto v : plan.required[0]) base_nodes.push_back(pg.id(v));
    const auto denoised = ws.encoder().denoise_attributes(
        corrupted.graph, std::span<const NodeId>(base_nodes));
    const auto denoise_usage = usage_report(ws.encoder().last_stats().usage);
    rows.push_back({"w/ denoising", run_task(denoised, setup, enc, ctx), "corrupt.denoised"});
    extra = {{"mode", "attributes"},
             {"attribute_ratio", c.corrupt.attribute_ratio},
             {"words_removed", corrupted.words_removed},
             {"emptied_nodes", corrupted.emptied.size()},
             {"denoised_nodes", base_nodes.size()},
             {"denoise_prompt_tokens", denoise_usage.prompt_tokens},
             {"denoise_completion_tokens", denoise_usage.completion_tokens}};
  }
  write_comparison(ws, "corrupt", rows, setup.kind, extra, out);
  ws.finish("ok", {}, out);
  return kExitOk;
}

int do_sweep(Workspace& ws, std::ostream& out) {
  ws.prepare_dirs();
  const auto& c = ws.cfg();
  auto ctx = make_context(ws);
  const auto setup = task_setup(ws, ws.graph());
  save_items(ws, setup);
  const auto base = ws.encoder_config();
  std::vector<Row> rows;
  for (auto k : c.sweep.neighbor_k) {
    auto cfg = base;
    cfg.neighbor_k = k;
    cfg.validate();
    const std::string label = "GLN (N=" + std::to_string(k) + ")";
    rows.push_back({label, run_task(ws.graph(), setup, cfg, ctx),
                    "sweep.neighbor_k_" + std::to_string(k)});
  }
  for (auto oc : c.sweep.output_constraints) {
    auto cfg = base;
    cfg.output_constraint = oc;
    const std::string name(to_string(oc));
    rows.push_back({"GLN (" + name + ")", run_task(ws.graph(), setup, cfg, ctx),
                    "sweep." + slug(name)});
  }
  write_comparison(ws, "sweep", rows, setup.kind, {}, out);
  ws.finish("ok", {}, out);
  return kExitOk;
}

}  // namespace

int run_command(std::string_view name, const RunConfig& cfg, const CommandOptions& opts,
                std::ostream& out, std::ostream& err) {
  std::unique_ptr<Workspace> ws;
  try {
    check_budget_guard(cfg);
    ws = std::make_unique<Workspace>(cfg, std::string(name), err);
    if (name == "encode") return do_encode(*ws, opts, out);
    if (name == "eval") return do_eval(*ws, opts, out);
    if (name == "judge") return do_judge(*ws, out);
    if (name == "corrupt") return do_corrupt(*ws, out);
    if (name == "sweep") return do_sweep(*ws, out);
    err << "unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PromptError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const EncodeAborted& e) {
    err << "aborted: " << e.what() << '\n';
    if (ws) ws->finish("aborted", {{"error", e.what()}}, out);
    return e.code() == GatewayErrc::budget_exceeded ? kExitBudget : kExitError;
  } catch (const GatewayError& e) {
    err << "gateway error: " << e.what() << '\n';
    if (ws) ws->finish("aborted", {{"error", e.what()}}, out);
    return e.code() == GatewayErrc::budget_exceeded ? kExitBudget : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (ws) ws->finish("failed", {{"error", e.what()}}, out);
    return kExitError;
  }
}

int cmd_validate_bundle(const fs::path& bundle, std::ostream& out, std::ostream& err) {
  try {
    const auto g = load_graph(bundle);
    const auto labels = load_labels(bundle);
    std::size_t min_deg = g.node_count() ? SIZE_MAX : 0, max_deg = 0, isolated = 0, deg10 = 0;
    for (TextGraph::Index v = 0; v < g.node_count(); ++v) {
      const auto d = g.degree(v);
      min_deg = std::min(min_deg, d);
      max_deg = std::max(max_deg, d);
      isolated += d == 0;
      deg10 += d >= 10;
    }
    const double mean = g.node_count() ? 2.0 * static_cast<double>(g.edge_count()) /
                                             static_cast<double>(g.node_count())
                                       : 0.0;
    out << "domain: " << to_string(g.domain()) << '\n'
        << "nodes: " << g.node_count() << '\n'
        << "edges: " << g.edge_count() << '\n'
        << "dropped duplicate edges: " << g.stats().duplicate_edges << '\n'
        << "dropped self-loops: " << g.stats().self_loops << '\n'
        << "degree min/mean/max: " << min_deg << " / " << fixed(mean, 2) << " / " << max_deg
        << '\n'
        << "isolated nodes: " << isolated << '\n'
        << "nodes with degree >= 10: " << deg10 << '\n';
    if (labels) {
      std::set<std::string> classes;
      for (const auto& [_, l] : *labels) classes.insert(l);
      out << "labeled nodes: " << labels->size() << " in " << classes.size() << " classes\n";
    } else {
      out << "labels: none\n";
    }
    out << "fingerprint: " << g.fingerprint() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "invalid bundle: " << e.what() << '\n';
    return kExitError;
  }
}

namespace {

void collect_eval_reports(const json& j, std::vector<const json*>& out) {
  if (j.is_object()) {
    if (j.contains("records_file") && j.contains("metric") && j.contains("items")) {
      out.push_back(&j);
    }
    for (const auto& [_, v] : j.items()) collect_eval_reports(v, out);
  } else if (j.is_array()) {
    for (const auto& v : j) collect_eval_reports(v, out);
  }
}

}  // namespace

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) {
      err << "no manifest.json in " << dir.string() << '\n';
      return kExitError;
    }
    const auto manifest = json::parse(mf);
    const auto hash = manifest.at("run_hash").get<std::string>();
    out << "run_hash: " << hash << '\n'
        << "command: " << manifest.value("command", "") << " (" << manifest.value("status", "")
        << ")\n";
    std::size_t problems = 0;
    auto mismatch = [&](const fs::path& p, const std::string& what) {
      ++problems;
      out << "MISMATCH " << p.generic_string() << ": " << what << '\n';
    };

    std::vector<fs::path> files;
    for (const char* sub : {"reports", "records"}) {
      if (!fs::exists(dir / sub)) continue;
      for (const auto& e : fs::directory_iterator(dir / sub)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    std::vector<std::vector<std::string>> table = {{"report", "items", "metric", "recomputed"}};
    for (const auto& p : files) {
      const auto rel = fs::relative(p, dir);
      const auto ext = p.extension().string();
      if (ext == ".json") {
        std::ifstream in(p);
        const auto j = json::parse(in);
        if (j.value("run_hash", "") != hash) {
          mismatch(rel, "run_hash " + j.value("run_hash", "<none>"));
          continue;
        }
        std::vector<const json*> reports;
        collect_eval_reports(j, reports);
        for (const auto* r : reports) {
          const auto records = read_records_jsonl(dir / r->at("records_file").get<std::string>());
          const double again = recompute_metric(records);
          const double stored = r->at("metric").get<double>();
          table.push_back({r->at("records_file").get<std::string>(),
                           std::to_string(records.size()), fixed(stored), fixed(again)});
          if (again != stored) mismatch(rel, "metric " + fixed(stored) + " vs " + fixed(again));
        }
      } else if (ext == ".jsonl") {
        std::ifstream in(p);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
          ++n;
          if (line.empty()) continue;
          const auto j = json::parse(line);
          if (j.value("run_hash", "") != hash) {
            mismatch(rel, "line " + std::to_string(n) + " run_hash " + j.value("run_hash", "<none>"));
            break;
          }
        }
      } else if (ext == ".csv" || ext == ".txt") {
        std::ifstream in(p);
        std::string first;
        std::getline(in, first);
        if (first != std::string(kStampPrefix) + hash) mismatch(rel, "stamp '" + first + "'");
      }
    }
    if (table.size() > 1) out << format_table(table);
    out << (problems ? std::to_string(problems) + " problems\n" : "consistent\n");
    return problems ? kExitError : kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace gln::cli
