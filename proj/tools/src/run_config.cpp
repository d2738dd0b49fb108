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

#include "gln_cli/run_config.hpp"

#include <set>
#include <type_traits>

#include "gln/hash.hpp"
#include "gln_cli/toml.hpp"

namespace gln::cli {

using json = nlohmann::json;

namespace {

// Pulls typed values out of one table and rejects keys nobody asked for.
class Table {
 public:
  Table(const json& root, std::string name) : name_(std::move(name)) {
    const json* node = &root;
    std::size_t start = 0;
    while (start <= name_.size()) {
      auto dot = name_.find('.', start);
      if (dot == std::string::npos) dot = name_.size();
      const auto part = name_.substr(start, dot - start);
      if (!node->is_object() || !node->contains(part)) {
        node = nullptr;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
    if (node && !node->is_object()) throw ConfigError("[" + name_ + "] must be a table");
    node_ = node;
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const auto& v = (*node_)[key];
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError("[" + name_ + "] " + key + ": expected a non-negative integer");
      }
    }
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": wrong type");
    }
  }

  void get_path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  template <typename T, typename Parse>
  void get_enum(const char* key, T& out, Parse parse) {
    std::string s;
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    get(key, s);
    try {
      out = parse(s);
    } catch (const std::exception& e) {
      throw ConfigError("[" + name_ + "] " + key + ": " + e.what());
    }
  }

  void finish(const std::set<std::string>& subtables = {}) const {
    if (!node_) return;
    for (const auto& [k, _] : node_->items()) {
      if (!seen_.contains(k) && !subtables.contains(k)) {
        throw ConfigError("unknown key '" + k + "' in [" + name_ + "]");
      }
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

void read_backend(const json& root, const std::string& role, BackendSpec& b) {
  Table t(root, "backend." + role);
  t.get("kind", b.kind);
  t.get("model", b.model);
  t.get("base_url", b.base_url);
  t.get("path", b.path);
  t.get("api_key_env", b.api_key_env);
  t.get("requests_per_minute", b.requests_per_minute);
  t.get("max_in_flight", b.max_in_flight);
  t.get("max_attempts", b.max_attempts);
  t.get("timeout_s", b.timeout_s);
  t.get("context_window", b.context_window);
  t.finish();
  if (b.kind != "mock" && b.kind != "openai" && b.kind != "anthropic") {
    throw ConfigError("[backend." + role + "] kind must be mock, openai or anthropic");
  }
  if (!b.is_mock() && b.model.empty()) {
    throw ConfigError("[backend." + role + "] model is required for " + b.kind);
  }
  if (b.max_in_flight < 1 || b.max_attempts < 1) {
    throw ConfigError("[backend." + role + "] max_in_flight and max_attempts must be >= 1");
  }
}

json backend_json(const BackendSpec& b, bool operational) {
  json j = {{"kind", b.kind}, {"model", b.model}, {"base_url", b.base_url}, {"path", b.path}};
  if (b.is_mock()) j["context_window"] = b.context_window;
  if (operational) {
    j["api_key_env"] = b.api_key_env;
    j["requests_per_minute"] = b.requests_per_minute;
    j["max_in_flight"] = b.max_in_flight;
    j["max_attempts"] = b.max_attempts;
    j["timeout_s"] = b.timeout_s;
  }
  return j;
}

json config_json(const RunConfig& c, bool operational) {
  const auto& e = c.encoder;
  json oc = json::array();
  for (auto o : c.sweep.output_constraints) oc.push_back(std::string(to_string(o)));
  json j = {
      {"graph",
       {{"bundle", c.bundle.string()},
        {"domain", c.domain ? json(std::string(to_string(*c.domain))) : json(nullptr)}}},
      {"encoder",
       {{"canonical", e.canonical()}, {"max_output_tokens", c.encode_max_output_tokens}}},
      {"task",
       {{"kind", c.task.kind},
        {"n", c.task.effective_n()},
        {"min_degree", c.task.min_degree},
        {"negatives", c.task.negatives},
        {"seed", c.task.seed},
        {"max_output_tokens", c.task.max_output_tokens}}},
      {"judge", {{"n", c.judge.n}, {"min_degree", c.judge.min_degree}, {"seed", c.judge.seed}}},
      {"corrupt",
       {{"mode", c.corrupt.mode},
        {"true_k", c.corrupt.true_k},
        {"noise_k", c.corrupt.noise_k},
        {"attribute_ratio", c.corrupt.attribute_ratio}}},
      {"sweep", {{"neighbor_k", c.sweep.neighbor_k}, {"output_constraints", oc}}},
      {"backend",
       {{"encoder", backend_json(c.encoder_backend, operational)},
        {"task", backend_json(c.task_backend, operational)},
        {"judge", backend_json(c.judge_backend, operational)}}},
  };
  if (operational) {
    j["encoder"]["concurrency"] = c.concurrency;
    j["budget"] = {{"max_calls", c.budget.max_calls},
                   {"max_total_tokens", c.budget.max_total_tokens}};
    j["run"] = {{"out", c.out.string()}, {"cache_dir", c.cache_root().string()}};
  }
  return j;
}

}  // namespace

json RunConfig::canonical() const { return config_json(*this, false); }
json RunConfig::to_json() const { return config_json(*this, true); }
std::string RunConfig::run_hash() const { return sha256_hex(canonical().dump()); }

RunConfig run_config_from_tree(const json& tree) {
  static const std::set<std::string> kSections = {"graph",  "encoder", "task",   "judge",
                                                  "corrupt", "sweep",  "backend", "budget",
                                                  "run"};
  for (const auto& [k, _] : tree.items()) {
    if (!kSections.contains(k)) throw ConfigError("unknown section [" + k + "]");
  }
  RunConfig c;

  Table graph(tree, "graph");
  graph.get_path("bundle", c.bundle);
  std::string domain;
  graph.get("domain", domain);
  if (!domain.empty()) {
    try {
      c.domain = parse_domain_tag(domain);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("[graph] domain: ") + e.what());
    }
  }
  graph.finish();

  Table enc(tree, "encoder");
  auto& e = c.encoder;
  enc.get("layers", e.layers);
  enc.get("neighbor_k", e.neighbor_k);
  enc.get("graph_attention", e.graph_attention);
  enc.get("initial_residual", e.initial_residual);
  enc.get_enum("output_constraint", e.output_constraint, parse_output_constraint);
  enc.get_enum("variant", e.variant, parse_variant);
  enc.get("seed", e.seed);
  enc.get_enum("ga_phrase", e.ga_phrase, parse_ga_phrase);
  enc.get_enum("irc_style", e.irc_style, parse_irc_style);
  enc.get("one_hop_k", e.one_hop_k);
  enc.get("two_hop_k", e.two_hop_k);
  enc.get("max_output_tokens", c.encode_max_output_tokens);
  enc.get("concurrency", c.concurrency);
  enc.finish();
  if (e.variant == Variant::gln_base) {
    e.graph_attention = false;
    e.initial_residual = false;
  }
  if (c.domain) e.domain = *c.domain;
  try {
    e.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("[encoder] ") + ex.what());
  }

  Table task(tree, "task");
  task.get("kind", c.task.kind);
  task.get("n", c.task.n);
  task.get("min_degree", c.task.min_degree);
  task.get("negatives", c.task.negatives);
  task.get("seed", c.task.seed);
  task.get("max_output_tokens", c.task.max_output_tokens);
  task.finish();
  if (c.task.kind != "node-classification" && c.task.kind != "link-prediction") {
    throw ConfigError("[task] kind must be node-classification or link-prediction");
  }
  if (c.task.is_link() && c.task.negatives != 4) {
    throw ConfigError("[task] link prediction uses exactly 4 negatives");
  }

  Table judge(tree, "judge");
  judge.get("n", c.judge.n);
  judge.get("min_degree", c.judge.min_degree);
  judge.get("seed", c.judge.seed);
  judge.finish();

  Table corrupt(tree, "corrupt");
  corrupt.get("mode", c.corrupt.mode);
  corrupt.get("true_k", c.corrupt.true_k);
  corrupt.get("noise_k", c.corrupt.noise_k);
  corrupt.get("attribute_ratio", c.corrupt.attribute_ratio);
  corrupt.finish();
  if (c.corrupt.mode != "neighborhood" && c.corrupt.mode != "attributes") {
    throw ConfigError("[corrupt] mode must be neighborhood or attributes");
  }

  Table sweep(tree, "sweep");
  sweep.get("neighbor_k", c.sweep.neighbor_k);
  std::vector<std::string> oc;
  sweep.get("output_constraints", oc);
  if (!oc.empty()) {
    c.sweep.output_constraints.clear();
    for (const auto& s : oc) c.sweep.output_constraints.push_back(parse_output_constraint(s));
  }
  sweep.finish();

  Table backend(tree, "backend");
  backend.finish({"encoder", "task", "judge"});
  read_backend(tree, "encoder", c.encoder_backend);
  read_backend(tree, "task", c.task_backend);
  read_backend(tree, "judge", c.judge_backend);

  Table budget(tree, "budget");
  budget.get("max_calls", c.budget.max_calls);
  budget.get("max_total_tokens", c.budget.max_total_tokens);
  budget.finish();

  Table run(tree, "run");
  run.get_path("out", c.out);
  run.get_path("cache_dir", c.cache_dir);
  run.finish();
  return c;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides) {
  json tree = file ? load_toml(*file) : json::object();
  for (const auto& o : overrides) apply_override(tree, o);
  return run_config_from_tree(tree);
}

void check_budget_guard(const RunConfig& cfg) {
  for (const auto* b : {&cfg.encoder_backend, &cfg.task_backend, &cfg.judge_backend}) {
    if (b->is_mock()) continue;
    if (cfg.budget.max_calls == 0 || cfg.budget.max_total_tokens == 0) {
      throw ConfigError("backend '" + b->kind +
                        "' needs explicit [budget] max_calls and max_total_tokens");
    }
  }
}

}  // namespace gln::cli
