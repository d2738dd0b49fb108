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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gln_cli/commands.hpp"
#include "gln_cli/run_config.hpp"
#include "gln_cli/toml.hpp"

namespace {

using gln::cli::CommandOptions;

// Flags shared by the pipeline subcommands. Each one becomes a --set override
// applied after the config file.
struct CommonFlags {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::optional<std::string> bundle, out, cache_dir, task;
  std::optional<long long> n, min_degree, negatives, layers, neighbor_k, seed;
  std::optional<long long> max_calls, max_tokens;

  std::vector<std::string> overrides() const {
    std::vector<std::string> o;
    auto str = [&](const char* key, const std::optional<std::string>& v) {
      if (v) o.push_back(std::string(key) + "=" + nlohmann::json(*v).dump());
    };
    auto num = [&](const char* key, const std::optional<long long>& v) {
      if (v) o.push_back(std::string(key) + "=" + std::to_string(*v));
    };
    str("graph.bundle", bundle);
    str("run.out", out);
    str("run.cache_dir", cache_dir);
    str("task.kind", task);
    num("task.n", n);
    num("task.min_degree", min_degree);
    num("task.negatives", negatives);
    num("task.seed", seed);
    num("encoder.layers", layers);
    num("encoder.neighbor_k", neighbor_k);
    num("budget.max_calls", max_calls);
    num("budget.max_total_tokens", max_tokens);
    // Explicit --set wins over the named flags.
    o.insert(o.end(), sets.begin(), sets.end());
    return o;
  }
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("-c,--config", f.config, "TOML config file");
  app->add_option("--set", f.sets, "Override, e.g. --set encoder.layers=1")->take_all();
  app->add_option("--bundle", f.bundle, "Graph bundle directory");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--cache-dir", f.cache_dir, "Cache directory (default <out>/cache)");
  app->add_option("--task", f.task, "node-classification | link-prediction");
  app->add_option("--n", f.n, "Task items (0 = protocol default)");
  app->add_option("--min-degree", f.min_degree, "Degree threshold for task sampling");
  app->add_option("--negatives", f.negatives, "Negatives per link item");
  app->add_option("--seed", f.seed, "Task sampling seed");
  app->add_option("--layers", f.layers, "Message-passing layers");
  app->add_option("--neighbor-k", f.neighbor_k, "Neighbors sampled per node");
  app->add_option("--max-calls", f.max_calls, "Backend call cap per role");
  app->add_option("--max-tokens", f.max_tokens, "Token cap per role");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gln: graph language network pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  CommandOptions opts;
  std::vector<CLI::App*> pipeline;

  auto* encode = app.add_subcommand("encode", "Encode targets and populate the cache");
  add_common(encode, flags);
  encode->add_option("--targets", opts.targets, "File with one node id per line");
  encode->add_flag("--dry-run", opts.dry_run, "Print the plan without calling any backend");
  pipeline.push_back(encode);

  auto* eval = app.add_subcommand("eval", "Run a zero-shot task end to end");
  add_common(eval, flags);
  eval->add_flag("--ablation", opts.ablation, "Run the attention x residual grid");
  pipeline.push_back(eval);

  auto* judge = app.add_subcommand("judge", "Run the judge study");
  add_common(judge, flags);
  pipeline.push_back(judge);

  std::optional<std::string> mode;
  auto* corrupt = app.add_subcommand("corrupt", "Compare clean and corrupted inputs");
  add_common(corrupt, flags);
  corrupt->add_option("--mode", mode, "neighborhood | attributes");
  pipeline.push_back(corrupt);

  auto* sweep = app.add_subcommand("sweep", "Sweep neighbor_k and output constraint");
  add_common(sweep, flags);
  pipeline.push_back(sweep);

  std::string report_dir = "out";
  auto* report = app.add_subcommand("report", "Check and summarize an output directory");
  report->add_option("--out,dir", report_dir, "Output directory");

  std::string bundle;
  auto* validate = app.add_subcommand("validate-bundle", "Load a bundle and print statistics");
  validate->add_option("bundle", bundle, "Graph bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gln::cli::kExitConfig;
  }

  if (report->parsed()) return gln::cli::cmd_report(report_dir, std::cout, std::cerr);
  if (validate->parsed()) return gln::cli::cmd_validate_bundle(bundle, std::cout, std::cerr);

  for (auto* sub : pipeline) {
    if (!sub->parsed()) continue;
    auto overrides = flags.overrides();
    if (mode) overrides.insert(overrides.begin(), "corrupt.mode=" + nlohmann::json(*mode).dump());
    gln::cli::RunConfig cfg;
    try {
      std::optional<std::filesystem::path> file;
      if (flags.config) file = *flags.config;
      cfg = gln::cli::load_run_config(file, overrides);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return gln::cli::kExitConfig;
    }
    return gln::cli::run_command(sub->get_name(), cfg, opts, std::cout, std::cerr);
  }
  return gln::cli::kExitConfig;
}
