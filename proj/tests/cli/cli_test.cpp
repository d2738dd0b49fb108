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


#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "gln/encoder.hpp"
#include "gln_cli/commands.hpp"
#include "gln_cli/run_config.hpp"
#include "gln_cli/toml.hpp"

namespace gln::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

TEST(Toml, ParsesTheSubset) {
  const auto t = parse_toml(R"(# top comment
[graph]
bundle = "data/arxiv"   # trailing
domain = 'citation'

[encoder]
layers = 2
neighbor_k = 1_0
seed = 42
graph_attention = true
initial_residual = false

[sweep]
neighbor_k = [3, 5, 10]
output_constraints = ["two_paragraphs", "three_sentences"]

[backend.task]
kind = "openai"
requests_per_minute = 60.5
path = "a\"b\\c"
)",
                            "t.toml");
  EXPECT_EQ(t["graph"]["bundle"], "data/arxiv");
  EXPECT_EQ(t["graph"]["domain"], "citation");
  EXPECT_EQ(t["encoder"]["neighbor_k"], 10);
  EXPECT_EQ(t["encoder"]["graph_attention"], true);
  EXPECT_EQ(t["encoder"]["initial_residual"], false);
  EXPECT_EQ(t["sweep"]["neighbor_k"], json({3, 5, 10}));
  EXPECT_EQ(t["sweep"]["output_constraints"][1], "three_sentences");
  EXPECT_DOUBLE_EQ(t["backend"]["task"]["requests_per_minute"].get<double>(), 60.5);
  EXPECT_EQ(t["backend"]["task"]["path"], "a\"b\\c");
}

TEST(Toml, ErrorsCarryOriginAndLine) {
  try {
    parse_toml("[a]\nx = 1\nx = 2\n", "cfg.toml");
    FAIL() << "duplicate key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.toml:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_toml("[a\n", "x"), ConfigError);
  EXPECT_THROW(parse_toml("[a]\nx = \"open\n", "x"), ConfigError);
  EXPECT_THROW(parse_toml("[a]\nx = nope\n", "x"), ConfigError);
  EXPECT_THROW(parse_toml("[a]\nx = 1 2\n", "x"), ConfigError);
}

TEST(Toml, OverridesTakeBareWords) {
  json tree = parse_toml("[task]\nn = 5\n", "x");
  apply_override(tree, "task.n=7");
  apply_override(tree, "task.kind=link-prediction");
  apply_override(tree, "backend.judge.kind = mock");
  EXPECT_EQ(tree["task"]["n"], 7);
  EXPECT_EQ(tree["task"]["kind"], "link-prediction");
  EXPECT_EQ(tree["backend"]["judge"]["kind"], "mock");
  EXPECT_THROW(apply_override(tree, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(tree, "task=3"), ConfigError);
}

TEST(RunConfig, DefaultsFollowTheProtocol) {
  const auto c = run_config_from_tree(json::object());
  EXPECT_EQ(c.task.effective_n(), 1000u);
  EXPECT_EQ(c.task.min_degree, 10u);
  EXPECT_EQ(c.task.negatives, 4u);
  EXPECT_EQ(c.encoder.layers, 2);
  EXPECT_EQ(c.encoder.neighbor_k, 10u);
  EXPECT_EQ(c.judge.n, 100u);
  EXPECT_EQ(c.corrupt.true_k, 7u);
  EXPECT_EQ(c.corrupt.noise_k, 3u);
  EXPECT_EQ(c.cache_root(), fs::path("out") / "cache");
  auto link = run_config_from_tree({{"task", {{"kind", "link-prediction"}}}});
  EXPECT_EQ(link.task.effective_n(), 500u);
}

TEST(RunConfig, StrictKeys) {
  EXPECT_THROW(run_config_from_tree({{"encoder", {{"layerz", 2}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"extras", {{"a", 1}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"backend", {{"cache", {{"a", 1}}}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"task", {{"n", -5}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"task", {{"n", "ten"}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"encoder", {{"variant", "gcn"}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"encoder", {{"layers", 0}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"task", {{"kind", "regression"}}}}), ConfigError);
  EXPECT_THROW(run_config_from_tree({{"backend", {{"task", {{"kind", "openai"}}}}}}),
               ConfigError);
}

TEST(RunConfig, PrecedenceFileThenFlags) {
  testing::TempDir dir("cfg");
  std::ofstream(dir / "run.toml") << "[encoder]\nlayers = 1\nneighbor_k = 4\n";
  const auto file_only = load_run_config(dir / "run.toml", {});
  EXPECT_EQ(file_only.encoder.layers, 1);
  EXPECT_EQ(file_only.encoder.neighbor_k, 4u);
  const auto flagged = load_run_config(dir / "run.toml", {"encoder.neighbor_k=6"});
  EXPECT_EQ(flagged.encoder.layers, 1);
  EXPECT_EQ(flagged.encoder.neighbor_k, 6u);
  const auto defaults = load_run_config(std::nullopt, {});
  EXPECT_EQ(defaults.encoder.layers, 2);
}

TEST(RunConfig, HashCoversSemanticsOnly) {
  const auto base = load_run_config(std::nullopt, {"graph.bundle=b"});
  const auto h = base.run_hash();
  EXPECT_EQ(h.size(), 64u);
  // Operational settings leave the hash alone.
  for (const char* o : {"run.out=elsewhere", "run.cache_dir=c", "budget.max_calls=10",
                        "encoder.concurrency=1", "backend.encoder.max_in_flight=1",
                        "backend.task.requests_per_minute=30"}) {
    EXPECT_EQ(load_run_config(std::nullopt, {"graph.bundle=b", o}).run_hash(), h) << o;
  }
  for (const char* o : {"encoder.neighbor_k=5", "task.seed=1", "task.n=10", "graph.bundle=c",
                        "backend.task.model=m2", "encoder.graph_attention=false",
                        "judge.n=99", "sweep.neighbor_k=[3]"}) {
    EXPECT_NE(load_run_config(std::nullopt, {"graph.bundle=b", o}).run_hash(), h) << o;
  }
  // Explicit protocol default and implicit default agree.
  EXPECT_EQ(load_run_config(std::nullopt, {"graph.bundle=b", "task.n=1000"}).run_hash(), h);
}

TEST(RunConfig, ExampleConfigLoads) {
  const auto c = load_run_config(fs::path(GLN_EXAMPLE_CONFIG), {});
  const auto d = load_run_config(std::nullopt, {"graph.bundle=\"data/arxiv\""});
  EXPECT_EQ(c.run_hash(), d.run_hash());
}

TEST(BudgetGuard, RealBackendsNeedBothCaps) {
  EXPECT_NO_THROW(check_budget_guard(load_run_config(std::nullopt, {})));
  const std::vector<std::string> real = {"backend.task.kind=anthropic",
                                         "backend.task.model=some-model"};
  EXPECT_THROW(check_budget_guard(load_run_config(std::nullopt, real)), ConfigError);
  auto one = real;
  one.push_back("budget.max_calls=100");
  EXPECT_THROW(check_budget_guard(load_run_config(std::nullopt, one)), ConfigError);
  one.push_back("budget.max_total_tokens=50000");
  EXPECT_NO_THROW(check_budget_guard(load_run_config(std::nullopt, one)));

  std::ostringstream out, err;
  EXPECT_EQ(run_command("encode", load_run_config(std::nullopt, real), {}, out, err),
            kExitConfig);
}

// A bundle on disk plus helpers to drive the commands against it.
class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    graph_.emplace(testing::dense_graph(60, 12, 40, 5, DomainTag::citation));
    save_graph(*graph_, dir_ / "bundle");
    save_labels(testing::random_labels(*graph_, 4, 5), dir_ / "bundle");
  }

  std::vector<std::string> base_overrides() const {
    return {"graph.bundle=" + json((dir_ / "bundle").string()).dump(),
            "run.out=" + json((dir_ / "out").string()).dump(),
            "encoder.neighbor_k=3", "task.min_degree=10", "task.n=12"};
  }

  int run(const std::string& cmd, std::vector<std::string> extra = {},
          CommandOptions opts = {}) {
    auto o = base_overrides();
    o.insert(o.end(), extra.begin(), extra.end());
    out_.str("");
    err_.str("");
    return run_command(cmd, load_run_config(std::nullopt, o), opts, out_, err_);
  }

  fs::path out() const { return dir_ / "out"; }

  testing::TempDir dir_{"cli"};
  std::optional<TextGraph> graph_;
  std::ostringstream out_, err_;
};

TEST_F(CliPipeline, BudgetAbortIsResumable) {
  // Find a run of consecutive targets whose plan needs exactly 33 calls.
  EncoderConfig cfg;
  cfg.neighbor_k = 3;
  std::vector<NodeId> targets;
  for (TextGraph::Index start = 0; start < graph_->node_count(); ++start) {
    targets.clear();
    for (auto v = start; v < graph_->node_count(); ++v) {
      targets.push_back(graph_->id(v));
      if (plan_receptive_field(*graph_, targets, cfg).call_count() >= 33) break;
    }
    if (plan_receptive_field(*graph_, targets, cfg).call_count() == 33) break;
  }
  ASSERT_EQ(plan_receptive_field(*graph_, targets, cfg).call_count(), 33u)
      << "fixture yields no 33-call plan";
  {
    std::ofstream f(dir_ / "targets.txt");
    for (const auto& t : targets) f << t.value << '\n';
  }
  CommandOptions opts;
  opts.targets = dir_ / "targets.txt";

  opts.dry_run = true;
  ASSERT_EQ(run("encode", {}, opts), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("planned calls: 33"), std::string::npos) << out_.str();
  EXPECT_FALSE(fs::exists(out() / "manifest.json"));

  opts.dry_run = false;
  EXPECT_EQ(run("encode", {"budget.max_calls=10"}, opts), kExitBudget) << err_.str();
  const auto manifest = json::parse(slurp(out() / "manifest.json"));
  EXPECT_EQ(manifest["status"], "aborted");
  EXPECT_EQ(manifest["new_calls"]["encoder"], 10);
  EXPECT_EQ(manifest["remaining"].size(), 23u);
  EXPECT_EQ(line_count(out() / "records" / "usage.encoder.jsonl"), 10u);

  ASSERT_EQ(run("encode", {}, opts), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("\n23 new calls"), std::string::npos) << out_.str();
  ASSERT_EQ(run("encode", {}, opts), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("\n0 new calls"), std::string::npos) << out_.str();
}

TEST_F(CliPipeline, EvalRerunIsByteIdentical) {
  ASSERT_EQ(run("eval"), kExitOk) << err_.str();
  const auto first = slurp(out() / "reports" / "node_classification.json");
  const auto records = slurp(out() / "records" / "node_classification.jsonl");
  ASSERT_EQ(run("eval"), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("\n0 new calls"), std::string::npos) << out_.str();
  EXPECT_EQ(slurp(out() / "reports" / "node_classification.json"), first);
  EXPECT_EQ(slurp(out() / "records" / "node_classification.jsonl"), records);

  const auto j = json::parse(first);
  EXPECT_EQ(j["items"], 12);
  EXPECT_EQ(j["run_hash"], json::parse(slurp(out() / "manifest.json"))["run_hash"]);
  EXPECT_EQ(cmd_report(out(), out_, err_), kExitOk);
}

TEST_F(CliPipeline, EveryArtifactCarriesTheRunHash) {
  ASSERT_EQ(run("eval", {"task.kind=link-prediction", "task.n=8"}), kExitOk) << err_.str();
  const auto hash = json::parse(slurp(out() / "manifest.json"))["run_hash"].get<std::string>();
  std::size_t checked = 0;
  for (const auto& e : fs::recursive_directory_iterator(out())) {
    if (!e.is_regular_file() || e.path().string().find("/cache/") != std::string::npos) continue;
    EXPECT_NE(slurp(e.path()).find(hash), std::string::npos) << e.path();
    ++checked;
  }
  EXPECT_GE(checked, 6u);

  // A report from another configuration is flagged.
  std::ofstream(out() / "reports" / "stray.csv") << "# run_hash=feed\nx\n";
  std::ostringstream o, e;
  EXPECT_EQ(cmd_report(out(), o, e), kExitError);
  EXPECT_NE(o.str().find("MISMATCH reports/stray.csv"), std::string::npos) << o.str();
}

TEST_F(CliPipeline, TamperedRecordsAreCaught) {
  ASSERT_EQ(run("eval"), kExitOk) << err_.str();
  const auto path = out() / "records" / "node_classification.jsonl";
  std::string text = slurp(path);
  const auto pos = text.find("\"correct\":false");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 15, "\"correct\":true ");
  std::ofstream(path, std::ios::binary) << text;
  std::ostringstream o, e;
  EXPECT_EQ(cmd_report(out(), o, e), kExitError);
  EXPECT_NE(o.str().find("metric"), std::string::npos) << o.str();
}

TEST_F(CliPipeline, ComparisonCommands) {
  ASSERT_EQ(run("eval", {}, {.ablation = true}), kExitOk) << err_.str();
  EXPECT_EQ(line_count(out() / "reports" / "ablation.csv"), 6u);  // stamp, header, 4 rows

  EXPECT_EQ(run("corrupt"), kExitConfig);  // 7 + 3 neighbors need neighbor_k >= 10
  ASSERT_EQ(run("corrupt", {"encoder.neighbor_k=10"}), kExitOk) << err_.str();
  const auto corrupt = json::parse(slurp(out() / "reports" / "corrupt.json"));
  ASSERT_EQ(corrupt["rows"].size(), 3u);
  EXPECT_EQ(corrupt["rows"][0]["row"], "orig");
  EXPECT_EQ(corrupt["rows"][1]["row"], "w/o GA");
  EXPECT_EQ(corrupt["rows"][2]["row"], "w/ GA");

  ASSERT_EQ(run("corrupt", {"corrupt.mode=attributes"}), kExitOk) << err_.str();
  EXPECT_EQ(json::parse(slurp(out() / "reports" / "corrupt.json"))["rows"].size(), 3u);

  ASSERT_EQ(run("sweep"), kExitOk) << err_.str();
  const auto sweep = json::parse(slurp(out() / "reports" / "sweep.json"));
  ASSERT_EQ(sweep["rows"].size(), 5u);
  EXPECT_EQ(sweep["rows"][0]["row"], "GLN (N=3)");
  EXPECT_EQ(sweep["rows"][2]["row"], "GLN (N=10)");
  std::set<std::string> hashes;
  for (std::size_t i = 0; i < 3; ++i) {
    hashes.insert(sweep["rows"][i]["config_hash"].get<std::string>());
    // Same task items for every row.
    EXPECT_EQ(sweep["rows"][i]["items"], sweep["rows"][0]["items"]);
  }
  EXPECT_EQ(hashes.size(), 3u);
  EXPECT_NE(slurp(out() / "reports" / "sweep.csv").find("encode_out_tokens"), std::string::npos);

  ASSERT_EQ(run("judge", {"judge.n=6"}), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("judge calls: 18"), std::string::npos) << out_.str();
}

TEST_F(CliPipeline, MissingBundleFails) {
  std::ostringstream o, e;
  EXPECT_EQ(cmd_validate_bundle(dir_ / "nothing", o, e), kExitError);
  EXPECT_EQ(cmd_validate_bundle(dir_ / "bundle", o, e), kExitOk) << e.str();
  EXPECT_NE(o.str().find("nodes: 60"), std::string::npos) << o.str();
  EXPECT_EQ(run("eval", {"graph.bundle=\"/nonexistent\""}), kExitError);
}

}  // namespace
}  // namespace gln::cli
