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

#include "gln/encoder.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>

#include <nlohmann/json.hpp>

#include "gln/hash.hpp"
#include "gln/sampler.hpp"
#include "parallel.hpp"

namespace gln {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Index = TextGraph::Index;

std::map<int, std::string> LayeredRepresentation::refined() const {
  std::map<int, std::string> out;
  for (const auto& [layer, text] : texts) {
    if (layer >= 1) out.emplace(layer, text);
  }
  return out;
}

// --- cache -------------------------------------------------------------------

namespace {

std::string entry_key(const NodeId& node, int layer) {
  return std::to_string(layer) + "\x1f" + node.value;
}

}  // namespace

RepresentationCache::RepresentationCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

fs::path RepresentationCache::shard_path(const std::string& config_hash) const {
  return dir_ / (config_hash + ".jsonl");
}

RepresentationCache::Shard& RepresentationCache::shard_locked(
    const std::string& config_hash) const {
  auto it = shards_.find(config_hash);
  if (it != shards_.end()) return it->second;
  Shard shard;
  if (!dir_.empty()) {
    std::ifstream in(shard_path(config_hash), std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = json::parse(line, nullptr, false);
      if (rec.is_discarded()) continue;  // torn tail of an interrupted write
      Entry e{rec.at("text").get<std::string>(), rec.value("prompt_tokens", std::int64_t{0}),
              rec.value("completion_tokens", std::int64_t{0})};
      const auto key = entry_key(NodeId(rec.at("node").get<std::string>()),
                                 rec.at("layer").get<int>());
      const auto [pos, inserted] = shard.emplace(key, e);
      if (!inserted && pos->second.text != e.text) {
        throw CacheIntegrityError("cache shard " + config_hash +
                                  " holds conflicting texts for node '" +
                                  rec.at("node").get<std::string>() + "'");
      }
    }
  }
  return shards_.emplace(config_hash, std::move(shard)).first->second;
}

std::optional<RepresentationCache::Entry> RepresentationCache::get(
    const NodeId& node, int layer, const std::string& config_hash) const {
  {
    std::shared_lock lock(mu_);
    const auto it = shards_.find(config_hash);
    if (it != shards_.end()) {
      const auto e = it->second.find(entry_key(node, layer));
      if (e == it->second.end()) return std::nullopt;
      return e->second;
    }
  }
  std::unique_lock lock(mu_);
  const auto& shard = shard_locked(config_hash);
  const auto e = shard.find(entry_key(node, layer));
  if (e == shard.end()) return std::nullopt;
  return e->second;
}

void RepresentationCache::put(const NodeId& node, int layer,
                              const std::string& config_hash, const Entry& entry) {
  std::unique_lock lock(mu_);
  auto& shard = shard_locked(config_hash);
  const auto [pos, inserted] = shard.emplace(entry_key(node, layer), entry);
  if (!inserted) {
    if (pos->second.text != entry.text) {
      throw CacheIntegrityError("cache key (" + node.value + ", " + std::to_string(layer) +
                                ", " + config_hash.substr(0, 12) +
                                ") already holds a different text");
    }
    return;
  }
  if (dir_.empty()) return;
  std::ofstream out(shard_path(config_hash), std::ios::binary | std::ios::app);
  out << json{{"node", node.value},
              {"layer", layer},
              {"text", entry.text},
              {"prompt_tokens", entry.prompt_tokens},
              {"completion_tokens", entry.completion_tokens}}
             .dump()
      << '\n';
  out.flush();
  if (!out) throw CacheIntegrityError("failed to append to " + shard_path(config_hash).string());
}

std::size_t RepresentationCache::size(const std::string& config_hash) const {
  std::unique_lock lock(mu_);
  return shard_locked(config_hash).size();
}

// --- planning ----------------------------------------------------------------

std::size_t ReceptiveFieldPlan::size() const {
  std::size_t n = 0;
  for (int l = 1; l <= layers; ++l) n += required[l].size();
  return n;
}

std::size_t ReceptiveFieldPlan::call_count() const {
  std::size_t n = 0;
  for (int l = 1; l <= layers; ++l) {
    for (Index v : required[l]) {
      const auto it = neighbor_lists.find(v);
      if (it == neighbor_lists.end() || !it->second.empty()) ++n;
    }
  }
  return n;
}

ReceptiveFieldPlan plan_receptive_field(const TextGraph& g, std::span<const NodeId> targets,
                                        const EncoderConfig& cfg,
                                        const NeighborOverrides* overrides) {
  cfg.validate();
  std::set<Index> current;
  for (const auto& t : targets) current.insert(g.index_of(t));

  ReceptiveFieldPlan plan;
  if (cfg.variant == Variant::direct) {
    plan.layers = 0;
    plan.required.emplace_back(current.begin(), current.end());
    return plan;
  }
  if (cfg.variant == Variant::all_in_one) {
    // One refinement per target; neighbors come from the two-hop sampler.
    plan.layers = 1;
    plan.required.resize(2);
    plan.required[1].assign(current.begin(), current.end());
    plan.required[0] = plan.required[1];
    return plan;
  }

  plan.layers = cfg.layers;
  plan.required.resize(static_cast<std::size_t>(cfg.layers) + 1);
  for (int l = cfg.layers; l >= 1; --l) {
    plan.required[l].assign(current.begin(), current.end());
    std::set<Index> below = current;
    for (Index v : plan.required[l]) {
      auto it = plan.neighbor_lists.find(v);
      if (it == plan.neighbor_lists.end()) {
        std::vector<Index> list;
        if (overrides && overrides->contains(v)) {
          list = overrides->at(v);
        } else {
          list = sample_neighbors(g, v, cfg.neighbor_k, cfg.seed);
        }
        it = plan.neighbor_lists.emplace(v, std::move(list)).first;
      }
      below.insert(it->second.begin(), it->second.end());
    }
    current = std::move(below);
  }
  plan.required[0].assign(current.begin(), current.end());
  return plan;
}

// --- encoder -----------------------------------------------------------------

Encoder::Encoder(Gateway& gateway, RepresentationCache& cache, const TemplatePack& pack,
                 EncodeOptions opts)
    : gateway_(gateway), cache_(cache), pack_(pack), opts_(opts) {}

std::string Encoder::cache_hash(const TextGraph& g, const EncoderConfig& cfg,
                                std::string_view salt) const {
  std::string key = config_hash(cfg, pack_) + "|" + g.fingerprint() + "|" +
                    gateway_.capabilities().fingerprint +
                    "|" + gateway_.default_model() + "|max_tokens=" +
                    std::to_string(opts_.max_output_tokens);
  if (!salt.empty()) {
    key += "|";
    key += salt;
  }
  return sha256_hex(key);
}

std::map<NodeId, LayeredRepresentation> Encoder::encode(const TextGraph& g,
                                                        std::span<const NodeId> targets,
                                                        const EncoderConfig& cfg) {
  if (cfg.variant == Variant::all_in_one) return run_all_in_one(g, targets, cfg);
  return run(g, targets, cfg, nullptr, {});
}

std::map<NodeId, LayeredRepresentation> Encoder::encode_corrupted(
    const TextGraph& g, std::span<const NodeId> targets, const EncoderConfig& cfg,
    std::size_t true_k, std::size_t noise_k) {
  if (true_k + noise_k > cfg.neighbor_k) {
    throw PromptError("corrupted neighborhood of " + std::to_string(true_k + noise_k) +
                      " exceeds neighbor_k " + std::to_string(cfg.neighbor_k));
  }
  if (cfg.variant == Variant::all_in_one || cfg.variant == Variant::direct) {
    throw PromptError("neighborhood corruption applies to message-passing variants only");
  }
  NeighborOverrides overrides;
  for (const auto& t : targets) {
    const Index v = g.index_of(t);
    overrides[v] = corrupt_neighborhood(g, v, true_k, noise_k, cfg.seed);
  }
  const bool degenerate = noise_k == 0 && true_k == cfg.neighbor_k;
  const std::string salt =
      degenerate ? std::string()
                 : "corrupt:true_k=" + std::to_string(true_k) + ";noise_k=" +
                       std::to_string(noise_k);
  return run(g, targets, cfg, &overrides, salt);
}

namespace {

std::vector<EncodeKey> missing_keys(const TextGraph& g, const ReceptiveFieldPlan& plan,
                                    const RepresentationCache& cache,
                                    const std::string& hash) {
  std::vector<EncodeKey> out;
  for (int l = 1; l <= plan.layers; ++l) {
    for (Index v : plan.required[l]) {
      if (!cache.get(g.id(v), l, hash)) out.push_back({g.id(v), l});
    }
  }
  return out;
}

}  // namespace

std::map<NodeId, LayeredRepresentation> Encoder::run(const TextGraph& g,
                                                     std::span<const NodeId> targets,
                                                     const EncoderConfig& cfg,
                                                     const NeighborOverrides* overrides,
                                                     std::string_view salt) {
  const auto plan = plan_receptive_field(g, targets, cfg, overrides);
  const auto hash = cache_hash(g, cfg, salt);
  stats_ = {};
  stats_.plan_size = plan.size();
  stats_.planned_calls = plan.call_count();
  const auto attempts_before = gateway_.attempts();

  const PromptForge forge(pack_, gateway_.capabilities().node_markers);
  // texts[l][v] for every v in required[l].
  std::vector<std::unordered_map<Index, std::string>> texts(
      static_cast<std::size_t>(plan.layers) + 1);
  for (Index v : plan.required[0]) texts[0].emplace(v, g.text(v));

  std::atomic<std::size_t> hits{0}, copied{0};
  std::mutex usage_mu;
  auto attribute = [&](std::string tag, const RepresentationCache::Entry& e) {
    std::lock_guard lock(usage_mu);
    stats_.usage.push_back({.request_tag = std::move(tag),
                            .model_id = gateway_.default_model(),
                            .prompt_tokens = e.prompt_tokens,
                            .completion_tokens = e.completion_tokens});
  };
  for (int l = 1; l <= plan.layers; ++l) {
    const auto& nodes = plan.required[l];
    const auto& prev = texts[l - 1];
    std::vector<std::optional<std::string>> out(nodes.size());

    try {
      detail::parallel_for(nodes.size(), opts_.concurrency, [&](std::size_t i) {
        const Index v = nodes[i];
        const NodeId& id = g.id(v);
        const auto tag = "encode.layer" + std::to_string(l);
        const auto& nbrs = plan.neighbor_lists.at(v);
        if (auto hit = cache_.get(id, l, hash)) {
          ++hits;
          if (!nbrs.empty()) attribute(tag, *hit);
          out[i] = std::move(hit->text);
          return;
        }
        if (nbrs.empty()) {
          ++copied;
          out[i] = prev.at(v);
          cache_.put(id, l, hash, {*out[i], 0, 0});
          return;
        }
        const NodeText target{id, g.text(v), prev.at(v)};
        std::vector<NodeText> neighbor_texts;
        neighbor_texts.reserve(nbrs.size());
        for (Index u : nbrs) neighbor_texts.push_back({g.id(u), g.text(u), prev.at(u)});
        const auto bundle = cfg.variant == Variant::promptgfm
                                ? forge.promptgfm_prompt(target, neighbor_texts, cfg, l)
                                : forge.message_prompt(target, neighbor_texts, cfg, l);
        CompletionRequest req;
        req.instruction_text = bundle.instruction_text;
        req.content_text = bundle.content_text;
        req.max_output_tokens = opts_.max_output_tokens;
        req.request_tag = tag;
        const auto resp = gateway_.complete(req);
        const RepresentationCache::Entry entry{resp.text, resp.prompt_tokens,
                                               resp.completion_tokens};
        cache_.put(id, l, hash, entry);
        attribute(tag, entry);
        out[i] = resp.text;
      });
    } catch (const GatewayError& e) {
      stats_.gateway_calls = gateway_.attempts() - attempts_before;
      throw EncodeAborted(std::string("encoding stopped at layer ") + std::to_string(l) +
                              ": " + e.what(),
                          e.code(), missing_keys(g, plan, cache_, hash));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) texts[l].emplace(nodes[i], std::move(*out[i]));
  }
  stats_.gateway_calls = gateway_.attempts() - attempts_before;
  stats_.cache_hits = hits;
  stats_.copied_forward = copied;

  std::map<NodeId, LayeredRepresentation> result;
  for (const auto& t : targets) {
    const Index v = g.index_of(t);
    LayeredRepresentation rep{t, {}, hash};
    rep.texts[0] = g.text(v);
    for (int l = 1; l <= plan.layers; ++l) rep.texts[l] = texts[l].at(v);
    result.emplace(t, std::move(rep));
  }
  return result;
}

std::map<NodeId, LayeredRepresentation> Encoder::run_all_in_one(
    const TextGraph& g, std::span<const NodeId> targets, const EncoderConfig& cfg) {
  const auto plan = plan_receptive_field(g, targets, cfg);
  const auto hash = cache_hash(g, cfg);
  stats_ = {};
  stats_.plan_size = plan.size();
  stats_.planned_calls = plan.call_count();
  const auto attempts_before = gateway_.attempts();
  const PromptForge forge(pack_, gateway_.capabilities().node_markers);

  const auto& nodes = plan.required[1];
  std::vector<std::string> out(nodes.size());
  std::atomic<std::size_t> hits{0};
  std::mutex usage_mu;
  auto attribute = [&](const RepresentationCache::Entry& e) {
    std::lock_guard lock(usage_mu);
    stats_.usage.push_back({.request_tag = "encode.all_in_one",
                            .model_id = gateway_.default_model(),
                            .prompt_tokens = e.prompt_tokens,
                            .completion_tokens = e.completion_tokens});
  };
  try {
    detail::parallel_for(nodes.size(), opts_.concurrency, [&](std::size_t i) {
      const Index v = nodes[i];
      const NodeId& id = g.id(v);
      if (auto hit = cache_.get(id, 1, hash)) {
        ++hits;
        attribute(*hit);
        out[i] = std::move(hit->text);
        return;
      }
      const auto sample = sample_two_hop(g, v, cfg.one_hop_k, cfg.two_hop_k, cfg.seed);
      auto as_texts = [&](const std::vector<Index>& list) {
        std::vector<NodeText> t;
        for (Index u : list) t.push_back({g.id(u), g.text(u), g.text(u)});
        return t;
      };
      const auto one = as_texts(sample.one_hop);
      const auto two = as_texts(sample.two_hop);
      const auto bundle = forge.all_in_one_prompt({id, g.text(v), g.text(v)}, one, two, cfg);
      CompletionRequest req;
      req.instruction_text = bundle.instruction_text;
      req.content_text = bundle.content_text;
      req.max_output_tokens = opts_.max_output_tokens;
      req.request_tag = "encode.all_in_one";
      const auto resp = gateway_.complete(req);
      const RepresentationCache::Entry entry{resp.text, resp.prompt_tokens,
                                             resp.completion_tokens};
      cache_.put(id, 1, hash, entry);
      attribute(entry);
      out[i] = resp.text;
    });
  } catch (const GatewayError& e) {
    stats_.gateway_calls = gateway_.attempts() - attempts_before;
    throw EncodeAborted(std::string("All-in-One encoding stopped: ") + e.what(), e.code(),
                        missing_keys(g, plan, cache_, hash));
  }
  stats_.gateway_calls = gateway_.attempts() - attempts_before;
  stats_.cache_hits = hits;

  std::unordered_map<Index, std::string> by_node;
  for (std::size_t i = 0; i < nodes.size(); ++i) by_node.emplace(nodes[i], std::move(out[i]));
  std::map<NodeId, LayeredRepresentation> result;
  for (const auto& t : targets) {
    const Index v = g.index_of(t);
    LayeredRepresentation rep{t, {{0, g.text(v)}, {1, by_node.at(v)}}, hash};
    result.emplace(t, std::move(rep));
  }
  return result;
}

TextGraph Encoder::denoise_attributes(const TextGraph& g,
                                      std::optional<std::span<const NodeId>> only) {
  std::vector<Index> nodes;
  if (only) {
    std::set<Index> chosen;
    for (const auto& id : *only) chosen.insert(g.index_of(id));
    nodes.assign(chosen.begin(), chosen.end());
  } else {
    nodes.resize(g.node_count());
    for (Index v = 0; v < g.node_count(); ++v) nodes[v] = v;
  }
  const auto hash =
      sha256_hex("denoise|" + pack_.version() + "|" + gateway_.capabilities().fingerprint +
                 "|" + gateway_.default_model() + "|max_tokens=" +
                 std::to_string(opts_.max_output_tokens));
  const PromptForge forge(pack_, false);
  stats_ = {};
  const auto attempts_before = gateway_.attempts();

  std::vector<std::string> texts(g.node_count());
  for (Index v = 0; v < g.node_count(); ++v) texts[v] = g.text(v);
  std::atomic<std::size_t> hits{0};
  std::mutex usage_mu;
  auto attribute = [&](const RepresentationCache::Entry& e) {
    std::lock_guard lock(usage_mu);
    stats_.usage.push_back({.request_tag = "denoise",
                            .model_id = gateway_.default_model(),
                            .prompt_tokens = e.prompt_tokens,
                            .completion_tokens = e.completion_tokens});
  };
  detail::parallel_for(nodes.size(), opts_.concurrency, [&](std::size_t i) {
    const Index v = nodes[i];
    // The cache key covers the input text, so corrupted and clean inputs of
    // the same node do not collide.
    const NodeId key(g.id(v).value + "\x1f" + short_digest(g.text(v)));
    if (auto hit = cache_.get(key, 0, hash)) {
      ++hits;
      attribute(*hit);
      texts[v] = std::move(hit->text);
      return;
    }
    if (g.text(v).empty()) return;  // nothing left to denoise
    const auto bundle = forge.denoise_prompt(g.text(v));
    CompletionRequest req;
    req.instruction_text = bundle.instruction_text;
    req.content_text = bundle.content_text;
    req.max_output_tokens = opts_.max_output_tokens;
    req.request_tag = "denoise";
    const auto resp = gateway_.complete(req);
    const RepresentationCache::Entry entry{resp.text, resp.prompt_tokens,
                                           resp.completion_tokens};
    cache_.put(key, 0, hash, entry);
    attribute(entry);
    texts[v] = resp.text;
  });
  stats_.gateway_calls = gateway_.attempts() - attempts_before;
  stats_.cache_hits = hits;
  return g.with_texts(std::move(texts), /*allow_empty_text=*/true);
}

}  // namespace gln
