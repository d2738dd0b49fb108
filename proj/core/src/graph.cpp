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

#include "gln/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gln/hash.hpp"
#include "gln/rng.hpp"

namespace gln {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::citation:
      return "citation";
    case DomainTag::co_purchase:
      return "co-purchase";
    case DomainTag::hyperlink:
      return "hyperlink";
  }
  return "citation";
}

DomainTag parse_domain_tag(std::string_view text) {
  if (text == "citation") return DomainTag::citation;
  if (text == "co-purchase" || text == "co_purchase")
    return DomainTag::co_purchase;
  if (text == "hyperlink") return DomainTag::hyperlink;
  throw GraphError(GraphErrc::invalid_argument,
                   "unknown domain tag '" + std::string(text) + "'");
}

namespace {

std::uint64_t pair_key(TextGraph::Index a, TextGraph::Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

TextGraph TextGraph::build(
    std::vector<std::pair<std::string, std::string>> nodes,
    const std::vector<std::pair<std::string, std::string>>& edges,
    DomainTag domain, bool allow_empty_text) {
  TextGraph g;
  g.domain_ = domain;
  g.ids_.reserve(nodes.size());
  g.texts_.reserve(nodes.size());
  g.index_.reserve(nodes.size());
  for (auto& [id, text] : nodes) {
    if (id.empty()) {
      throw GraphError(GraphErrc::malformed_record, "empty node id");
    }
    if (text.empty() && !allow_empty_text) {
      throw GraphError(GraphErrc::empty_text,
                       "node '" + id + "' has empty attribute text");
    }
    NodeId nid(std::move(id));
    const auto idx = static_cast<Index>(g.ids_.size());
    if (!g.index_.emplace(nid, idx).second) {
      throw GraphError(GraphErrc::duplicate_node,
                       "duplicate node id '" + nid.value + "'");
    }
    g.ids_.push_back(std::move(nid));
    g.texts_.push_back(std::move(text));
  }

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size());
  g.edges_.reserve(edges.size());
  for (const auto& [src, dst] : edges) {
    const auto a = g.find(NodeId(src));
    const auto b = g.find(NodeId(dst));
    if (!a || !b) {
      throw GraphError(GraphErrc::dangling_endpoint,
                       "dangling endpoint in edge (" + src + ", " + dst + ")");
    }
    if (*a == *b) {
      ++g.stats_.self_loops;
      continue;
    }
    if (!seen.insert(pair_key(*a, *b)).second) {
      ++g.stats_.duplicate_edges;
      continue;
    }
    g.edges_.push_back({*a, *b});
  }
  g.rebuild_adjacency();
  g.refresh_fingerprint();
  return g;
}

void TextGraph::refresh_fingerprint() {
  std::string buf;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    buf += ids_[i].value;
    buf += '\x1f';
    buf += texts_[i];
    buf += '\x1e';
  }
  for (const auto& e : edges_) {
    buf += std::to_string(e.src) + "-" + std::to_string(e.dst) + ";";
  }
  fingerprint_ = sha256_hex(buf);
}

void TextGraph::rebuild_adjacency() {
  std::vector<std::size_t> deg(ids_.size(), 0);
  for (const auto& e : edges_) {
    ++deg[e.src];
    ++deg[e.dst];
  }
  adjacency_.assign(ids_.size(), {});
  for (std::size_t i = 0; i < ids_.size(); ++i) adjacency_[i].reserve(deg[i]);
  for (const auto& e : edges_) {
    adjacency_[e.src].push_back(e.dst);
    adjacency_[e.dst].push_back(e.src);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

std::optional<TextGraph::Index> TextGraph::find(const NodeId& v) const {
  const auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TextGraph::Index TextGraph::index_of(const NodeId& v) const {
  const auto it = index_.find(v);
  if (it == index_.end()) {
    throw GraphError(GraphErrc::unknown_node, "unknown node '" + v.value + "'");
  }
  return it->second;
}

std::vector<NodeId> TextGraph::neighbors(const NodeId& v) const {
  std::vector<NodeId> out;
  for (Index j : adjacency_[index_of(v)]) out.push_back(ids_[j]);
  return out;
}

bool TextGraph::adjacent(Index a, Index b) const {
  const auto& list = adjacency_.at(a);
  return std::binary_search(list.begin(), list.end(), b);
}

TextGraph TextGraph::with_texts(std::vector<std::string> texts,
                                bool allow_empty_text) const {
  if (texts.size() != ids_.size()) {
    throw GraphError(GraphErrc::invalid_argument,
                     "text count does not match node count");
  }
  if (!allow_empty_text) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (texts[i].empty()) {
        throw GraphError(GraphErrc::empty_text,
                         "node '" + ids_[i].value + "' has empty attribute text");
      }
    }
  }
  TextGraph g = *this;
  g.texts_ = std::move(texts);
  g.refresh_fingerprint();
  return g;
}

TextGraph TextGraph::without_edges(std::span<const Edge> removed) const {
  std::unordered_set<std::uint64_t> drop;
  for (const auto& e : removed) drop.insert(pair_key(e.src, e.dst));
  TextGraph g = *this;
  std::erase_if(g.edges_, [&](const Edge& e) {
    return drop.contains(pair_key(e.src, e.dst));
  });
  g.rebuild_adjacency();
  g.refresh_fingerprint();
  return g;
}

// --- bundle IO -------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_jsonl(const fs::path& file, Fn&& fn) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw GraphError(GraphErrc::missing_file,
                     "cannot open " + file.string());
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw GraphError(GraphErrc::malformed_record,
                       file.filename().string() + ":" + std::to_string(lineno) +
                           ": " + e.what());
    }
    try {
      fn(rec);
    } catch (const json::exception& e) {
      throw GraphError(GraphErrc::malformed_record,
                       file.filename().string() + ":" + std::to_string(lineno) +
                           ": " + e.what());
    }
  }
}

json read_meta(const fs::path& bundle) {
  const auto path = bundle / "meta.json";
  std::ifstream in(path);
  if (!in) throw GraphError(GraphErrc::missing_file, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw GraphError(GraphErrc::malformed_record, "meta.json: " + std::string(e.what()));
  }
}

TextGraph load_with_meta(const fs::path& bundle, const json& meta,
                         DomainTag domain) {
  std::vector<std::pair<std::string, std::string>> nodes;
  for_each_jsonl(bundle / "nodes.jsonl", [&](const json& rec) {
    nodes.emplace_back(rec.at("id").get<std::string>(),
                       rec.at("text").get<std::string>());
  });
  std::vector<std::pair<std::string, std::string>> edges;
  for_each_jsonl(bundle / "edges.jsonl", [&](const json& rec) {
    edges.emplace_back(rec.at("src").get<std::string>(),
                       rec.at("dst").get<std::string>());
  });

  TextGraph g = TextGraph::build(std::move(nodes), edges, domain);

  const auto declared = [&](const char* key) -> std::size_t {
    if (!meta.contains(key) || !meta[key].is_number_unsigned()) {
      throw GraphError(GraphErrc::malformed_record,
                       std::string("meta.json: missing '") + key + "'");
    }
    return meta[key].get<std::size_t>();
  };
  const auto want_nodes = declared("num_nodes");
  const auto want_edges = declared("num_edges");
  if (g.node_count() != want_nodes || g.edge_count() != want_edges) {
    throw GraphError(GraphErrc::count_mismatch,
                     "declared counts " + std::to_string(want_nodes) + "/" +
                         std::to_string(want_edges) + " but loaded " +
                         std::to_string(g.node_count()) + "/" +
                         std::to_string(g.edge_count()));
  }
  return g;
}

}  // namespace

TextGraph load_graph(const fs::path& bundle, DomainTag domain) {
  const json meta = read_meta(bundle);
  if (meta.contains("domain_tag") &&
      parse_domain_tag(meta["domain_tag"].get<std::string>()) != domain) {
    throw GraphError(GraphErrc::invalid_argument,
                     "bundle domain_tag '" + meta["domain_tag"].get<std::string>() +
                         "' does not match requested '" +
                         std::string(to_string(domain)) + "'");
  }
  return load_with_meta(bundle, meta, domain);
}

TextGraph load_graph(const fs::path& bundle) {
  const json meta = read_meta(bundle);
  if (!meta.contains("domain_tag")) {
    throw GraphError(GraphErrc::malformed_record, "meta.json: missing 'domain_tag'");
  }
  return load_with_meta(bundle, meta,
                        parse_domain_tag(meta["domain_tag"].get<std::string>()));
}

void save_graph(const TextGraph& g, const fs::path& bundle) {
  fs::create_directories(bundle);
  {
    std::ofstream out(bundle / "meta.json", std::ios::binary);
    json meta = {{"num_nodes", g.node_count()},
                 {"num_edges", g.edge_count()},
                 {"domain_tag", std::string(to_string(g.domain()))}};
    out << meta.dump(2) << '\n';
  }
  {
    std::ofstream out(bundle / "nodes.jsonl", std::ios::binary);
    for (TextGraph::Index i = 0; i < g.node_count(); ++i) {
      out << json{{"id", g.id(i).value}, {"text", g.text(i)}}.dump() << '\n';
    }
  }
  {
    std::ofstream out(bundle / "edges.jsonl", std::ios::binary);
    for (const auto& e : g.edges()) {
      out << json{{"src", g.id(e.src).value}, {"dst", g.id(e.dst).value}}.dump()
          << '\n';
    }
  }
}

std::optional<std::map<NodeId, std::string>> load_labels(const fs::path& bundle) {
  const auto path = bundle / "labels.jsonl";
  if (!fs::exists(path)) return std::nullopt;
  std::map<NodeId, std::string> labels;
  for_each_jsonl(path, [&](const json& rec) {
    labels[NodeId(rec.at("id").get<std::string>())] =
        rec.at("label").get<std::string>();
  });
  return labels;
}

void save_labels(const std::map<NodeId, std::string>& labels,
                 const fs::path& bundle) {
  fs::create_directories(bundle);
  std::ofstream out(bundle / "labels.jsonl", std::ios::binary);
  for (const auto& [id, label] : labels) {
    out << json{{"id", id.value}, {"label", label}}.dump() << '\n';
  }
}

// --- attribute corruption --------------------------------------------------

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

CorruptionReport corrupt_attributes(const TextGraph& g, double removal_ratio,
                                    std::uint64_t seed) {
  if (!(removal_ratio >= 0.0 && removal_ratio <= 1.0)) {
    throw GraphError(GraphErrc::invalid_argument,
                     "removal ratio must lie in [0, 1]");
  }
  std::vector<std::string> texts;
  texts.reserve(g.node_count());
  CorruptionReport report{g, 0, {}};
  for (TextGraph::Index i = 0; i < g.node_count(); ++i) {
    const std::string& text = g.text(i);
    const auto words = split_words(text);
    // The epsilon keeps decimal ratios such as 0.29 * 100 from flooring low.
    const auto remove = static_cast<std::size_t>(
        std::floor(removal_ratio * static_cast<double>(words.size()) + 1e-9));
    if (remove == 0) {
      texts.push_back(text);
      continue;
    }
    std::vector<std::size_t> order(words.size());
    for (std::size_t w = 0; w < order.size(); ++w) order[w] = w;
    Rng rng(seed, "corrupt_attributes", g.id(i).value);
    rng.select_prefix(std::span(order), remove);
    std::vector<bool> dropped(words.size(), false);
    for (std::size_t r = 0; r < remove; ++r) dropped[order[r]] = true;

    std::string out;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (dropped[w]) continue;
      if (!out.empty()) out.push_back(' ');
      out.append(words[w]);
    }
    report.words_removed += remove;
    if (out.empty()) report.emptied.push_back(g.id(i));
    texts.push_back(std::move(out));
  }
  report.graph = g.with_texts(std::move(texts), /*allow_empty_text=*/true);
  return report;
}

}  // namespace gln
