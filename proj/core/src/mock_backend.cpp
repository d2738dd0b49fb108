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

#include <cctype>
#include <sstream>
#include <unordered_set>

#include "gln/gateway.hpp"
#include "gln/graph.hpp"
#include "gln/hash.hpp"
#include "gln/markers.hpp"

namespace gln {

namespace {

constexpr std::string_view kMarkerOpen = "\xE2\x9F\xA6node:";  // ⟦node:
constexpr std::string_view kMarkerClose = "\xE2\x9F\xA7";      // ⟧
constexpr std::string_view kSrc = "SRC:";
constexpr std::size_t kBodyWords = 40;

bool is_hex16(std::string_view s) {
  if (s.size() != 16) return false;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c)) ||
        std::isupper(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return true;
}

// Digests of every source in `text`, first-occurrence order, deduplicated.
std::vector<std::string> find_sources(std::string_view text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto add = [&](std::string d) {
    if (seen.insert(d).second) out.push_back(std::move(d));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, kMarkerOpen.size(), kMarkerOpen) == 0) {
      const auto start = i + kMarkerOpen.size();
      const auto end = text.find(kMarkerClose, start);
      if (end != std::string_view::npos) {
        add(short_digest(text.substr(start, end - start)));
        i = end + kMarkerClose.size();
        continue;
      }
    }
    if (text.compare(i, kSrc.size(), kSrc) == 0 &&
        (i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1])))) {
      const auto digest = text.substr(i + kSrc.size(), 16);
      const auto after = i + kSrc.size() + 16;
      if (is_hex16(digest) &&
          (after == text.size() ||
           std::isspace(static_cast<unsigned char>(text[after])))) {
        add(std::string(digest));
        i = after;
        continue;
      }
    }
    ++i;
  }
  return out;
}

// Text up to the first [.!?] followed by whitespace, or the first blank line.
std::string_view first_sentence(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool at_end = i + 1 == text.size();
    if ((c == '.' || c == '!' || c == '?') &&
        (at_end || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      return text.substr(0, i + 1);
    }
    if (c == '\n' && !at_end && text[i + 1] == '\n') return text.substr(0, i);
  }
  return text;
}

bool is_source_word(std::string_view w) {
  if (w.find(kMarkerOpen) != std::string_view::npos) return true;
  return w.starts_with(kSrc) && is_hex16(w.substr(kSrc.size()));
}

std::vector<std::string> valid_choices(std::string_view content) {
  constexpr std::string_view kChoices = "Valid choices:";
  std::vector<std::string> out;
  const auto pos = content.find(kChoices);
  if (pos == std::string_view::npos) return out;
  auto line_end = content.find('\n', pos);
  if (line_end == std::string_view::npos) line_end = content.size();
  std::string_view rest =
      content.substr(pos + kChoices.size(), line_end - pos - kChoices.size());
  while (!rest.empty()) {
    const auto bar = rest.find('|');
    std::string_view item = rest.substr(0, bar);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front())))
      item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back())))
      item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (bar == std::string_view::npos) break;
    rest.remove_prefix(bar + 1);
  }
  return out;
}

std::int64_t count_words(std::string_view text) {
  return static_cast<std::int64_t>(split_words(text).size());
}

}  // namespace

std::string MockBackend::marker(std::string_view node_id) {
  return node_marker(node_id);
}

std::vector<std::string> MockBackend::source_digests(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.starts_with(kSrc) && is_hex16(std::string_view(line).substr(kSrc.size()))) {
      out.push_back(line.substr(kSrc.size()));
    }
  }
  return out;
}

CompletionResponse MockBackend::complete(const CompletionRequest& req) {
  const auto prompt_tokens =
      count_words(req.instruction_text) + count_words(req.content_text);
  if (opts_.context_window > 0 && prompt_tokens > opts_.context_window) {
    throw GatewayError(GatewayErrc::context_overflow,
                       "context overflow: " + std::to_string(prompt_tokens) +
                           " prompt tokens exceed window of " +
                           std::to_string(opts_.context_window),
                       req.request_tag);
  }

  std::string out(kHeader);
  out.push_back('\n');
  for (const auto& d : find_sources(req.content_text)) {
    out.append(kSrc);
    out.append(d);
    out.push_back('\n');
  }
  std::string body;
  std::size_t n = 0;
  for (auto w : split_words(first_sentence(req.content_text))) {
    if (is_source_word(w)) continue;
    if (n++ == kBodyWords) break;
    if (!body.empty()) body.push_back(' ');
    body.append(w);
  }
  out.append(body.empty() ? "(empty)" : body);

  if (opts_.answer_mode == AnswerMode::hash) {
    const auto choices = valid_choices(req.content_text);
    if (!choices.empty()) {
      const auto h = fnv1a64(sha256_hex(req.instruction_text + "\n" + req.content_text));
      out.append("\nANSWER: ");
      out.append(choices[h % choices.size()]);
    }
  }

  CompletionResponse resp;
  resp.text = std::move(out);
  resp.prompt_tokens = prompt_tokens;
  resp.completion_tokens = count_words(resp.text);
  resp.model_id = req.model_id.empty() ? opts_.model_id : req.model_id;
  return resp;
}

BackendCapabilities MockBackend::capabilities() const {
  return {true, "mock:" + opts_.model_id};
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& req) {
  ++calls_;
  CompletionResponse resp;
  resp.text = script_(req);
  resp.prompt_tokens = count_words(req.instruction_text) + count_words(req.content_text);
  resp.completion_tokens = count_words(resp.text);
  resp.model_id = req.model_id.empty() ? fingerprint_ : req.model_id;
  return resp;
}

CompletionResponse FaultInjectingBackend::complete(const CompletionRequest& req) {
  auto left = remaining_.load();
  while (left > 0) {
    if (remaining_.compare_exchange_weak(left, left - 1)) {
      throw GatewayError(code_, "injected fault", req.request_tag);
    }
  }
  return inner_->complete(req);
}

}  // namespace gln
