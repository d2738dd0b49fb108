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

#include "gln_cli/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace gln::cli {

using json = nlohmann::json;

namespace {

class Parser {
 public:
  Parser(std::string_view line, std::string origin, int lineno)
      : s_(line), origin_(std::move(origin)), lineno_(lineno) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(lineno_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<std::string> key() {
    std::vector<std::string> parts;
    do {
      skip_ws();
      if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
        parts.push_back(string_value());
        continue;
      }
      const auto start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                  s_[pos_] == '_' || s_[pos_] == '-')) {
        ++pos_;
      }
      if (start == pos_) fail("expected a key");
      parts.emplace_back(s_.substr(start, pos_ - start));
    } while (eat('.'));
    return parts;
  }

  std::string string_value() {
    const char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      char c = s_[pos_++];
      if (quote == '"' && c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        switch (s_[pos_++]) {
          case 'n':
            c = '\n';
            break;
          case 't':
            c = '\t';
            break;
          case '"':
            c = '"';
            break;
          case '\\':
            c = '\\';
            break;
          default:
            fail("unsupported escape");
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  json value(bool bare_words) {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      while (!eat(']')) {
        arr.push_back(value(bare_words));
        if (!eat(',')) {
          if (!eat(']')) fail("expected ',' or ']' in array");
          break;
        }
      }
      return arr;
    }
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#') ++pos_;
    std::string word(s_.substr(start, pos_ - start));
    while (!word.empty() && std::isspace(static_cast<unsigned char>(word.back()))) word.pop_back();
    if (word == "true") return true;
    if (word == "false") return false;
    std::string digits;
    for (char d : word) {
      if (d != '_') digits.push_back(d);
    }
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
    if (ec == std::errc() && p == digits.data() + digits.size() && !digits.empty()) return i;
    char* end = nullptr;
    const double d = std::strtod(digits.c_str(), &end);
    if (!digits.empty() && end == digits.c_str() + digits.size()) return d;
    if (bare_words && !word.empty()) return word;
    fail("cannot parse value '" + word + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::string origin_;
  int lineno_;
};

json& descend(json& root, const std::vector<std::string>& path, std::size_t count,
              Parser& p) {
  json* node = &root;
  for (std::size_t i = 0; i < count; ++i) {
    json& next = (*node)[path[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) p.fail("'" + path[i] + "' is not a table");
    node = &next;
  }
  return *node;
}

void assign(json& root, const std::vector<std::string>& section,
            const std::vector<std::string>& key, json v, Parser& p, bool replace) {
  std::vector<std::string> full = section;
  full.insert(full.end(), key.begin(), key.end());
  json& table = descend(root, full, full.size() - 1, p);
  if (!replace && table.contains(full.back())) p.fail("duplicate key '" + full.back() + "'");
  table[full.back()] = std::move(v);
}

}  // namespace

json parse_toml(std::string_view text, std::string_view origin) {
  json root = json::object();
  std::vector<std::string> section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Parser p(line, std::string(origin), lineno);
    if (p.at_end_or_comment()) continue;
    if (p.eat('[')) {
      section = p.key();
      if (!p.eat(']')) p.fail("expected ']'");
      descend(root, section, section.size(), p);
    } else {
      const auto key = p.key();
      if (!p.eat('=')) p.fail("expected '='");
      auto v = p.value(false);
      assign(root, section, key, std::move(v), p, false);
    }
    if (!p.at_end_or_comment()) p.fail("unexpected trailing characters");
  }
  return root;
}

json load_toml(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str(), file.string());
}

void apply_override(json& tree, std::string_view assignment) {
  Parser p(assignment, "--set", 1);
  const auto key = p.key();
  if (key.size() < 2) p.fail("override needs section.key=value");
  if (!p.eat('=')) p.fail("expected '='");
  auto v = p.value(true);
  if (!p.at_end_or_comment()) p.fail("unexpected trailing characters");
  assign(tree, {}, key, std::move(v), p, true);
}

}  // namespace gln::cli
