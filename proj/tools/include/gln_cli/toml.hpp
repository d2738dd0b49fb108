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


#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace gln::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads the TOML subset the run config uses: [section] and [a.b] headers,
// bare or dotted keys, basic and literal strings, integers, floats, booleans
// and single-line arrays. Comments start with '#'. Returns nested objects.
nlohmann::json parse_toml(std::string_view text, std::string_view origin = "<config>");
nlohmann::json load_toml(const std::filesystem::path& file);

// Applies one "section.key=value" override; the value uses TOML syntax, with
// bare words accepted as strings.
void apply_override(nlohmann::json& tree, std::string_view assignment);

}  // namespace gln::cli
