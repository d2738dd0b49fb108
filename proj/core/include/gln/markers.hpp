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

#include <string>
#include <string_view>

namespace gln {

// Node identity marker ⟦node:<id>⟧, placed in prompts only for backends that
// report node_markers (the mock), so information flow can be traced.
inline std::string node_marker(std::string_view node_id) {
  std::string m = "\xE2\x9F\xA6node:";
  m.append(node_id);
  m.append("\xE2\x9F\xA7");
  return m;
}

}  // namespace gln
