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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "gln_cli/run_config.hpp"

namespace gln::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitConfig = 2,
  kExitBudget = 3,
};

struct CommandOptions {
  // encode
  bool dry_run = false;
  std::optional<std::filesystem::path> targets;
  // eval
  bool ablation = false;
};

// Runs one subcommand end to end and maps failures onto exit codes. Status
// lines go to `out`, diagnostics to `err`.
int run_command(std::string_view name, const RunConfig& cfg, const CommandOptions& opts,
                std::ostream& out, std::ostream& err);

// Offline commands that take no RunConfig.
int cmd_validate_bundle(const std::filesystem::path& bundle, std::ostream& out,
                        std::ostream& err);
int cmd_report(const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace gln::cli
