// Copyright 2026 The rarepath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RAREPATH_SRC_CLI_CONFIG_HPP
#define RAREPATH_SRC_CLI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace rarepath::cli {

/// Settings shared by every subcommand.
struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::size_t replicas = 0;
  double step = 0.0;
  std::string output;
  unsigned workers = 1;
  std::string simd = "auto";
  std::string config;
};

struct CommandDefaults {
  std::size_t replicas;
  double step;
};

/// Registers --seed, --replicas, --step, --output, --workers, --simd and
/// --config on a subcommand. Config files use INI/TOML syntax; unknown keys
/// are rejected and flags override file values.
void add_common_options(CLI::App& cmd, CommonOptions& opts, const CommandDefaults& defaults);

/// Splices the file named by --config into `args` (program name excluded)
/// as ordinary flags of the selected subcommand. Keys may sit at top level
/// or under a section named after the subcommand; anything else, or a key
/// that names no option, throws Error(kConfig). Flags already on the
/// command line win.
std::vector<std::string> expand_config(const CLI::App& root, const std::vector<std::string>& args);

/// Checks ranges and applies --simd. Throws Error(kConfig) on bad values.
void finalize_common(const CommonOptions& opts);

/// --output if given (relative paths resolve against RAREPATH_OUTPUT_DIR when
/// set), else <RAREPATH_OUTPUT_DIR or .>/<command>.csv.
std::filesystem::path output_path(const CommonOptions& opts, const std::string& command);

/// Sibling of `main` with `suffix` inserted before the extension.
std::filesystem::path sibling_path(const std::filesystem::path& main, const std::string& suffix);

/// "2,4,8" -> {2, 4, 8}; throws Error(kConfig) on malformed input.
std::vector<double> parse_real_list(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

/// Opens for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace rarepath::cli

#endif  // RAREPATH_SRC_CLI_CONFIG_HPP
