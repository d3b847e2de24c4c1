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

#ifndef RAREPATH_CLI_HPP
#define RAREPATH_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace rarepath::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Parses `args` (without the program name) and runs one subcommand.
/// Summaries go to `out`; failures print one line to `err`:
///   rarepath: error code=<code> reason=<text>
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rarepath::cli

#endif  // RAREPATH_CLI_HPP
