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

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "rarepath/error.hpp"
#include "rarepath/kernels.hpp"
#include "rarepath/parallel.hpp"

namespace rarepath::cli {
namespace {

std::filesystem::path output_dir() {
  if (const char* env = std::getenv("RAREPATH_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ".";
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) {
    parts.push_back(part);
  }
  return parts;
}

}  // namespace

void add_common_options(CLI::App& cmd, CommonOptions& opts, const CommandDefaults& defaults) {
  opts.replicas = defaults.replicas;
  opts.step = defaults.step;
  opts.workers = default_workers();
  cmd.add_option("--config", opts.config, "Read options from an INI/TOML file; flags override it");
  cmd.add_option("--seed", opts.seed, "Master seed (required; results are a pure function of it)")
      ->required();
  cmd.add_option("--replicas", opts.replicas, "Number of independent replicas")->capture_default_str();
  cmd.add_option("--step", opts.step, "Time step of the simulation grid")->capture_default_str();
  cmd.add_option("--output", opts.output,
                 "CSV report path (default: $RAREPATH_OUTPUT_DIR/<command>.csv)");
  cmd.add_option("--workers", opts.workers, "Worker threads; never changes the numbers")
      ->capture_default_str();
  cmd.add_option("--simd", opts.simd, "Kernel backend: auto, scalar or avx2")->capture_default_str();
}

std::vector<std::string> expand_config(const CLI::App& root, const std::vector<std::string>& args) {
  const CLI::App* sub = nullptr;
  std::size_t sub_at = 0;
  for (; sub_at < args.size(); ++sub_at) {
    if (!args[sub_at].empty() && args[sub_at][0] != '-') {
      try {
        sub = root.get_subcommand_ptr(args[sub_at]).get();
      } catch (const CLI::OptionNotFound&) {
        return args;  // the parser reports it
      }
      break;
    }
  }
  if (sub == nullptr) {
    return args;
  }
  std::string file;
  std::vector<std::string> given;
  for (std::size_t i = sub_at + 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      continue;
    }
    const auto eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.push_back(name);
    if (name == "config") {
      if (eq != std::string::npos) {
        file = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        file = args[i + 1];
      }
    }
  }
  if (file.empty()) {
    return args;
  }
  if (!std::filesystem::is_regular_file(file)) {
    fail(ErrorCode::kConfig, "config file not found: " + file);
  }
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(file);
  } catch (const CLI::ParseError& e) {
    fail(ErrorCode::kConfig, "config file " + file + ": " + e.what());
  }
  std::vector<std::string> extra;
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") {
      continue;  // section markers
    }
    const bool scoped = item.parents.empty() || (item.parents.size() == 1 && item.parents[0] == sub->get_name());
    if (!scoped) {
      fail(ErrorCode::kConfig, "config file " + file + ": key '" + item.fullname() +
                                   "' does not belong to " + sub->get_name());
    }
    if (item.name == "config" || sub->get_option_no_throw("--" + item.name) == nullptr) {
      fail(ErrorCode::kConfig,
           "config file " + file + ": unknown key '" + item.name + "' for " + sub->get_name());
    }
    if (std::find(given.begin(), given.end(), item.name) != given.end()) {
      continue;
    }
    extra.push_back("--" + item.name);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_at + 1));
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_at + 1), args.end());
  return out;
}

void finalize_common(const CommonOptions& opts) {
  if (!opts.seed) {
    fail(ErrorCode::kConfig, "--seed is required");
  }
  if (opts.replicas < 1) {
    fail(ErrorCode::kConfig, "--replicas must be at least 1");
  }
  if (!(opts.step > 0.0) || !std::isfinite(opts.step)) {
    fail(ErrorCode::kConfig, "--step must be positive");
  }
  if (opts.workers < 1) {
    fail(ErrorCode::kConfig, "--workers must be at least 1");
  }
  if (opts.simd != "auto") {
    const auto backend = kernels::parse_backend(opts.simd);
    if (!backend) {
      fail(ErrorCode::kConfig, "--simd must be auto, scalar or avx2");
    }
    if (!kernels::available(*backend)) {
      fail(ErrorCode::kConfig, "--simd " + opts.simd + " is not available on this machine");
    }
    kernels::set_backend(*backend);
  }
}

std::filesystem::path output_path(const CommonOptions& opts, const std::string& command) {
  if (opts.output.empty()) {
    return output_dir() / (command + ".csv");
  }
  const std::filesystem::path given(opts.output);
  if (given.is_relative() && std::getenv("RAREPATH_OUTPUT_DIR") != nullptr) {
    return output_dir() / given;
  }
  return given;
}

std::filesystem::path sibling_path(const std::filesystem::path& main, const std::string& suffix) {
  std::filesystem::path out = main;
  out.replace_filename(main.stem().string() + suffix + main.extension().string());
  return out;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const std::string& part : split(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !std::isfinite(v)) {
      fail(ErrorCode::kConfig, what + ": '" + part + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    fail(ErrorCode::kConfig, what + ": empty list");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const std::string& part : split(text)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) {
      fail(ErrorCode::kConfig, what + ": '" + part + "' is not an integer");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    fail(ErrorCode::kConfig, what + ": empty list");
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::kConfig, "cannot open " + path.string() + " for writing");
  }
  return out;
}

}  // namespace rarepath::cli
