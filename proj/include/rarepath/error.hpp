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

#ifndef RAREPATH_ERROR_HPP
#define RAREPATH_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace rarepath {

/// Machine-readable failure categories shared by every module.
enum class ErrorCode {
  kInvalidArgument,
  kInvalidIntensity,
  kExplosionSuspected,
  kBoundViolation,
  kLevelNeverReached,
  kInvalidWeight,
  kNonterminationSuspected,
  kInfeasibleConditioning,
  kReducibleChain,
  kGuardExceeded,
  kEstimateUndefined,
  kHorizonExpired,
  kConfig,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) {
    fail(ErrorCode::kInvalidArgument, what);
  }
}

}  // namespace rarepath

#endif  // RAREPATH_ERROR_HPP
