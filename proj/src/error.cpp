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

#include "rarepath/error.hpp"

namespace rarepath {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kInvalidIntensity:
      return "invalid-intensity";
    case ErrorCode::kExplosionSuspected:
      return "explosion-suspected";
    case ErrorCode::kBoundViolation:
      return "bound-violation";
    case ErrorCode::kLevelNeverReached:
      return "level-never-reached";
    case ErrorCode::kInvalidWeight:
      return "invalid-weight";
    case ErrorCode::kNonterminationSuspected:
      return "nontermination-suspected";
    case ErrorCode::kInfeasibleConditioning:
      return "infeasible-conditioning";
    case ErrorCode::kReducibleChain:
      return "reducible-chain";
    case ErrorCode::kGuardExceeded:
      return "guard-exceeded";
    case ErrorCode::kEstimateUndefined:
      return "estimate-undefined";
    case ErrorCode::kHorizonExpired:
      return "horizon-expired";
    case ErrorCode::kConfig:
      return "config-error";
  }
  return "unknown";
}

}  // namespace rarepath
