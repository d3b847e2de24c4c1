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

#ifndef RAREPATH_RNG_HPP
#define RAREPATH_RNG_HPP

#include <array>
#include <cstdint>

namespace rarepath {

/// Counter-based random stream (Philox4x32-10) keyed by a master seed.
/**
 * The 64-bit master seed is the Philox key and the stream id occupies the
 * upper half of the 128-bit counter, so distinct stream ids walk disjoint
 * counter ranges and share no state. Every draw is a pure function of
 * (master_seed, stream_id, draw position), which makes replica results
 * independent of how replicas are scheduled across workers.
 *
 * Transcendental transforms (log, sin, cos) go through the platform libm;
 * the raw 32-bit words are bit-identical everywhere.
 */
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  [[nodiscard]] std::uint64_t master_seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_; }

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept;

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  /// Exponential with unit rate.
  double exponential() noexcept;

  /// Fills `out` with i.i.d. standard normals.
  void fill_normal(double* out, std::size_t count) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Philox4x32-10 block function; exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Derives an independent master seed for a named sub-experiment.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) noexcept;

}  // namespace rarepath

#endif  // RAREPATH_RNG_HPP
