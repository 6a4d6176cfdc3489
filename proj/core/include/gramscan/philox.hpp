/* Copyright 2026 The gramscan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace gramscan {

/// Philox4x32-10 block function (Salmon et al., Random123). Pure function of
/// a 128-bit counter and a 64-bit key.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// What a substream is used for. Occupies the low byte of counter word 3 so
/// that independent consumers never share counter space.
enum class StreamPurpose : std::uint8_t {
  kClassParams = 0,
  kTrigger = 1,
  kSamples = 2,
  kBootstrap = 3,
  kTest = 4,
};

/// Sequential reader over one Philox substream.
///
/// Counter layout: word0/word1 = 64-bit block index, word2 = substream id
/// (usually a class label), word3 = purpose | (stream << 8). The key is the
/// 64-bit seed split into low/high halves.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint32_t substream,
               std::uint32_t stream = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; values come in pairs.
  double normal() noexcept;
  /// Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  void refill() noexcept;

  PhiloxKey key_;
  std::uint32_t substream_;
  std::uint32_t word3_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  unsigned used_ = 4;
  std::optional<double> spare_normal_;
};

}  // namespace gramscan
