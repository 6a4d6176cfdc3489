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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "gramscan/tensor.hpp"

namespace gramscan {

/// In-memory form of a feature dump: one tensor per sample, the model's
/// predicted label per sample and, optionally, the poison ground truth.
struct Dataset {
  std::uint32_t n_channels = 0;
  std::uint32_t spatial = 0;
  std::vector<FeatureTensor> tensors;
  std::vector<std::uint32_t> labels;
  std::optional<std::vector<std::uint8_t>> poison;

  std::size_t size() const noexcept { return tensors.size(); }
  /// Throws kValidation when per-sample arrays disagree in length or shape.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace gramscan
