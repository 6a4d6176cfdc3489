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

#include <cstdint>
#include <string>

#include "gramscan/dataset.hpp"
#include "gramscan/tensor.hpp"

namespace gramscan {

enum class Scenario {
  kMeanShift,         // S1: poison columns shifted by a fixed vector
  kEqualMeanDiffCov,  // S2: same mean, rotated and rescaled covariance
  kNonGaussian,       // S3: skewed two-component clean mixture, S2-style poison
  kAllToAll,          // S4: class t holds poison sourced from class (t - 1) mod C
};

std::string to_string(Scenario s);
/// Accepts "S1".."S4" and the long names printed by to_string.
Scenario parse_scenario(const std::string& name);

/// A seeded synthetic representation dataset. Class parameters depend only
/// on `seed`; sample draws additionally on `stream`, so a clean fitting set
/// and a test set for the same classes come from different streams.
struct ScenarioSpec {
  Scenario scenario = Scenario::kEqualMeanDiffCov;
  std::uint32_t n_classes = 10;
  std::uint32_t samples_per_class = 500;
  std::uint32_t n_channels = 16;
  std::uint32_t spatial = 64;
  double poison_fraction = 0.1;
  std::uint32_t target_class = 0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;

  void validate() const;
  bool is_infected(std::uint32_t class_id) const;
  /// round(poison_fraction * samples_per_class) for infected classes, else 0.
  std::uint32_t poison_count(std::uint32_t class_id) const;
};

/// Per-class size of the clean reference set a defender fits on.
inline constexpr std::uint32_t kDefaultReferenceSamples = 2000;

/// Clean counterpart of `spec` on a separate sample stream: same classes,
/// no poison, `samples_per_class` draws each.
ScenarioSpec clean_reference(const ScenarioSpec& spec,
                             std::uint32_t samples_per_class = kDefaultReferenceSamples);

/// Mean and mixing matrix of a class's clean columns: x = mean + mixing * z.
struct ClassModel {
  std::vector<double> mean;
  SquareMatrix mixing;
};

ClassModel class_model(const ScenarioSpec& spec, std::uint32_t class_id);

/// Column transform applied by the dynamic trigger sourced at `class_id`:
/// a random rotation times per-axis scales drawn from stratified
/// log-uniform slices of [0.5, 2].
SquareMatrix trigger_transform(const ScenarioSpec& spec, std::uint32_t class_id);

/// Shift of length 3 used by the mean-shift scenario.
std::vector<double> trigger_shift(const ScenarioSpec& spec, std::uint32_t class_id);

/// Class-major dataset; within a class the clean samples precede the poison
/// ones. Values are rounded to float32 so dumps round-trip exactly.
Dataset generate(const ScenarioSpec& spec);

}  // namespace gramscan
