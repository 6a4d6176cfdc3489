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
#include <map>
#include <span>
#include <vector>

#include "gramscan/baselines.hpp"
#include "gramscan/classscan.hpp"
#include "gramscan/dataset.hpp"
#include "gramscan/deviation.hpp"
#include "gramscan/store_io.hpp"

namespace gramscan {

/// End-to-end knobs shared by the CLI and the acceptance harness.
struct PipelineConfig {
  int order_bound = kDefaultOrderBound;
  double scale_k = kDefaultScaleK;
  double percentile = kDefaultPercentile;
  unsigned iterations = kDefaultBootstrapIterations;
  bool per_class_threshold = true;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = all cores
  RmmdConfig rmmd;
};

using ClassGramians = std::map<ClassId, std::vector<GramianVector>>;

std::vector<GramianVector> compute_gramians(const Dataset& data, int order_bound, unsigned threads);

ClassGramians group_by_class(std::span<const GramianVector> gramians,
                             std::span<const std::uint32_t> labels);

/// Per-class median/MAD statistics plus the bootstrapped boundary.
StatsFile fit_statistics(const ClassGramians& clean, const PipelineConfig& config);
StatsFile fit_statistics(const Dataset& clean, const PipelineConfig& config);

/// Online scoring. Every label must have fitted statistics and the file must
/// carry a threshold.
std::vector<DeviationReport> score_gramians(std::span<const GramianVector> gramians,
                                            std::span<const std::uint32_t> labels,
                                            const StatsFile& stats, unsigned threads);

/// Offline scan: split each class by its flags and run the RMMD scan over
/// the classes present in `labels`.
ScanReport scan_gramians(std::span<const GramianVector> gramians,
                         std::span<const std::uint32_t> labels,
                         std::span<const DeviationReport> reports, const RmmdConfig& config,
                         unsigned threads);

/// Spatially averaged representation (one value per channel).
std::vector<double> channel_means(const FeatureTensor& v);

/// Likelihood-ratio baseline: per class, L between the samples marked 0 and
/// 1 in `suspect` over channel-mean representations, then the MAD / e^2
/// rule. Classes with fewer than 2 samples on either side get L = 0.
ScanReport baseline_scan(const Dataset& data, std::span<const std::uint8_t> suspect);

/// 1 where a report is flagged.
std::vector<std::uint8_t> flags_of(std::span<const DeviationReport> reports);

}  // namespace gramscan
