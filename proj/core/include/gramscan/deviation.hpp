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
#include <map>
#include <span>
#include <vector>

#include "gramscan/gramian.hpp"

namespace gramscan {

inline constexpr double kDefaultScaleK = 10.0;
inline constexpr double kDefaultPercentile = 95.0;
inline constexpr unsigned kDefaultBootstrapIterations = 5;
inline constexpr int kDefaultOrderBound = 4;
/// Floor on |min| / |max| when dividing an out-of-band distance.
inline constexpr double kBoundFloor = 1e-12;

using ClassId = std::uint32_t;

/// Per-class, per-dimension robust location and scale of clean Gramian
/// vectors. Immutable once fitted.
struct ClassStats {
  ClassId class_id = 0;
  std::size_t n_channels = 0;
  std::size_t order_bound = 0;
  std::vector<double> medians;
  std::vector<double> mads;
  double scale_k = kDefaultScaleK;
  std::size_t n_fit = 0;

  std::size_t size() const noexcept { return medians.size(); }
  /// Throws kValidation when lengths, MAD signs or k are inconsistent.
  void validate() const;

  friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

/// Mean/variance ablation of ClassStats (population variance, divisor N).
struct GaussianClassStats {
  ClassId class_id = 0;
  std::size_t n_channels = 0;
  std::size_t order_bound = 0;
  std::vector<double> means;
  std::vector<double> variances;
  double scale_k = kDefaultScaleK;
  std::size_t n_fit = 0;
};

struct DimensionDeviation {
  std::size_t index = 0;
  double value = 0.0;
};

struct DeviationReport {
  std::size_t sample_index = 0;
  ClassId predicted_class = 0;
  double deviation = 0.0;
  bool flagged = false;
  /// Only dimensions with a positive contribution; filled on request.
  std::vector<DimensionDeviation> per_dimension;
};

/// Detection boundary from bootstrapped clean deviations. `value` is the
/// pooled (global) boundary; `class_values` holds per-class boundaries and
/// is used instead when `per_class` is set.
struct Threshold {
  double value = 0.0;
  double percentile = kDefaultPercentile;
  unsigned iterations = kDefaultBootstrapIterations;
  bool per_class = true;
  std::uint64_t seed = 0;
  std::map<ClassId, double> class_values;

  double value_for(ClassId class_id) const;

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

ClassStats fit_class_stats(std::span<const GramianVector> gramians, ClassId class_id,
                           double scale_k = kDefaultScaleK);

GaussianClassStats fit_class_stats_gaussian(std::span<const GramianVector> gramians,
                                            ClassId class_id, double scale_k = kDefaultScaleK);

/// Piecewise out-of-band deviation averaged over all n(n+1)P/2 dimensions.
/// The report is not flagged; see score_sample.
DeviationReport deviation(const GramianVector& sample, const ClassStats& stats,
                          bool keep_per_dimension = false);

double deviation(const GramianVector& sample, const GaussianClassStats& stats);

/// Raw-span form used by the hot scoring path.
double deviation_value(std::span<const double> sample, std::span<const double> centers,
                       std::span<const double> spreads, double scale_k);

DeviationReport score_sample(const GramianVector& sample, std::size_t sample_index,
                             const ClassStats& stats, const Threshold& threshold);

struct BootstrapConfig {
  unsigned iterations = kDefaultBootstrapIterations;
  double percentile = kDefaultPercentile;
  double scale_k = kDefaultScaleK;
  std::uint64_t seed = 0;
  bool per_class = true;
};

/// For each class and each of T iterations: hold out ceil(N/T) random
/// samples, fit on the rest, score the held-out set. The pooled deviations
/// give the global boundary; each class's own deviations give its boundary.
Threshold bootstrap_threshold(const std::map<ClassId, std::vector<GramianVector>>& clean,
                              const BootstrapConfig& config);

struct Subgroups {
  std::vector<std::size_t> clean;
  std::vector<std::size_t> suspect;
};

/// Indices into `reports`, split by deviation > boundary of the report's class.
Subgroups split_subgroups(std::span<const DeviationReport> reports, const Threshold& threshold);

}  // namespace gramscan
