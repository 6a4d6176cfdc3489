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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gramscan/deviation.hpp"

namespace gramscan {

/// Consistency constant turning a MAD into a normal-equivalent std.
inline constexpr double kMadConsistency = 1.4826;
/// A class is declared infected when its anomaly index reaches e^2.
inline const double kInfectedIndexThreshold = std::exp(2.0);
inline constexpr double kMadFloor = 1e-12;
inline constexpr double kDefaultLambda = 0.01;

/// Row-major set of equal-length vectors.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(std::size_t rows, std::size_t dim, std::vector<double> data);
  static SampleMatrix from_rows(std::span<const std::vector<double>> rows);
  static SampleMatrix from_gramians(std::span<const GramianVector> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> data() const noexcept { return data_; }

  void append(std::span<const double> row);

  friend auto operator<=>(const SampleMatrix&, const SampleMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

enum class KernelKind { kLinear, kGaussian };

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

/// k(x, y) = <x, y> or exp(-beta ||x - y||^2). An unset beta means "median
/// heuristic" and is only accepted by scan_classes.
struct KernelSpec {
  KernelKind kind = KernelKind::kGaussian;
  std::optional<double> bandwidth_beta;
};

struct RmmdConfig {
  KernelSpec kernel;
  double lambda_p = kDefaultLambda;
  double lambda_q = kDefaultLambda;
};

/// Biased (V-statistic) squared MMD, negative round-off clipped to 0.
/// Symmetric in its arguments bit for bit.
double mmd2(const SampleMatrix& p, const SampleMatrix& q, const KernelSpec& kernel);

/// mmd2 - lambda_p * ||mu_p||^2 - lambda_q * ||mu_q||^2. May be negative.
double rmmd(const SampleMatrix& p, const SampleMatrix& q, const RmmdConfig& config);

/// beta = 1 / (2 * median pairwise squared distance), falling back to the
/// mean and then to 1.0 when the median is zero.
double median_bandwidth(const SampleMatrix& samples);

struct AnomalyIndex {
  double median = 0.0;
  double mad = 0.0;
  std::vector<double> index;
};

/// |x - median| / (max(MAD, 1e-12) * 1.4826) for every value.
AnomalyIndex anomaly_index(std::span<const double> values);

struct ClassSubgroups {
  SampleMatrix clean;
  SampleMatrix suspect;
};

struct ClassScanResult {
  ClassId class_id = 0;
  double statistic = 0.0;      // R_t
  double anomaly_index = 0.0;  // R*_t
  bool infected = false;
  std::size_t n_clean = 0;
  std::size_t n_suspect = 0;
  double bandwidth = 0.0;      // beta used, 0 for the linear kernel or an empty subgroup
};

struct ScanReport {
  std::vector<ClassScanResult> per_class;
  double eta = kMadConsistency;
  double decision_threshold = kInfectedIndexThreshold;
  double median_statistic = 0.0;
  double mad_statistic = 0.0;
  RmmdConfig config;

  std::vector<ClassId> infected_classes() const;
};

/// Applies the MAD / e^2 rule to per-class statistics (shared with the
/// likelihood-ratio baseline). Needs at least two classes.
ScanReport rank_classes(std::vector<ClassScanResult> per_class, const RmmdConfig& config);

/// R_t = RMMD(clean_t, suspect_t) per class, then the anomaly index. A class
/// with an empty subgroup gets R_t = 0. Classes are processed in parallel.
ScanReport scan_classes(const std::map<ClassId, ClassSubgroups>& groups, const RmmdConfig& config,
                        unsigned threads = 1);

}  // namespace gramscan
