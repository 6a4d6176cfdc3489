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
#include <span>
#include <vector>

#include "gramscan/classscan.hpp"
#include "gramscan/tensor.hpp"

namespace gramscan {

/// Two-subgroup shared-covariance Gaussian model of one class's
/// representations: clean r = u1 + e, poison r = u2 + e, e ~ N(0, S_eps).
struct ScanModel {
  std::vector<double> u1;
  std::vector<double> u2;
  SquareMatrix s_eps;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  std::size_t total() const noexcept { return n1 + n2; }
  /// kValidation unless S_eps is symmetric (1e-9) with eigenvalues >= -1e-9
  /// and both counts are positive.
  void validate() const;
};

/// Condition number above which S_eps gets +1e-9 I before inversion.
inline constexpr double kScanConditionLimit = 1e12;
inline constexpr double kScanRidge = 1e-9;

/// Closed-form likelihood ratio (n1 n2 / N) (u1 - u2)^T S_eps^-1 (u1 - u2).
double scan_likelihood_ratio(const ScanModel& model);

/// Fits subgroup means and the pooled within-subgroup covariance
/// (divisor N - 2). `second_group[i]` != 0 puts sample i in the poison group.
ScanModel scan_decompose(const SampleMatrix& samples, std::span<const std::uint8_t> second_group);

}  // namespace gramscan
