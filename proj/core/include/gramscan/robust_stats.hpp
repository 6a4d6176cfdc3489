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

#include <span>
#include <vector>

namespace gramscan {

/// Median of `values`; an even count averages the two middle order
/// statistics. Reorders the input. Throws kInsufficientData when empty.
double median_inplace(std::span<double> values);

double median(std::vector<double> values);

/// Median of |x - median(x)|.
double median_absolute_deviation(std::span<const double> values, double center);

/// Nearest-rank percentile: the ceil(q/100 * N)-th smallest value (1-based,
/// clamped to [1, N]). `percentile` must lie in (0, 100).
double nearest_rank_percentile(std::vector<double> values, double percentile);

}  // namespace gramscan
