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

#include "gramscan/robust_stats.hpp"

#include <algorithm>
#include <cmath>

#include "gramscan/error.hpp"

namespace gramscan {

double median_inplace(std::span<double> values) {
  if (values.empty()) throw Error(ErrorKind::kInsufficientData, "median of an empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return lower + (upper - lower) / 2.0;
}

double median(std::vector<double> values) { return median_inplace(values); }

double median_absolute_deviation(std::span<const double> values, double center) {
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [center](double x) { return std::abs(x - center); });
  return median_inplace(dev);
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) throw Error(ErrorKind::kInsufficientData, "percentile of an empty set");
  if (!(percentile > 0.0 && percentile < 100.0)) {
    throw Error(ErrorKind::kInvalidInput, "percentile must lie in (0, 100)");
  }
  const std::size_t n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  const auto it = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), it, values.end());
  return *it;
}

}  // namespace gramscan
