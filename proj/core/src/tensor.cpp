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

#include "gramscan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gramscan/error.hpp"

namespace gramscan {

FeatureTensor::FeatureTensor(std::size_t channels, std::size_t spatial,
                             std::vector<double> values)
    : channels_(channels), spatial_(spatial), values_(std::move(values)) {
  if (channels_ == 0 || spatial_ == 0) {
    throw Error(ErrorKind::kInvalidInput, "feature tensor needs at least one channel and one position");
  }
  if (values_.size() != channels_ * spatial_) {
    throw Error(ErrorKind::kInvalidInput,
                "feature tensor holds " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(channels_ * spatial_));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidInput, "feature tensor contains a non-finite value");
    }
  }
}

double FeatureTensor::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

FeatureTensor FeatureTensor::scaled(double factor) const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [factor](double v) { return v * factor; });
  return FeatureTensor(channels_, spatial_, std::move(out));
}

}  // namespace gramscan
