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
#include <span>
#include <vector>

namespace gramscan {

/// One sample's intermediate representation: `channels` feature maps, each
/// flattened to `spatial` positions, stored row-major (channel-major).
class FeatureTensor {
 public:
  FeatureTensor() = default;
  /// Throws kInvalidInput on a size mismatch, zero extent or non-finite value.
  FeatureTensor(std::size_t channels, std::size_t spatial,
                std::vector<double> values);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t spatial() const noexcept { return spatial_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t channel) const noexcept {
    return {values_.data() + channel * spatial_, spatial_};
  }
  double operator()(std::size_t channel, std::size_t pos) const noexcept {
    return values_[channel * spatial_ + pos];
  }

  double max_abs() const noexcept;
  FeatureTensor scaled(double factor) const;

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t spatial_ = 0;
  std::vector<double> values_;
};

/// Dense n x n matrix, row-major.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size) : n(size), data(size * size, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * n + j]; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;
};

}  // namespace gramscan
