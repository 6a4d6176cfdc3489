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

#include "gramscan/tensor.hpp"

namespace gramscan {

/// Entries on and above the diagonal of an n x n matrix.
constexpr std::size_t triangle_size(std::size_t n) noexcept { return n * (n + 1) / 2; }

/// Length of a concatenated Gramian vector: n(n+1)P/2.
constexpr std::size_t gramian_length(std::size_t n, std::size_t order_bound) noexcept {
  return triangle_size(n) * order_bound;
}

/// Above this magnitude of |v_ik|^p the tensor is normalised by its max-abs
/// before powering, and the scale is restored as c^2 afterwards.
inline constexpr double kPowerOverflowGuard = 1e150;

/// Concatenation of the vectorised upper triangles of G^1..G^P for one
/// sample. Segment p (1-based) occupies [(p-1)*n(n+1)/2, p*n(n+1)/2).
class GramianVector {
 public:
  GramianVector() = default;
  GramianVector(std::size_t channels, std::size_t order_bound, std::vector<double> values);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t order_bound() const noexcept { return order_bound_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> segment(std::size_t order) const;

  friend bool operator==(const GramianVector&, const GramianVector&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t order_bound_ = 0;
  std::vector<double> values_;
};

/// p-th order Gram matrix (v^p (v^p)^T)^(1/p) with powers taken elementwise
/// and the root taken as sign(q)|q|^(1/p). Order 1 is exactly v v^T.
SquareMatrix gram(const FeatureTensor& v, int order);

/// Row-major walk over i <= j. Throws kInvalidInput when the matrix is not
/// symmetric to 1e-9 relative.
std::vector<double> vectorize_upper(const SquareMatrix& g);

GramianVector gramian_vector(const FeatureTensor& v, int order_bound);

/// Sum over p = 1..P of ||G^p(a) - G^p(b)||_F^2.
double gram_distance(const FeatureTensor& a, const FeatureTensor& b, int order_bound);

}  // namespace gramscan
