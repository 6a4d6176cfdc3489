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
#include <vector>

#include "gramscan/philox.hpp"
#include "gramscan/tensor.hpp"

namespace testing {

inline gramscan::RandomStream rng(std::uint32_t substream, std::uint64_t seed = 12345) {
  return gramscan::RandomStream(seed, gramscan::StreamPurpose::kTest, substream);
}

inline std::vector<double> normals(gramscan::RandomStream& r, std::size_t count,
                                   double scale = 1.0) {
  std::vector<double> out(count);
  for (auto& x : out) x = scale * r.normal();
  return out;
}

inline gramscan::FeatureTensor random_tensor(gramscan::RandomStream& r, std::size_t n,
                                             std::size_t m, double scale = 1.0) {
  return gramscan::FeatureTensor(n, m, normals(r, n * m, scale));
}

inline double relative_error(double got, double want) {
  const double denom = std::max(1.0, std::abs(want));
  return std::abs(got - want) / denom;
}

}  // namespace testing
