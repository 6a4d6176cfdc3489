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

#include "gramscan/gramian.hpp"

#include <cmath>
#include <string>

#include "gramscan/error.hpp"

namespace gramscan {

namespace {

void check_order(int order) {
  if (order < 1) {
    throw Error(ErrorKind::kInvalidOrder, "Gram order must be >= 1, got " + std::to_string(order));
  }
}

bool needs_rescale(double max_abs, int order) {
  return max_abs > 0.0 && order * std::log(max_abs) > std::log(kPowerOverflowGuard);
}

// out = base^order by repeated multiplication, left to right.
void power_into(std::span<const double> base, int order, std::vector<double>& out) {
  out.assign(base.begin(), base.end());
  for (int e = 1; e < order; ++e) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= base[i];
  }
}

double signed_root(double q, int order) {
  if (order == 1) return q;
  const double r = std::pow(std::abs(q), 1.0 / order);
  return q < 0.0 ? -r : r;
}

// Writes root(W W^T) scaled by `restore` into g.
void gram_from_powers(const std::vector<double>& powers, std::size_t n, std::size_t m,
                      int order, double restore, SquareMatrix& g) {
  g = SquareMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* wi = powers.data() + i * m;
    for (std::size_t j = i; j < n; ++j) {
      const double* wj = powers.data() + j * m;
      double q = 0.0;
      for (std::size_t k = 0; k < m; ++k) q += wi[k] * wj[k];
      const double value = signed_root(q, order) * restore;
      g(i, j) = value;
      g(j, i) = value;
    }
  }
}

// Computes G^order into g. `running` must hold v^(order-1) when the previous
// order was computed without rescaling (or be empty); it is advanced to v^order.
void gram_order(const FeatureTensor& v, int order, double max_abs, std::vector<double>& running,
                bool running_valid, SquareMatrix& g) {
  const std::size_t n = v.channels();
  const std::size_t m = v.spatial();
  if (needs_rescale(max_abs, order)) {
    const FeatureTensor unit = v.scaled(1.0 / max_abs);
    std::vector<double> powers;
    power_into(unit.values(), order, powers);
    gram_from_powers(powers, n, m, order, max_abs * max_abs, g);
    return;
  }
  const auto base = v.values();
  if (running_valid) {
    for (std::size_t i = 0; i < running.size(); ++i) running[i] *= base[i];
  } else {
    power_into(base, order, running);
  }
  gram_from_powers(running, n, m, order, 1.0, g);
}

}  // namespace

GramianVector::GramianVector(std::size_t channels, std::size_t order_bound,
                             std::vector<double> values)
    : channels_(channels), order_bound_(order_bound), values_(std::move(values)) {
  if (channels_ == 0 || order_bound_ == 0) {
    throw Error(ErrorKind::kInvalidInput, "Gramian vector needs n >= 1 and P >= 1");
  }
  if (values_.size() != gramian_length(channels_, order_bound_)) {
    throw Error(ErrorKind::kInvalidInput,
                "Gramian vector length " + std::to_string(values_.size()) + " != n(n+1)P/2 = " +
                    std::to_string(gramian_length(channels_, order_bound_)));
  }
}

std::span<const double> GramianVector::segment(std::size_t order) const {
  if (order < 1 || order > order_bound_) {
    throw Error(ErrorKind::kInvalidOrder, "segment order out of range");
  }
  const std::size_t len = triangle_size(channels_);
  return {values_.data() + (order - 1) * len, len};
}

SquareMatrix gram(const FeatureTensor& v, int order) {
  check_order(order);
  if (v.channels() == 0) throw Error(ErrorKind::kInvalidInput, "empty feature tensor");
  SquareMatrix g;
  std::vector<double> running;
  gram_order(v, order, v.max_abs(), running, false, g);
  return g;
}

std::vector<double> vectorize_upper(const SquareMatrix& g) {
  if (g.data.size() != g.n * g.n) {
    throw Error(ErrorKind::kInvalidInput, "matrix storage does not match its dimension");
  }
  std::vector<double> out;
  out.reserve(triangle_size(g.n));
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = i; j < g.n; ++j) {
      const double a = g(i, j);
      const double b = g(j, i);
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw Error(ErrorKind::kInvalidInput, "matrix contains a non-finite entry");
      }
      if (std::abs(a - b) > 1e-9 * std::max(std::abs(a), std::abs(b))) {
        throw Error(ErrorKind::kInvalidInput,
                    "matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      out.push_back(a);
    }
  }
  return out;
}

GramianVector gramian_vector(const FeatureTensor& v, int order_bound) {
  check_order(order_bound);
  if (v.channels() == 0) throw Error(ErrorKind::kInvalidInput, "empty feature tensor");
  const std::size_t n = v.channels();
  const double max_abs = v.max_abs();
  std::vector<double> out;
  out.reserve(gramian_length(n, static_cast<std::size_t>(order_bound)));
  std::vector<double> running;
  bool running_valid = false;
  SquareMatrix g;
  for (int p = 1; p <= order_bound; ++p) {
    gram_order(v, p, max_abs, running, running_valid, g);
    running_valid = !needs_rescale(max_abs, p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) out.push_back(g(i, j));
    }
  }
  return GramianVector(n, static_cast<std::size_t>(order_bound), std::move(out));
}

double gram_distance(const FeatureTensor& a, const FeatureTensor& b, int order_bound) {
  check_order(order_bound);
  if (a.channels() != b.channels() || a.spatial() != b.spatial()) {
    throw Error(ErrorKind::kInvalidInput, "gram_distance needs tensors of identical shape");
  }
  double total = 0.0;
  for (int p = 1; p <= order_bound; ++p) {
    const SquareMatrix ga = gram(a, p);
    const SquareMatrix gb = gram(b, p);
    for (std::size_t i = 0; i < ga.data.size(); ++i) {
      const double d = ga.data[i] - gb.data[i];
      total += d * d;
    }
  }
  return total;
}

}  // namespace gramscan
