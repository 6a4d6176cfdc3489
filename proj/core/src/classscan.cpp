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

#include "gramscan/classscan.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gramscan/error.hpp"
#include "gramscan/parallel.hpp"
#include "gramscan/robust_stats.hpp"

namespace gramscan {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

struct ResolvedKernel {
  KernelKind kind;
  double beta;

  double operator()(std::span<const double> a, std::span<const double> b) const {
    if (kind == KernelKind::kLinear) return dot(a, b);
    return std::exp(-beta * squared_distance(a, b));
  }
};

ResolvedKernel resolve(const KernelSpec& spec) {
  if (spec.kind == KernelKind::kLinear) return {KernelKind::kLinear, 0.0};
  if (!spec.bandwidth_beta) {
    throw Error(ErrorKind::kInvalidInput, "gaussian kernel needs an explicit bandwidth here");
  }
  const double beta = *spec.bandwidth_beta;
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::kInvalidInput, "gaussian bandwidth beta must be positive and finite");
  }
  return {KernelKind::kGaussian, beta};
}

// Mean of k over all ordered pairs of x (diagonal included).
double self_mean(const SampleMatrix& x, const ResolvedKernel& k) {
  const std::size_t n = x.rows();
  double diag = 0.0;
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diag += k(x.row(i), x.row(i));
    for (std::size_t j = i + 1; j < n; ++j) off += k(x.row(i), x.row(j));
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return (diag + 2.0 * off) / nn;
}

double cross_mean(const SampleMatrix& x, const SampleMatrix& y, const ResolvedKernel& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) acc += k(x.row(i), y.row(j));
  }
  return acc / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
}

struct KernelSums {
  double pp;
  double qq;
  double pq;
};

void check_pair(const SampleMatrix& p, const SampleMatrix& q) {
  if (p.empty() || q.empty()) {
    throw Error(ErrorKind::kInsufficientData, "MMD needs two non-empty samples");
  }
  if (p.dim() != q.dim()) {
    throw Error(ErrorKind::kInvalidInput, "MMD samples have different vector dimensions");
  }
}

// Evaluated in a canonical argument order so that swapping p and q yields
// bit-identical sums.
KernelSums kernel_sums(const SampleMatrix& p, const SampleMatrix& q, const KernelSpec& spec) {
  check_pair(p, q);
  const ResolvedKernel k = resolve(spec);
  const bool swapped = q < p;
  const SampleMatrix& a = swapped ? q : p;
  const SampleMatrix& b = swapped ? p : q;
  const double aa = self_mean(a, k);
  const double bb = self_mean(b, k);
  const double ab = cross_mean(a, b, k);
  return swapped ? KernelSums{bb, aa, ab} : KernelSums{aa, bb, ab};
}

double mmd2_from(const KernelSums& s) {
  const double raw = (s.pp + s.qq) - 2.0 * s.pq;
  return raw > 0.0 ? raw : 0.0;
}

}  // namespace

SampleMatrix::SampleMatrix(std::size_t rows, std::size_t dim, std::vector<double> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    throw Error(ErrorKind::kInvalidInput, "sample matrix storage does not match rows x dim");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidInput, "sample matrix has a non-finite entry");
  }
}

SampleMatrix SampleMatrix::from_rows(std::span<const std::vector<double>> rows) {
  SampleMatrix out;
  for (const auto& r : rows) out.append(r);
  return out;
}

SampleMatrix SampleMatrix::from_gramians(std::span<const GramianVector> rows) {
  SampleMatrix out;
  for (const auto& r : rows) out.append(r.values());
  return out;
}

void SampleMatrix::append(std::span<const double> row) {
  if (rows_ == 0 && data_.empty()) {
    dim_ = row.size();
  } else if (row.size() != dim_) {
    throw Error(ErrorKind::kInvalidInput, "appended row has the wrong dimension");
  }
  for (double v : row) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidInput, "sample row has a non-finite entry");
  }
  data_.insert(data_.end(), row.begin(), row.end());
  ++rows_;
}

std::string to_string(KernelKind kind) {
  return kind == KernelKind::kLinear ? "linear" : "gaussian";
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "gaussian") return KernelKind::kGaussian;
  throw Error(ErrorKind::kValidation, "unknown kernel '" + name + "'");
}

double mmd2(const SampleMatrix& p, const SampleMatrix& q, const KernelSpec& kernel) {
  return mmd2_from(kernel_sums(p, q, kernel));
}

double rmmd(const SampleMatrix& p, const SampleMatrix& q, const RmmdConfig& config) {
  if (!std::isfinite(config.lambda_p) || !std::isfinite(config.lambda_q) || config.lambda_p < 0.0 ||
      config.lambda_q < 0.0) {
    throw Error(ErrorKind::kInvalidInput, "RMMD penalties must be finite and non-negative");
  }
  const KernelSums s = kernel_sums(p, q, config.kernel);
  return mmd2_from(s) - config.lambda_p * s.pp - config.lambda_q * s.qq;
}

double median_bandwidth(const SampleMatrix& samples) {
  const std::size_t n = samples.rows();
  if (n < 2) {
    throw Error(ErrorKind::kInsufficientData, "median bandwidth needs at least 2 samples");
  }
  std::vector<double> distances;
  distances.reserve(n * (n - 1) / 2);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = squared_distance(samples.row(i), samples.row(j));
      distances.push_back(d);
      total += d;
    }
  }
  const double mean = total / static_cast<double>(distances.size());
  const double med = median_inplace(distances);
  if (med > 0.0) return 1.0 / (2.0 * med);
  if (mean > 0.0) return 1.0 / (2.0 * mean);
  return 1.0;
}

AnomalyIndex anomaly_index(std::span<const double> values) {
  AnomalyIndex out;
  out.median = median(std::vector<double>(values.begin(), values.end()));
  out.mad = median_absolute_deviation(values, out.median);
  const double denom = std::max(out.mad, kMadFloor) * kMadConsistency;
  out.index.reserve(values.size());
  for (double v : values) out.index.push_back(std::abs(v - out.median) / denom);
  return out;
}

std::vector<ClassId> ScanReport::infected_classes() const {
  std::vector<ClassId> out;
  for (const auto& c : per_class) {
    if (c.infected) out.push_back(c.class_id);
  }
  return out;
}

ScanReport rank_classes(std::vector<ClassScanResult> per_class, const RmmdConfig& config) {
  if (per_class.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "the anomaly index needs at least 2 classes");
  }
  std::vector<double> stats;
  stats.reserve(per_class.size());
  for (const auto& c : per_class) stats.push_back(c.statistic);
  const AnomalyIndex ai = anomaly_index(stats);
  ScanReport report;
  report.config = config;
  report.median_statistic = ai.median;
  report.mad_statistic = ai.mad;
  for (std::size_t i = 0; i < per_class.size(); ++i) {
    per_class[i].anomaly_index = ai.index[i];
    per_class[i].infected = ai.index[i] >= report.decision_threshold;
  }
  report.per_class = std::move(per_class);
  return report;
}

ScanReport scan_classes(const std::map<ClassId, ClassSubgroups>& groups, const RmmdConfig& config,
                        unsigned threads) {
  if (groups.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "scanning needs at least 2 classes");
  }
  std::vector<std::pair<ClassId, const ClassSubgroups*>> items;
  for (const auto& [id, g] : groups) items.emplace_back(id, &g);
  std::vector<ClassScanResult> results(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    const auto& [id, g] = items[i];
    ClassScanResult r;
    r.class_id = id;
    r.n_clean = g->clean.rows();
    r.n_suspect = g->suspect.rows();
    if (!g->clean.empty() && !g->suspect.empty()) {
      RmmdConfig resolved = config;
      if (config.kernel.kind == KernelKind::kGaussian && !config.kernel.bandwidth_beta) {
        SampleMatrix pooled = g->clean;
        for (std::size_t k = 0; k < g->suspect.rows(); ++k) pooled.append(g->suspect.row(k));
        resolved.kernel.bandwidth_beta = median_bandwidth(pooled);
      }
      if (resolved.kernel.kind == KernelKind::kGaussian) r.bandwidth = *resolved.kernel.bandwidth_beta;
      r.statistic = rmmd(g->clean, g->suspect, resolved);
    }
    results[i] = r;
  });
  return rank_classes(std::move(results), config);
}

}  // namespace gramscan
