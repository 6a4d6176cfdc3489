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

#include "gramscan/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gramscan/error.hpp"
#include "gramscan/philox.hpp"
#include "gramscan/robust_stats.hpp"

namespace gramscan {

namespace {

void check_fit_input(std::span<const GramianVector> gramians) {
  if (gramians.size() < 2) {
    throw Error(ErrorKind::kInsufficientData,
                "fitting class statistics needs at least 2 samples, got " +
                    std::to_string(gramians.size()));
  }
  const auto& first = gramians.front();
  for (const auto& g : gramians) {
    if (g.size() != first.size() || g.channels() != first.channels() ||
        g.order_bound() != first.order_bound()) {
      throw Error(ErrorKind::kInvalidInput, "Gramian vectors of differing shape in one fit");
    }
  }
}

void check_scale(double scale_k) {
  if (!(scale_k > 0.0) || !std::isfinite(scale_k)) {
    throw Error(ErrorKind::kInvalidInput, "scale factor k must be positive and finite");
  }
}

// Bounds and ratios in extended precision: a bound near zero amplifies any
// rounding in median +/- k * MAD.
inline long double band_excess(double x, double center, double spread, double scale_k) {
  const long double width = static_cast<long double>(scale_k) * spread;
  const long double lo = center - width;
  const long double hi = center + width;
  const long double floor = kBoundFloor;
  if (x < lo) return (lo - x) / std::max(std::fabs(lo), floor);
  if (x > hi) return (x - hi) / std::max(std::fabs(hi), floor);
  return 0.0L;
}

}  // namespace

void ClassStats::validate() const {
  const std::size_t expected = gramian_length(n_channels, order_bound);
  if (n_channels == 0 || order_bound == 0) {
    throw Error(ErrorKind::kValidation, "class stats need n >= 1 and P >= 1");
  }
  if (medians.size() != expected || mads.size() != expected) {
    throw Error(ErrorKind::kValidation, "class stats vector length != n(n+1)P/2");
  }
  for (double m : mads) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error(ErrorKind::kValidation, "MAD entries must be finite and non-negative");
    }
  }
  for (double m : medians) {
    if (!std::isfinite(m)) throw Error(ErrorKind::kValidation, "non-finite median");
  }
  if (!(scale_k > 0.0) || !std::isfinite(scale_k)) {
    throw Error(ErrorKind::kValidation, "scale factor k must be positive");
  }
}

double Threshold::value_for(ClassId class_id) const {
  if (per_class) {
    if (auto it = class_values.find(class_id); it != class_values.end()) return it->second;
  }
  return value;
}

ClassStats fit_class_stats(std::span<const GramianVector> gramians, ClassId class_id,
                           double scale_k) {
  check_fit_input(gramians);
  check_scale(scale_k);
  const std::size_t dims = gramians.front().size();
  ClassStats stats;
  stats.class_id = class_id;
  stats.n_channels = gramians.front().channels();
  stats.order_bound = gramians.front().order_bound();
  stats.scale_k = scale_k;
  stats.n_fit = gramians.size();
  stats.medians.resize(dims);
  stats.mads.resize(dims);
  std::vector<double> column(gramians.size());
  for (std::size_t j = 0; j < dims; ++j) {
    for (std::size_t i = 0; i < gramians.size(); ++i) column[i] = gramians[i].values()[j];
    const double center = median_inplace(column);
    for (double& x : column) x = std::abs(x - center);
    stats.medians[j] = center;
    stats.mads[j] = median_inplace(column);
  }
  return stats;
}

GaussianClassStats fit_class_stats_gaussian(std::span<const GramianVector> gramians,
                                            ClassId class_id, double scale_k) {
  check_fit_input(gramians);
  check_scale(scale_k);
  const std::size_t dims = gramians.front().size();
  GaussianClassStats stats;
  stats.class_id = class_id;
  stats.n_channels = gramians.front().channels();
  stats.order_bound = gramians.front().order_bound();
  stats.scale_k = scale_k;
  stats.n_fit = gramians.size();
  stats.means.assign(dims, 0.0);
  std::vector<double> m2(dims, 0.0);
  // Welford update per dimension.
  double count = 0.0;
  for (const auto& g : gramians) {
    count += 1.0;
    const auto v = g.values();
    for (std::size_t j = 0; j < dims; ++j) {
      const double delta = v[j] - stats.means[j];
      stats.means[j] += delta / count;
      m2[j] += delta * (v[j] - stats.means[j]);
    }
  }
  stats.variances.resize(dims);
  for (std::size_t j = 0; j < dims; ++j) stats.variances[j] = std::max(0.0, m2[j] / count);
  return stats;
}

double deviation_value(std::span<const double> sample, std::span<const double> centers,
                       std::span<const double> spreads, double scale_k) {
  if (sample.size() != centers.size() || sample.size() != spreads.size()) {
    throw Error(ErrorKind::kInvalidInput,
                "sample length " + std::to_string(sample.size()) + " does not match statistics length " +
                    std::to_string(centers.size()));
  }
  if (sample.empty()) throw Error(ErrorKind::kInvalidInput, "empty Gramian vector");
  long double total = 0.0L;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    total += band_excess(sample[j], centers[j], spreads[j], scale_k);
  }
  return static_cast<double>(total / static_cast<long double>(sample.size()));
}

DeviationReport deviation(const GramianVector& sample, const ClassStats& stats,
                          bool keep_per_dimension) {
  DeviationReport report;
  report.predicted_class = stats.class_id;
  report.deviation = deviation_value(sample.values(), stats.medians, stats.mads, stats.scale_k);
  if (keep_per_dimension && report.deviation > 0.0) {
    const auto s = sample.values();
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto d =
          static_cast<double>(band_excess(s[j], stats.medians[j], stats.mads[j], stats.scale_k));
      if (d > 0.0) report.per_dimension.push_back({j, d});
    }
  }
  return report;
}

double deviation(const GramianVector& sample, const GaussianClassStats& stats) {
  std::vector<double> stds(stats.variances.size());
  std::transform(stats.variances.begin(), stats.variances.end(), stds.begin(),
                 [](double v) { return std::sqrt(v); });
  return deviation_value(sample.values(), stats.means, stds, stats.scale_k);
}

DeviationReport score_sample(const GramianVector& sample, std::size_t sample_index,
                             const ClassStats& stats, const Threshold& threshold) {
  DeviationReport report = deviation(sample, stats);
  report.sample_index = sample_index;
  report.flagged = report.deviation > threshold.value_for(stats.class_id);
  return report;
}

Threshold bootstrap_threshold(const std::map<ClassId, std::vector<GramianVector>>& clean,
                              const BootstrapConfig& config) {
  if (config.iterations < 2) {
    throw Error(ErrorKind::kInvalidInput, "bootstrap needs T >= 2 iterations");
  }
  if (!(config.percentile > 0.0 && config.percentile < 100.0)) {
    throw Error(ErrorKind::kInvalidInput, "percentile must lie in (0, 100)");
  }
  check_scale(config.scale_k);
  if (clean.empty()) throw Error(ErrorKind::kInsufficientData, "no clean classes to bootstrap");

  Threshold threshold;
  threshold.percentile = config.percentile;
  threshold.iterations = config.iterations;
  threshold.per_class = config.per_class;
  threshold.seed = config.seed;

  std::vector<double> pooled;
  for (const auto& [class_id, samples] : clean) {
    const std::size_t n = samples.size();
    const std::size_t held = (n + config.iterations - 1) / config.iterations;
    if (n < config.iterations || n < held + 2) {
      throw Error(ErrorKind::kInsufficientData,
                  "class " + std::to_string(class_id) + " has " + std::to_string(n) +
                      " clean samples, too few for T=" + std::to_string(config.iterations));
    }
    std::vector<double> class_devs;
    class_devs.reserve(held * config.iterations);
    std::vector<std::size_t> order(n);
    std::vector<GramianVector> fit_set;
    fit_set.reserve(n - held);
    for (unsigned it = 0; it < config.iterations; ++it) {
      RandomStream rng(config.seed, StreamPurpose::kBootstrap, class_id, it);
      std::iota(order.begin(), order.end(), std::size_t{0});
      // Partial Fisher-Yates: the first `held` slots form the test draw.
      for (std::size_t i = 0; i < held; ++i) {
        const std::size_t pick = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[pick]);
      }
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
      fit_set.clear();
      for (std::size_t i = held; i < n; ++i) fit_set.push_back(samples[order[i]]);
      const ClassStats stats = fit_class_stats(fit_set, class_id, config.scale_k);
      for (std::size_t i = 0; i < held; ++i) {
        class_devs.push_back(deviation(samples[order[i]], stats).deviation);
      }
    }
    pooled.insert(pooled.end(), class_devs.begin(), class_devs.end());
    threshold.class_values[class_id] = nearest_rank_percentile(std::move(class_devs), config.percentile);
  }
  threshold.value = nearest_rank_percentile(std::move(pooled), config.percentile);
  return threshold;
}

Subgroups split_subgroups(std::span<const DeviationReport> reports, const Threshold& threshold) {
  Subgroups groups;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.deviation > threshold.value_for(r.predicted_class)) {
      groups.suspect.push_back(i);
    } else {
      groups.clean.push_back(i);
    }
  }
  return groups;
}

}  // namespace gramscan
