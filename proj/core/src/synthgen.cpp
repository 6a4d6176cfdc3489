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

#include "gramscan/synthgen.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "gramscan/error.hpp"
#include "gramscan/philox.hpp"

namespace gramscan {

namespace {

constexpr double kShiftNorm = 3.0;
constexpr double kMixtureWeight = 0.25;  // share of the skewed component in S3
constexpr double kMixtureOffset = 1.5;
constexpr double kMixtureSpread = 0.5;

// y = a * x for an n x n row-major matrix.
void apply(const SquareMatrix& a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < a.n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.n; ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
}

SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b) {
  SquareMatrix out(a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t k = 0; k < a.n; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < a.n; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kMeanShift: return "S1_mean_shift";
    case Scenario::kEqualMeanDiffCov: return "S2_equal_mean_diff_cov";
    case Scenario::kNonGaussian: return "S3_non_gaussian";
    case Scenario::kAllToAll: return "S4_all_to_all";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  for (auto s : {Scenario::kMeanShift, Scenario::kEqualMeanDiffCov, Scenario::kNonGaussian,
                 Scenario::kAllToAll}) {
    const std::string full = to_string(s);
    if (name == full || name == full.substr(0, 2)) return s;
  }
  throw Error(ErrorKind::kValidation, "unknown scenario '" + name + "'");
}

void ScenarioSpec::validate() const {
  if (n_classes == 0 || samples_per_class == 0 || n_channels == 0 || spatial == 0) {
    throw Error(ErrorKind::kValidation, "scenario counts must all be >= 1");
  }
  if (!(poison_fraction >= 0.0 && poison_fraction < 1.0)) {
    throw Error(ErrorKind::kValidation, "poison_fraction must lie in [0, 1)");
  }
  if (scenario == Scenario::kAllToAll) {
    if (n_classes < 2) throw Error(ErrorKind::kValidation, "all-to-all needs at least 2 classes");
  } else if (target_class >= n_classes) {
    throw Error(ErrorKind::kValidation, "target_class is not a valid class label");
  }
  if (stream >= (1u << 24)) throw Error(ErrorKind::kValidation, "stream must be < 2^24");
}

bool ScenarioSpec::is_infected(std::uint32_t class_id) const {
  if (poison_fraction <= 0.0) return false;
  return scenario == Scenario::kAllToAll || class_id == target_class;
}

std::uint32_t ScenarioSpec::poison_count(std::uint32_t class_id) const {
  if (!is_infected(class_id)) return 0;
  const double n = std::floor(poison_fraction * samples_per_class + 0.5);
  return static_cast<std::uint32_t>(std::min<double>(n, samples_per_class));
}

ClassModel class_model(const ScenarioSpec& spec, std::uint32_t class_id) {
  const std::size_t n = spec.n_channels;
  RandomStream rng(spec.seed, StreamPurpose::kClassParams, class_id);
  ClassModel model;
  model.mean.resize(n);
  for (auto& m : model.mean) m = rng.normal();
  model.mixing = SquareMatrix(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      model.mixing(i, j) = rng.normal() * scale + (i == j ? 0.5 : 0.0);
    }
  }
  return model;
}

SquareMatrix trigger_transform(const ScenarioSpec& spec, std::uint32_t class_id) {
  const auto n = static_cast<Eigen::Index>(spec.n_channels);
  RandomStream rng(spec.seed, StreamPurpose::kTrigger, class_id);
  Eigen::MatrixXd gaussian(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) gaussian(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix makes the rotation Haar-distributed and deterministic.
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  // Stratified log-uniform scales: axis j draws from the j-th of n equal
  // slices of [log 0.5, log 2], so every trigger both shrinks and stretches.
  const double lo = std::log(0.5);
  const double width = (std::log(2.0) - lo) / static_cast<double>(n);
  SquareMatrix out(spec.n_channels);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = std::exp(lo + width * (static_cast<double>(j) + rng.uniform()));
    for (Eigen::Index i = 0; i < n; ++i) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = q(i, j) * s;
    }
  }
  return out;
}

std::vector<double> trigger_shift(const ScenarioSpec& spec, std::uint32_t class_id) {
  RandomStream rng(spec.seed, StreamPurpose::kTrigger, class_id);
  std::vector<double> u(spec.n_channels);
  double norm = 0.0;
  for (auto& x : u) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : u) x *= kShiftNorm / norm;
  return u;
}

ScenarioSpec clean_reference(const ScenarioSpec& spec, std::uint32_t samples_per_class) {
  ScenarioSpec out = spec;
  out.poison_fraction = 0.0;
  out.samples_per_class = samples_per_class;
  out.stream = spec.stream + 1;
  out.validate();
  return out;
}

Dataset generate(const ScenarioSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_channels;
  const std::size_t m = spec.spatial;
  Dataset data;
  data.n_channels = spec.n_channels;
  data.spatial = spec.spatial;
  data.poison.emplace();
  const std::size_t total = static_cast<std::size_t>(spec.n_classes) * spec.samples_per_class;
  data.tensors.reserve(total);
  data.labels.reserve(total);
  data.poison->reserve(total);

  std::vector<double> z(n), w(n), col(n), tmp(n);
  for (std::uint32_t c = 0; c < spec.n_classes; ++c) {
    const ClassModel model = class_model(spec, c);
    const std::uint32_t n_poison = spec.poison_count(c);
    const std::uint32_t n_clean = spec.samples_per_class - n_poison;

    // Poison columns: mean + poison_mixing * w (or shifted clean columns).
    SquareMatrix poison_mixing;
    std::vector<double> shift;
    if (n_poison > 0) {
      if (spec.scenario == Scenario::kMeanShift) {
        shift = trigger_shift(spec, c);
      } else if (spec.scenario == Scenario::kAllToAll) {
        const std::uint32_t source = (c + spec.n_classes - 1) % spec.n_classes;
        poison_mixing = multiply(trigger_transform(spec, source), class_model(spec, source).mixing);
      } else {
        poison_mixing = multiply(trigger_transform(spec, c), model.mixing);
      }
    }

    RandomStream rng(spec.seed, StreamPurpose::kSamples, c, spec.stream);
    for (std::uint32_t s = 0; s < spec.samples_per_class; ++s) {
      const bool is_poison = s >= n_clean;
      std::vector<double> values(n * m);
      for (std::size_t k = 0; k < m; ++k) {
        for (auto& x : z) x = rng.normal();
        if (spec.scenario == Scenario::kNonGaussian && rng.uniform() < kMixtureWeight) {
          for (std::size_t i = 0; i < n; ++i) w[i] = kMixtureOffset + kMixtureSpread * z[i];
        } else {
          w = z;
        }
        if (is_poison && spec.scenario != Scenario::kMeanShift) {
          apply(poison_mixing, w, tmp);
        } else {
          apply(model.mixing, w, tmp);
        }
        for (std::size_t i = 0; i < n; ++i) {
          col[i] = model.mean[i] + tmp[i] + (is_poison && !shift.empty() ? shift[i] : 0.0);
          values[i * m + k] = static_cast<double>(static_cast<float>(col[i]));
        }
      }
      data.tensors.emplace_back(n, m, std::move(values));
      data.labels.push_back(c);
      data.poison->push_back(is_poison ? 1 : 0);
    }
  }
  return data;
}

}  // namespace gramscan
