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

#include "gramscan/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "gramscan/error.hpp"

namespace gramscan {

namespace {

Eigen::MatrixXd to_eigen(const SquareMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.n), static_cast<Eigen::Index>(m.n));
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    }
  }
  return out;
}

}  // namespace

void ScanModel::validate() const {
  const std::size_t d = u1.size();
  if (d == 0 || u2.size() != d || s_eps.n != d || s_eps.data.size() != d * d) {
    throw Error(ErrorKind::kValidation, "scan model dimensions are inconsistent");
  }
  if (n1 == 0 || n2 == 0) throw Error(ErrorKind::kValidation, "scan model needs n1, n2 >= 1");
  for (double v : s_eps.data) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kValidation, "non-finite covariance entry");
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double a = s_eps(i, j);
      const double b = s_eps(j, i);
      if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
        throw Error(ErrorKind::kValidation, "covariance is not symmetric");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(to_eigen(s_eps), Eigen::EigenvaluesOnly);
  const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-9 * top) {
    throw Error(ErrorKind::kValidation, "covariance is not positive semi-definite");
  }
}

double scan_likelihood_ratio(const ScanModel& model) {
  model.validate();
  const auto d = static_cast<Eigen::Index>(model.u1.size());
  Eigen::VectorXd diff(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    diff(i) = model.u1[static_cast<std::size_t>(i)] - model.u2[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd s = to_eigen(model.s_eps);
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  Eigen::VectorXd values = eig.eigenvalues();
  if (lo <= 0.0 || hi / lo > kScanConditionLimit) {
    values.array() += kScanRidge;
    lo = values.minCoeff();
  }
  if (!(lo > 0.0) || !std::isfinite(lo)) {
    throw Error(ErrorKind::kNumerical, "covariance stays singular after regularisation");
  }
  // Mahalanobis form through the eigenbasis: sum_i (v_i . d)^2 / lambda_i.
  const Eigen::VectorXd projected = eig.eigenvectors().transpose() * diff;
  const double mahalanobis = (projected.array().square() / values.array()).sum();
  const double n1 = static_cast<double>(model.n1);
  const double n2 = static_cast<double>(model.n2);
  const double ratio = (n1 * n2 / (n1 + n2)) * mahalanobis;
  if (!std::isfinite(ratio)) throw Error(ErrorKind::kNumerical, "likelihood ratio overflowed");
  return std::max(0.0, ratio);
}

ScanModel scan_decompose(const SampleMatrix& samples, std::span<const std::uint8_t> second_group) {
  if (second_group.size() != samples.rows()) {
    throw Error(ErrorKind::kInvalidInput, "partition length does not match the sample count");
  }
  const std::size_t d = samples.dim();
  ScanModel model;
  model.u1.assign(d, 0.0);
  model.u2.assign(d, 0.0);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    auto& mean = second_group[i] ? model.u2 : model.u1;
    (second_group[i] ? model.n2 : model.n1) += 1;
    const auto row = samples.row(i);
    for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
  }
  if (model.n1 < 2 || model.n2 < 2) {
    throw Error(ErrorKind::kInsufficientData,
                "each subgroup needs at least 2 samples (got " + std::to_string(model.n1) + " and " +
                    std::to_string(model.n2) + ")");
  }
  for (std::size_t k = 0; k < d; ++k) {
    model.u1[k] /= static_cast<double>(model.n1);
    model.u2[k] /= static_cast<double>(model.n2);
  }
  model.s_eps = SquareMatrix(d);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto& mean = second_group[i] ? model.u2 : model.u1;
    const auto row = samples.row(i);
    for (std::size_t k = 0; k < d; ++k) centered[k] = row[k] - mean[k];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) model.s_eps(a, b) += centered[a] * centered[b];
    }
  }
  const double dof = static_cast<double>(model.total() - 2);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      model.s_eps(a, b) /= dof;
      model.s_eps(b, a) = model.s_eps(a, b);
    }
  }
  return model;
}

}  // namespace gramscan
