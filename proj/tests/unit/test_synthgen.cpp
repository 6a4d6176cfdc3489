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

#include <doctest.h>

#include <cmath>

#include "gramscan/error.hpp"
#include "gramscan/gramian.hpp"
#include "gramscan/store_io.hpp"
#include "gramscan/synthgen.hpp"
#include "helpers.hpp"

using namespace gramscan;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::kInvalidInput;
}

struct Moments {
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
  std::size_t count = 0;
};

// Column moments (each spatial position is one n-vector) over the samples
// of `cls` whose poison bit equals `poison`.
Moments column_moments(const Dataset& d, std::uint32_t cls, bool poison) {
  const std::size_t n = d.n_channels, m = d.spatial;
  Moments out;
  out.mean.assign(n, 0.0);
  out.cov.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < d.size(); ++s) {
    if (d.labels[s] != cls || ((*d.poison)[s] != 0) != poison) continue;
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < n; ++i) out.mean[i] += d.tensors[s](i, k);
    }
    out.count += m;
  }
  for (auto& x : out.mean) x /= static_cast<double>(out.count);
  for (std::size_t s = 0; s < d.size(); ++s) {
    if (d.labels[s] != cls || ((*d.poison)[s] != 0) != poison) continue;
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          out.cov[i][j] += (d.tensors[s](i, k) - out.mean[i]) * (d.tensors[s](j, k) - out.mean[j]);
        }
      }
    }
  }
  for (auto& row : out.cov) {
    for (auto& x : row) x /= static_cast<double>(out.count - 1);
  }
  return out;
}

std::vector<double> class_samples(const Dataset& d, std::uint32_t cls, std::size_t count) {
  std::vector<double> out;
  for (std::size_t s = 0; s < d.size() && count > 0; ++s) {
    if (d.labels[s] != cls) continue;
    out.insert(out.end(), d.tensors[s].values().begin(), d.tensors[s].values().end());
    --count;
  }
  return out;
}

ScenarioSpec small(Scenario s) {
  ScenarioSpec spec;
  spec.scenario = s;
  spec.n_classes = 4;
  spec.samples_per_class = 40;
  spec.n_channels = 4;
  spec.spatial = 8;
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST_CASE("no poison when the fraction is zero") {
  for (auto sc : {Scenario::kMeanShift, Scenario::kEqualMeanDiffCov, Scenario::kNonGaussian,
                  Scenario::kAllToAll}) {
    ScenarioSpec spec = small(sc);
    spec.poison_fraction = 0.0;
    const Dataset d = generate(spec);
    for (auto p : *d.poison) CHECK(p == 0);
  }
}

TEST_CASE("counts, ordering and float32 rounding") {
  ScenarioSpec spec = small(Scenario::kEqualMeanDiffCov);
  spec.target_class = 2;
  spec.poison_fraction = 0.15;
  const Dataset d = generate(spec);
  CHECK(d.size() == 160);
  CHECK(spec.poison_count(2) == 6);
  CHECK(spec.poison_count(1) == 0);
  for (std::size_t s = 0; s < d.size(); ++s) {
    CHECK(d.labels[s] == s / 40);
    const bool want_poison = d.labels[s] == 2 && s % 40 >= 34;
    CHECK(((*d.poison)[s] != 0) == want_poison);
    for (double v : d.tensors[s].values()) REQUIRE(v == static_cast<double>(static_cast<float>(v)));
  }

  ScenarioSpec all = small(Scenario::kAllToAll);
  all.poison_fraction = 0.25;
  const Dataset a = generate(all);
  std::size_t poisoned = 0;
  for (auto p : *a.poison) poisoned += p;
  CHECK(poisoned == 4 * 10);
  for (std::uint32_t c = 0; c < 4; ++c) CHECK(all.is_infected(c));
}

TEST_CASE("generation is deterministic") {
  for (auto sc : {Scenario::kMeanShift, Scenario::kEqualMeanDiffCov, Scenario::kNonGaussian,
                  Scenario::kAllToAll}) {
    const ScenarioSpec spec = small(sc);
    CHECK(generate(spec) == generate(spec));
    CHECK(encode_dump(generate(spec)) == encode_dump(generate(spec)));
  }
  ScenarioSpec other = small(Scenario::kEqualMeanDiffCov);
  const Dataset base = generate(other);
  other.seed += 1;
  CHECK_FALSE(generate(other) == base);
  other.seed -= 1;
  other.stream = 1;
  CHECK_FALSE(generate(other) == base);
}

TEST_CASE("class substreams are independent") {
  ScenarioSpec a = small(Scenario::kEqualMeanDiffCov);
  a.poison_fraction = 0.0;
  ScenarioSpec b = a;
  b.samples_per_class = 90;
  b.n_classes = 7;
  const Dataset da = generate(a), db = generate(b);
  for (std::uint32_t c = 0; c < 4; ++c) {
    CHECK(class_samples(da, c, 40) == class_samples(db, c, 40));
  }
  // Class parameters ignore the sample stream and the counts.
  ScenarioSpec c = b;
  c.stream = 5;
  CHECK(class_model(a, 2).mean == class_model(c, 2).mean);
  CHECK(class_model(a, 2).mixing == class_model(c, 2).mixing);
}

TEST_CASE("clean reference spec") {
  ScenarioSpec spec = small(Scenario::kEqualMeanDiffCov);
  spec.stream = 3;
  const ScenarioSpec ref = clean_reference(spec, 123);
  CHECK(ref.poison_fraction == 0.0);
  CHECK(ref.samples_per_class == 123);
  CHECK(ref.stream == 4);
  CHECK(ref.seed == spec.seed);
  CHECK(clean_reference(spec).samples_per_class == kDefaultReferenceSamples);
}

TEST_CASE("trigger is a rotation times stratified scales in [0.5, 2]") {
  ScenarioSpec spec;
  spec.n_channels = 8;
  spec.seed = 4;
  const SquareMatrix t = trigger_transform(spec, 0);
  const std::size_t n = 8;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += t(k, i) * t(k, j);
      if (i != j) {
        CHECK(std::fabs(dot) < 1e-12);
      } else {
        const double s = std::sqrt(dot);
        const double lo = 0.5 * std::pow(4.0, static_cast<double>(i) / n);
        const double hi = 0.5 * std::pow(4.0, static_cast<double>(i + 1) / n);
        CHECK(s >= lo - 1e-12);
        CHECK(s <= hi + 1e-12);
      }
    }
  }
  const auto shift = trigger_shift(spec, 0);
  double norm = 0.0;
  for (double x : shift) norm += x * x;
  CHECK(std::sqrt(norm) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("S2 subgroups share a mean but not a covariance") {
  ScenarioSpec spec;
  spec.scenario = Scenario::kEqualMeanDiffCov;
  spec.n_classes = 1;
  spec.samples_per_class = 500;
  spec.n_channels = 8;
  spec.spatial = 256;
  spec.seed = 21;
  const Dataset d = generate(spec);
  const Moments clean = column_moments(d, 0, false), poison = column_moments(d, 0, true);
  double mean_gap = 0.0, cov_gap = 0.0, se2 = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    mean_gap += (clean.mean[i] - poison.mean[i]) * (clean.mean[i] - poison.mean[i]);
    se2 += clean.cov[i][i] / clean.count + poison.cov[i][i] / poison.count;
    for (std::size_t j = 0; j < 8; ++j) {
      cov_gap += (clean.cov[i][j] - poison.cov[i][j]) * (clean.cov[i][j] - poison.cov[i][j]);
    }
  }
  mean_gap = std::sqrt(mean_gap);
  CHECK(mean_gap < 0.1);
  CHECK(std::sqrt(cov_gap) > 1.0);
  // Calibration: the first-moment gap stays within 3 standard errors.
  CHECK(mean_gap <= 3.0 * std::sqrt(se2));
}

TEST_CASE("S2 order-one Gram means separate by at least five standard errors") {
  ScenarioSpec spec;
  spec.scenario = Scenario::kEqualMeanDiffCov;
  spec.n_classes = 1;
  spec.samples_per_class = 500;
  spec.n_channels = 8;
  spec.spatial = 64;
  spec.seed = 22;
  const Dataset d = generate(spec);
  const std::size_t dims = triangle_size(8);
  std::vector<double> sum[2], sq[2];
  std::size_t count[2] = {0, 0};
  for (int g = 0; g < 2; ++g) {
    sum[g].assign(dims, 0.0);
    sq[g].assign(dims, 0.0);
  }
  for (std::size_t s = 0; s < d.size(); ++s) {
    const int g = (*d.poison)[s];
    const auto v = vectorize_upper(gram(d.tensors[s], 1));
    for (std::size_t j = 0; j < dims; ++j) {
      sum[g][j] += v[j];
      sq[g][j] += v[j] * v[j];
    }
    ++count[g];
  }
  double gap = 0.0, var = 0.0;
  for (std::size_t j = 0; j < dims; ++j) {
    double mean[2], v[2];
    for (int g = 0; g < 2; ++g) {
      mean[g] = sum[g][j] / count[g];
      v[g] = (sq[g][j] / count[g] - mean[g] * mean[g]) * count[g] / (count[g] - 1);
    }
    gap += (mean[0] - mean[1]) * (mean[0] - mean[1]);
    var += v[0] / count[0] + v[1] / count[1];
  }
  CHECK(std::sqrt(gap) >= 5.0 * std::sqrt(var));
}

TEST_CASE("S1 shifts the poison mean by the trigger vector") {
  ScenarioSpec spec;
  spec.scenario = Scenario::kMeanShift;
  spec.n_classes = 2;
  spec.samples_per_class = 400;
  spec.n_channels = 6;
  spec.spatial = 64;
  spec.seed = 23;
  spec.target_class = 1;
  const Dataset d = generate(spec);
  const Moments clean = column_moments(d, 1, false), poison = column_moments(d, 1, true);
  const auto shift = trigger_shift(spec, 1);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(std::fabs(poison.mean[i] - clean.mean[i] - shift[i]) < 0.15);
  }
}

TEST_CASE("S4 poison in class t follows the trigger of class t-1") {
  ScenarioSpec spec;
  spec.scenario = Scenario::kAllToAll;
  spec.n_classes = 3;
  spec.samples_per_class = 500;
  spec.n_channels = 4;
  spec.spatial = 64;
  spec.seed = 24;
  spec.poison_fraction = 0.2;
  const Dataset d = generate(spec);
  for (std::uint32_t t = 0; t < 3; ++t) {
    const std::uint32_t source = (t + 2) % 3;
    const SquareMatrix tr = trigger_transform(spec, source);
    const SquareMatrix mix = class_model(spec, source).mixing;
    // Expected covariance (T L)(T L)^T.
    SquareMatrix tl(4);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t j = 0; j < 4; ++j) tl(i, j) += tr(i, k) * mix(k, j);
      }
    }
    const Moments poison = column_moments(d, t, true);
    const auto mean = class_model(spec, t).mean;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::fabs(poison.mean[i] - mean[i]) < 0.1);
      for (std::size_t j = 0; j < 4; ++j) {
        double want = 0.0;
        for (std::size_t k = 0; k < 4; ++k) want += tl(i, k) * tl(j, k);
        num += (poison.cov[i][j] - want) * (poison.cov[i][j] - want);
        den += want * want;
      }
    }
    CHECK(std::sqrt(num / den) < 0.05);
  }
}

TEST_CASE("S3 clean columns are skewed, S2 clean columns are not") {
  auto max_skew = [](Scenario sc) {
    ScenarioSpec spec;
    spec.scenario = sc;
    spec.n_classes = 1;
    spec.samples_per_class = 300;
    spec.n_channels = 4;
    spec.spatial = 64;
    spec.seed = 25;
    spec.poison_fraction = 0.0;
    const Dataset d = generate(spec);
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      double s1 = 0, s2 = 0, s3 = 0, n = 0;
      for (const auto& t : d.tensors) {
        for (std::size_t k = 0; k < 64; ++k) {
          s1 += t(i, k);
          n += 1;
        }
      }
      const double mu = s1 / n;
      for (const auto& t : d.tensors) {
        for (std::size_t k = 0; k < 64; ++k) {
          const double c = t(i, k) - mu;
          s2 += c * c;
          s3 += c * c * c;
        }
      }
      worst = std::max(worst, std::fabs((s3 / n) / std::pow(s2 / n, 1.5)));
    }
    return worst;
  };
  CHECK(max_skew(Scenario::kNonGaussian) > 0.2);
  CHECK(max_skew(Scenario::kEqualMeanDiffCov) < 0.05);
}

TEST_CASE("scenario validation and names") {
  ScenarioSpec spec;
  spec.poison_fraction = 1.0;
  CHECK(kind_of([&] { generate(spec); }) == ErrorKind::kValidation);
  spec.poison_fraction = -0.1;
  CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::kValidation);
  spec = ScenarioSpec{};
  spec.target_class = 10;
  CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::kValidation);
  spec = ScenarioSpec{};
  spec.spatial = 0;
  CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::kValidation);

  CHECK(parse_scenario("S1") == Scenario::kMeanShift);
  CHECK(parse_scenario("S2_equal_mean_diff_cov") == Scenario::kEqualMeanDiffCov);
  CHECK(parse_scenario("S3") == Scenario::kNonGaussian);
  CHECK(parse_scenario("S4_all_to_all") == Scenario::kAllToAll);
  CHECK(kind_of([] { parse_scenario("S5"); }) == ErrorKind::kValidation);
}
