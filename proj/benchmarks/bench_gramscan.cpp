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

#include <benchmark/benchmark.h>

#include "gramscan/classscan.hpp"
#include "gramscan/deviation.hpp"
#include "gramscan/gramian.hpp"
#include "gramscan/philox.hpp"

using namespace gramscan;

namespace {

FeatureTensor random_tensor(std::size_t n, std::size_t m, std::uint64_t substream) {
  RandomStream rng(7, StreamPurpose::kTest, substream);
  std::vector<double> v(n * m);
  for (auto& x : v) x = rng.normal();
  return FeatureTensor(n, m, std::move(v));
}

ClassStats stats_for(std::size_t n, int order_bound) {
  std::vector<GramianVector> fit;
  for (std::uint64_t i = 0; i < 200; ++i) fit.push_back(gramian_vector(random_tensor(n, 64, i), order_bound));
  return fit_class_stats(fit, 0);
}

void BM_Gram(benchmark::State& state) {
  const auto v = random_tensor(16, 64, 1);
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gram(v, p));
}
BENCHMARK(BM_Gram)->DenseRange(1, 9);

void BM_GramianVector(benchmark::State& state) {
  const auto v = random_tensor(16, 64, 2);
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gramian_vector(v, p));
  state.counters["dims"] = static_cast<double>(gramian_length(16, static_cast<std::size_t>(p)));
}
BENCHMARK(BM_GramianVector)->DenseRange(1, 9);

// Online path: Gramian features of one sample plus its deviation score.
// n = 16 gives 544 dimensions at P = 4, n = 15 gives 480.
void BM_ScoreSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto stats = stats_for(n, 4);
  Threshold t;
  t.value = 0.1;
  const auto v = random_tensor(n, 64, 999);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_sample(gramian_vector(v, 4), 0, stats, t));
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["dims"] = static_cast<double>(stats.size());
}
BENCHMARK(BM_ScoreSample)->Arg(15)->Arg(16);

void BM_Deviation(benchmark::State& state) {
  const auto stats = stats_for(16, 4);
  const auto g = gramian_vector(random_tensor(16, 64, 1000), 4);
  for (auto _ : state) benchmark::DoNotOptimize(deviation_value(g.values(), stats.medians, stats.mads, stats.scale_k));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Deviation);

void BM_Rmmd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SampleMatrix p, q;
  for (std::uint64_t i = 0; i < n; ++i) {
    p.append(gramian_vector(random_tensor(8, 32, i), 4).values());
    q.append(gramian_vector(random_tensor(8, 32, 5000 + i), 4).values());
  }
  RmmdConfig cfg;
  cfg.kernel.bandwidth_beta = median_bandwidth(p);
  for (auto _ : state) benchmark::DoNotOptimize(rmmd(p, q, cfg));
}
BENCHMARK(BM_Rmmd)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
