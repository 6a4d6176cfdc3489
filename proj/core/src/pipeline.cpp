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

#include "gramscan/pipeline.hpp"

#include <set>
#include <string>

#include "gramscan/error.hpp"
#include "gramscan/parallel.hpp"

namespace gramscan {

std::vector<GramianVector> compute_gramians(const Dataset& data, int order_bound, unsigned threads) {
  std::vector<GramianVector> out(data.size());
  parallel_for(data.size(), threads,
               [&](std::size_t i) { out[i] = gramian_vector(data.tensors[i], order_bound); });
  return out;
}

ClassGramians group_by_class(std::span<const GramianVector> gramians,
                             std::span<const std::uint32_t> labels) {
  if (gramians.size() != labels.size()) {
    throw Error(ErrorKind::kInvalidInput, "label count does not match the sample count");
  }
  ClassGramians groups;
  for (std::size_t i = 0; i < gramians.size(); ++i) groups[labels[i]].push_back(gramians[i]);
  return groups;
}

StatsFile fit_statistics(const ClassGramians& clean, const PipelineConfig& config) {
  if (clean.empty()) throw Error(ErrorKind::kInsufficientData, "no clean samples to fit");
  StatsFile stats;
  stats.n_channels = static_cast<std::uint32_t>(clean.begin()->second.front().channels());
  stats.order_bound = static_cast<std::uint32_t>(config.order_bound);
  stats.scale_k = config.scale_k;
  std::vector<std::pair<ClassId, const std::vector<GramianVector>*>> items;
  for (const auto& [id, g] : clean) items.emplace_back(id, &g);
  stats.classes.resize(items.size());
  parallel_for(items.size(), config.threads, [&](std::size_t i) {
    stats.classes[i] = fit_class_stats(*items[i].second, items[i].first, config.scale_k);
  });
  BootstrapConfig boot;
  boot.iterations = config.iterations;
  boot.percentile = config.percentile;
  boot.scale_k = config.scale_k;
  boot.seed = config.seed;
  boot.per_class = config.per_class_threshold;
  stats.threshold = bootstrap_threshold(clean, boot);
  return stats;
}

StatsFile fit_statistics(const Dataset& clean, const PipelineConfig& config) {
  clean.validate();
  const auto gramians = compute_gramians(clean, config.order_bound, config.threads);
  return fit_statistics(group_by_class(gramians, clean.labels), config);
}

std::vector<DeviationReport> score_gramians(std::span<const GramianVector> gramians,
                                            std::span<const std::uint32_t> labels,
                                            const StatsFile& stats, unsigned threads) {
  if (gramians.size() != labels.size()) {
    throw Error(ErrorKind::kInvalidInput, "label count does not match the sample count");
  }
  if (!stats.threshold) {
    throw Error(ErrorKind::kValidation, "statistics carry no detection threshold");
  }
  std::vector<const ClassStats*> lookup(gramians.size());
  for (std::size_t i = 0; i < gramians.size(); ++i) {
    lookup[i] = stats.find(labels[i]);
    if (lookup[i] == nullptr) {
      throw Error(ErrorKind::kValidation,
                  "sample " + std::to_string(i) + " is labelled " + std::to_string(labels[i]) +
                      ", a class without fitted statistics");
    }
  }
  std::vector<DeviationReport> out(gramians.size());
  parallel_for(gramians.size(), threads, [&](std::size_t i) {
    out[i] = score_sample(gramians[i], i, *lookup[i], *stats.threshold);
  });
  return out;
}

ScanReport scan_gramians(std::span<const GramianVector> gramians,
                         std::span<const std::uint32_t> labels,
                         std::span<const DeviationReport> reports, const RmmdConfig& config,
                         unsigned threads) {
  if (gramians.size() != labels.size() || reports.size() != labels.size()) {
    throw Error(ErrorKind::kInvalidInput, "scan inputs disagree in sample count");
  }
  std::map<ClassId, ClassSubgroups> groups;
  for (std::size_t i = 0; i < gramians.size(); ++i) {
    auto& g = groups[labels[i]];
    (reports[i].flagged ? g.suspect : g.clean).append(gramians[i].values());
  }
  return scan_classes(groups, config, threads);
}

std::vector<double> channel_means(const FeatureTensor& v) {
  std::vector<double> out(v.channels());
  for (std::size_t c = 0; c < v.channels(); ++c) {
    double acc = 0.0;
    for (double x : v.row(c)) acc += x;
    out[c] = acc / static_cast<double>(v.spatial());
  }
  return out;
}

ScanReport baseline_scan(const Dataset& data, std::span<const std::uint8_t> suspect) {
  data.validate();
  if (suspect.size() != data.size()) {
    throw Error(ErrorKind::kInvalidInput, "partition length does not match the sample count");
  }
  std::map<ClassId, std::pair<SampleMatrix, std::vector<std::uint8_t>>> per_class;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& [samples, part] = per_class[data.labels[i]];
    samples.append(channel_means(data.tensors[i]));
    part.push_back(suspect[i] ? 1 : 0);
  }
  std::vector<ClassScanResult> results;
  for (const auto& [id, entry] : per_class) {
    const auto& [samples, part] = entry;
    ClassScanResult r;
    r.class_id = id;
    for (auto b : part) (b ? r.n_suspect : r.n_clean) += 1;
    if (r.n_clean >= 2 && r.n_suspect >= 2) {
      r.statistic = scan_likelihood_ratio(scan_decompose(samples, part));
    }
    results.push_back(r);
  }
  RmmdConfig unused;
  return rank_classes(std::move(results), unused);
}

std::vector<std::uint8_t> flags_of(std::span<const DeviationReport> reports) {
  std::vector<std::uint8_t> out(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) out[i] = reports[i].flagged ? 1 : 0;
  return out;
}

}  // namespace gramscan
