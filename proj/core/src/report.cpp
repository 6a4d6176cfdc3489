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

#include "gramscan/report.hpp"

namespace gramscan {

nlohmann::json deviation_record(const DeviationReport& report) {
  return nlohmann::json{{"index", report.sample_index},
                        {"class", report.predicted_class},
                        {"deviation", report.deviation},
                        {"flagged", report.flagged}};
}

nlohmann::json rmmd_config_json(const RmmdConfig& config) {
  nlohmann::json kernel{{"kind", to_string(config.kernel.kind)}};
  if (config.kernel.bandwidth_beta) {
    kernel["beta"] = *config.kernel.bandwidth_beta;
  } else if (config.kernel.kind == KernelKind::kGaussian) {
    kernel["beta"] = "median_heuristic";
  }
  return nlohmann::json{{"kernel", kernel},
                        {"lambda_p", config.lambda_p},
                        {"lambda_q", config.lambda_q},
                        {"estimator", "biased"}};
}

nlohmann::json scan_report_json(const ScanReport& report, const std::string& kind,
                                const std::string& statistic_name, const nlohmann::json& config) {
  const std::string index_name = statistic_name == "R_t" ? "R_star" : statistic_name + "_star";
  nlohmann::json classes = nlohmann::json::array();
  nlohmann::json raw = nlohmann::json::array();
  for (const auto& c : report.per_class) {
    nlohmann::json entry{{"class_id", c.class_id},
                         {statistic_name, c.statistic},
                         {index_name, c.anomaly_index},
                         {"infected", c.infected},
                         {"n_clean", c.n_clean},
                         {"n_suspect", c.n_suspect}};
    if (c.bandwidth > 0.0) entry["beta"] = c.bandwidth;
    classes.push_back(std::move(entry));
    raw.push_back(c.statistic);
  }
  nlohmann::json infected = nlohmann::json::array();
  for (auto id : report.infected_classes()) infected.push_back(id);
  return nlohmann::json{{"schema_version", kReportSchemaVersion},
                        {"report", kind},
                        {"statistic", statistic_name},
                        {"eta", report.eta},
                        {"decision_threshold", report.decision_threshold},
                        {"median", report.median_statistic},
                        {"mad", report.mad_statistic},
                        {"classes", classes},
                        {"raw_statistics", raw},
                        {"infected", infected},
                        {"config", config}};
}

}  // namespace gramscan
