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

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gramscan/classscan.hpp"
#include "gramscan/deviation.hpp"

namespace gramscan {

/// Bumped whenever a report field is renamed or removed.
inline constexpr int kReportSchemaVersion = 1;

/// One JSON-lines record: {"index", "class", "deviation", "flagged"}.
nlohmann::json deviation_record(const DeviationReport& report);

/// Scan-style report. `statistic_name` is "R_t" for the RMMD scan and "L"
/// for the likelihood-ratio baseline; the anomaly index is written as
/// "R_star" / "L_star" respectively.
nlohmann::json scan_report_json(const ScanReport& report, const std::string& kind,
                                const std::string& statistic_name, const nlohmann::json& config);

nlohmann::json rmmd_config_json(const RmmdConfig& config);

}  // namespace gramscan
