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
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gramscan/dataset.hpp"
#include "gramscan/deviation.hpp"

namespace gramscan {

/// Feature dump (.bfd), all integers and floats little-endian:
///
///   offset 0   char[4]  "BFDX"
///          4   u32      version = 1
///          8   u64      n_samples
///         16   u32      n_channels
///         20   u32      spatial
///         24   u32      flags (bit0: poison ground truth present)
///         28   u32[n_samples]                      predicted labels
///              u8[n_samples]                       poison bits, if flagged
///              f32[n_samples][n_channels][spatial] tensors, row-major
inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderSize = 28;
inline constexpr std::uint32_t kDumpFlagPoison = 1u;

/// Fitted statistics (.bstat):
///
///   offset 0   char[4]  "BSTA"
///          4   u32      version = 1
///          8   u32      n_classes
///         12   u32      n_channels
///         16   u32      order_bound
///         20   f64      scale_k
///         28   per class: u32 class_id, u32 n_fit, f64 medians[L], f64 mads[L]
///              with L = n(n+1)P/2
///              threshold: u8 present, f64 value, f64 percentile, u32 iterations,
///              u64 seed
///              if present == 2: f64 per-class boundaries, in class order
///
/// `present` is 0 (no threshold), 1 (global boundary) or 2 (per-class).
inline constexpr std::uint32_t kStatsVersion = 1;
inline constexpr std::size_t kStatsHeaderSize = 28;

struct StatsFile {
  std::uint32_t n_channels = 0;
  std::uint32_t order_bound = 0;
  double scale_k = kDefaultScaleK;
  std::vector<ClassStats> classes;
  std::optional<Threshold> threshold;

  const ClassStats* find(ClassId class_id) const;
  friend bool operator==(const StatsFile&, const StatsFile&) = default;
};

std::vector<std::uint8_t> encode_dump(const Dataset& data);
Dataset decode_dump(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_stats(const StatsFile& stats);
StatsFile decode_stats(std::span<const std::uint8_t> bytes);

Dataset read_dump(const std::filesystem::path& path);
void write_dump(const Dataset& data, const std::filesystem::path& path);

StatsFile read_stats(const std::filesystem::path& path);
void write_stats(const StatsFile& stats, const std::filesystem::path& path);

/// Whole-file helpers; writes go to a sibling temp file that is renamed
/// into place.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace gramscan
