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

#include "gramscan/store_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <climits>
#include <cstdint>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <string>
#include <unistd.h>

#include "gramscan/error.hpp"
#include "gramscan/gramian.hpp"

namespace gramscan {

namespace {

constexpr char kDumpMagic[4] = {'B', 'F', 'D', 'X'};
constexpr char kStatsMagic[4] = {'B', 'S', 'T', 'A'};
constexpr std::size_t kThresholdRecordSize = 1 + 8 + 8 + 4 + 8;

template <typename T>
T from_le(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    const T le = from_le(value);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&le);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_magic(const char (&magic)[4]) { bytes_.insert(bytes_.end(), magic, magic + 4); }
  void reserve(std::size_t n) { bytes_.reserve(n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t remaining() const noexcept { return bytes_.size() - offset_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorKind::kTruncated, std::string("file ends inside ") + what, bytes_.size());
    }
  }

  template <typename T>
  T get(const char* what) {
    require(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return from_le(value);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

void check_magic(std::span<const std::uint8_t> bytes, const char (&magic)[4], const char* format) {
  if (bytes.size() < 4) {
    throw Error(ErrorKind::kTruncated, std::string(format) + " file shorter than its magic", bytes.size());
  }
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, std::string("not a ") + format + " file", 0);
  }
}

bool mul_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return __builtin_mul_overflow(a, b, &out);
}
bool add_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return __builtin_add_overflow(a, b, &out);
}

}  // namespace

const ClassStats* StatsFile::find(ClassId class_id) const {
  for (const auto& c : classes) {
    if (c.class_id == class_id) return &c;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_dump(const Dataset& data) {
  data.validate();
  ByteWriter w;
  const std::size_t per_sample = static_cast<std::size_t>(data.n_channels) * data.spatial;
  w.reserve(kDumpHeaderSize + data.size() * (5 + 4 * per_sample));
  w.put_magic(kDumpMagic);
  w.put<std::uint32_t>(kDumpVersion);
  w.put<std::uint64_t>(data.size());
  w.put<std::uint32_t>(data.n_channels);
  w.put<std::uint32_t>(data.spatial);
  w.put<std::uint32_t>(data.poison ? kDumpFlagPoison : 0u);
  for (auto label : data.labels) w.put<std::uint32_t>(label);
  if (data.poison) {
    for (auto bit : *data.poison) w.put<std::uint8_t>(bit);
  }
  for (const auto& t : data.tensors) {
    for (double v : t.values()) w.put<float>(static_cast<float>(v));
  }
  return w.take();
}

Dataset decode_dump(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kDumpMagic, "feature dump");
  ByteReader r(bytes);
  r.get<std::uint32_t>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kDumpVersion) {
    throw Error(ErrorKind::kVersionMismatch,
                "feature dump version " + std::to_string(version) + " is not supported", 4);
  }
  const auto n_samples = r.get<std::uint64_t>("header");
  Dataset data;
  data.n_channels = r.get<std::uint32_t>("header");
  data.spatial = r.get<std::uint32_t>("header");
  const auto flags = r.get<std::uint32_t>("header");
  if ((flags & ~kDumpFlagPoison) != 0) {
    throw Error(ErrorKind::kValidation, "unknown feature dump flags", 24);
  }
  const bool has_poison = (flags & kDumpFlagPoison) != 0;
  if (n_samples > 0 && (data.n_channels == 0 || data.spatial == 0)) {
    throw Error(ErrorKind::kValidation, "feature dump declares an empty tensor shape", 16);
  }

  std::uint64_t per_sample = 0, payload = 0, total = 0, labels = 0;
  if (mul_overflows(data.n_channels, data.spatial, per_sample) ||
      mul_overflows(per_sample, 4, per_sample) ||
      mul_overflows(per_sample, n_samples, payload) || mul_overflows(n_samples, 4, labels) ||
      add_overflows(kDumpHeaderSize, labels, total) ||
      add_overflows(total, has_poison ? n_samples : 0, total) ||
      add_overflows(total, payload, total)) {
    throw Error(ErrorKind::kLengthMismatch, "feature dump header implies an impossible size", 8);
  }
  if (bytes.size() < total) {
    throw Error(ErrorKind::kTruncated,
                "feature dump holds " + std::to_string(bytes.size()) + " bytes, header implies " +
                    std::to_string(total),
                bytes.size());
  }
  if (bytes.size() > total) {
    throw Error(ErrorKind::kLengthMismatch,
                "feature dump has " + std::to_string(bytes.size() - total) + " trailing bytes", total);
  }

  const auto count = static_cast<std::size_t>(n_samples);
  data.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) data.labels.push_back(r.get<std::uint32_t>("labels"));
  if (has_poison) {
    data.poison.emplace();
    data.poison->reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = r.offset();
      const auto bit = r.get<std::uint8_t>("poison bits");
      if (bit > 1) throw Error(ErrorKind::kValidation, "poison bit must be 0 or 1", at);
      data.poison->push_back(bit);
    }
  }
  const std::size_t values = static_cast<std::size_t>(data.n_channels) * data.spatial;
  data.tensors.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(values);
    for (std::size_t k = 0; k < values; ++k) {
      const std::size_t at = r.offset();
      const float f = r.get<float>("tensor payload");
      if (!std::isfinite(f)) {
        throw Error(ErrorKind::kInvalidInput, "non-finite activation in feature dump", at);
      }
      v[k] = f;
    }
    data.tensors.emplace_back(data.n_channels, data.spatial, std::move(v));
  }
  return data;
}

std::vector<std::uint8_t> encode_stats(const StatsFile& stats) {
  const std::size_t len = gramian_length(stats.n_channels, stats.order_bound);
  std::set<ClassId> seen;
  for (const auto& c : stats.classes) {
    c.validate();
    if (c.n_channels != stats.n_channels || c.order_bound != stats.order_bound ||
        c.scale_k != stats.scale_k) {
      throw Error(ErrorKind::kValidation, "class statistics disagree with the file header");
    }
    if (!seen.insert(c.class_id).second) {
      throw Error(ErrorKind::kValidation, "duplicate class id in statistics");
    }
  }
  ByteWriter w;
  w.reserve(kStatsHeaderSize + stats.classes.size() * (8 + 16 * len) + kThresholdRecordSize);
  w.put_magic(kStatsMagic);
  w.put<std::uint32_t>(kStatsVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(stats.classes.size()));
  w.put<std::uint32_t>(stats.n_channels);
  w.put<std::uint32_t>(stats.order_bound);
  w.put<double>(stats.scale_k);
  for (const auto& c : stats.classes) {
    w.put<std::uint32_t>(c.class_id);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(c.n_fit));
    for (double m : c.medians) w.put<double>(m);
    for (double m : c.mads) w.put<double>(m);
  }
  const Threshold none;
  const Threshold& t = stats.threshold ? *stats.threshold : none;
  const std::uint8_t present = !stats.threshold ? 0 : (t.per_class ? 2 : 1);
  w.put<std::uint8_t>(present);
  w.put<double>(stats.threshold ? t.value : 0.0);
  w.put<double>(stats.threshold ? t.percentile : 0.0);
  w.put<std::uint32_t>(stats.threshold ? t.iterations : 0u);
  w.put<std::uint64_t>(stats.threshold ? t.seed : 0u);
  if (present == 2) {
    for (const auto& c : stats.classes) {
      const auto it = t.class_values.find(c.class_id);
      if (it == t.class_values.end()) {
        throw Error(ErrorKind::kValidation, "per-class threshold missing for class " +
                                                std::to_string(c.class_id));
      }
      w.put<double>(it->second);
    }
  }
  return w.take();
}

StatsFile decode_stats(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kStatsMagic, "statistics");
  ByteReader r(bytes);
  r.get<std::uint32_t>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kStatsVersion) {
    throw Error(ErrorKind::kVersionMismatch,
                "statistics version " + std::to_string(version) + " is not supported", 4);
  }
  StatsFile stats;
  const auto n_classes = r.get<std::uint32_t>("header");
  stats.n_channels = r.get<std::uint32_t>("header");
  stats.order_bound = r.get<std::uint32_t>("header");
  stats.scale_k = r.get<double>("header");
  if (stats.n_channels == 0 || stats.order_bound == 0) {
    throw Error(ErrorKind::kValidation, "statistics declare n = 0 or P = 0", 12);
  }
  if (!(stats.scale_k > 0.0) || !std::isfinite(stats.scale_k)) {
    throw Error(ErrorKind::kValidation, "scale factor k must be positive", 20);
  }
  std::uint64_t len = 0, record = 0, body = 0;
  if (mul_overflows(static_cast<std::uint64_t>(stats.n_channels) + 1, stats.n_channels, len) ||
      mul_overflows(len / 2, stats.order_bound, len) || mul_overflows(len, 16, record) ||
      add_overflows(record, 8, record) || mul_overflows(record, n_classes, body)) {
    throw Error(ErrorKind::kLengthMismatch, "statistics header implies an impossible size", 8);
  }
  r.require(static_cast<std::size_t>(std::min<std::uint64_t>(body, SIZE_MAX)), "class records");

  std::set<ClassId> seen;
  stats.classes.reserve(n_classes);
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    const std::size_t at = r.offset();
    ClassStats cs;
    cs.class_id = r.get<std::uint32_t>("class record");
    cs.n_fit = r.get<std::uint32_t>("class record");
    cs.n_channels = stats.n_channels;
    cs.order_bound = stats.order_bound;
    cs.scale_k = stats.scale_k;
    if (!seen.insert(cs.class_id).second) {
      throw Error(ErrorKind::kValidation, "duplicate class id in statistics", at);
    }
    cs.medians.resize(static_cast<std::size_t>(len));
    cs.mads.resize(static_cast<std::size_t>(len));
    for (auto& m : cs.medians) {
      const std::size_t pos = r.offset();
      m = r.get<double>("medians");
      if (!std::isfinite(m)) throw Error(ErrorKind::kValidation, "non-finite median", pos);
    }
    for (auto& m : cs.mads) {
      const std::size_t pos = r.offset();
      m = r.get<double>("MADs");
      if (!(m >= 0.0) || !std::isfinite(m)) {
        throw Error(ErrorKind::kValidation, "MAD must be finite and non-negative", pos);
      }
    }
    stats.classes.push_back(std::move(cs));
  }

  const std::size_t footer = r.offset();
  const auto present = r.get<std::uint8_t>("threshold record");
  const auto value = r.get<double>("threshold record");
  const auto percentile = r.get<double>("threshold record");
  const auto iterations = r.get<std::uint32_t>("threshold record");
  const auto seed = r.get<std::uint64_t>("threshold record");
  if (present > 2) throw Error(ErrorKind::kValidation, "unknown threshold record tag", footer);
  if (present != 0) {
    Threshold t;
    t.value = value;
    t.percentile = percentile;
    t.iterations = iterations;
    t.seed = seed;
    t.per_class = present == 2;
    if (!(value >= 0.0) || !std::isfinite(value) || !(percentile > 0.0 && percentile < 100.0)) {
      throw Error(ErrorKind::kValidation, "threshold record out of range", footer);
    }
    if (t.per_class) {
      for (const auto& c : stats.classes) {
        const std::size_t pos = r.offset();
        const auto v = r.get<double>("per-class thresholds");
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw Error(ErrorKind::kValidation, "per-class threshold out of range", pos);
        }
        t.class_values[c.class_id] = v;
      }
    }
    stats.threshold = std::move(t);
  }
  if (r.remaining() != 0) {
    throw Error(ErrorKind::kLengthMismatch,
                "statistics file has " + std::to_string(r.remaining()) + " trailing bytes", r.offset());
  }
  return stats;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for reading");
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size < 0) throw Error(ErrorKind::kIo, "cannot determine size of '" + path.string() + "'");
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (!bytes.empty() && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw Error(ErrorKind::kIo, "short read from '" + path.string() + "'");
  }
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot move output into '" + path.string() + "'");
  }
}

Dataset read_dump(const std::filesystem::path& path) { return decode_dump(read_file(path)); }

void write_dump(const Dataset& data, const std::filesystem::path& path) {
  write_file_atomic(path, encode_dump(data));
}

StatsFile read_stats(const std::filesystem::path& path) { return decode_stats(read_file(path)); }

void write_stats(const StatsFile& stats, const std::filesystem::path& path) {
  write_file_atomic(path, encode_stats(stats));
}

}  // namespace gramscan
