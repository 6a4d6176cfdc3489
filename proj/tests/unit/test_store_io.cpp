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

#include <openssl/evp.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "gramscan/error.hpp"
#include "gramscan/gramian.hpp"
#include "gramscan/store_io.hpp"
#include "gramscan/synthgen.hpp"
#include "helpers.hpp"

using namespace gramscan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    auto r = RandomStream(static_cast<std::uint64_t>(::getpid()), StreamPurpose::kTest, 999);
    path = fs::temp_directory_path() / ("gramscan_io_" + std::to_string(r.next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

Dataset random_dump(std::uint32_t n, std::uint32_t m, std::size_t count, bool poison,
                    std::uint32_t seed = 1) {
  auto r = testing::rng(seed);
  Dataset d;
  d.n_channels = n;
  d.spatial = m;
  if (poison) d.poison.emplace();
  for (std::size_t i = 0; i < count; ++i) {
    auto v = testing::normals(r, n * m);
    for (auto& x : v) x = static_cast<float>(x);
    d.tensors.emplace_back(n, m, std::move(v));
    d.labels.push_back(static_cast<std::uint32_t>(r.below(5)));
    if (poison) d.poison->push_back(static_cast<std::uint8_t>(r.below(2)));
  }
  return d;
}

StatsFile random_stats(int present, std::uint32_t seed = 2) {
  auto r = testing::rng(seed);
  StatsFile s;
  s.n_channels = 3;
  s.order_bound = 2;
  s.scale_k = 10.0;
  const std::size_t len = gramian_length(3, 2);
  for (ClassId c : {0u, 3u, 7u}) {
    ClassStats cs;
    cs.class_id = c;
    cs.n_channels = 3;
    cs.order_bound = 2;
    cs.scale_k = 10.0;
    cs.n_fit = 40 + c;
    cs.medians = testing::normals(r, len);
    for (std::size_t j = 0; j < len; ++j) cs.mads.push_back(std::fabs(r.normal()));
    s.classes.push_back(cs);
  }
  if (present > 0) {
    Threshold t;
    t.value = 0.125;
    t.percentile = 95.0;
    t.iterations = 5;
    t.seed = 0xdeadbeefcafeULL;
    t.per_class = present == 2;
    if (t.per_class) {
      t.class_values = {{0, 0.01}, {3, 0.02}, {7, 0.5}};
    }
    s.threshold = t;
  }
  return s;
}

std::string sha256(const std::vector<std::uint8_t>& bytes) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), out, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[out[i] >> 4];
    s += hex[out[i] & 15];
  }
  return s;
}

struct Failure {
  ErrorKind kind;
  std::optional<std::uint64_t> offset;
};

template <typename F>
std::optional<Failure> failure_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return Failure{e.kind(), e.offset()};
  }
  return std::nullopt;
}

template <typename T>
void put(std::vector<std::uint8_t>& bytes, std::size_t at, T value) {
  std::memcpy(bytes.data() + at, &value, sizeof(T));
}

}  // namespace

TEST_CASE("empty dump is 28 bytes and round-trips") {
  Dataset empty;
  const auto bytes = encode_dump(empty);
  CHECK(bytes.size() == 28);
  CHECK(std::memcmp(bytes.data(), "BFDX", 4) == 0);
  CHECK(decode_dump(bytes) == empty);
}

TEST_CASE("one-sample dump length and layout") {
  Dataset d;
  d.n_channels = 2;
  d.spatial = 3;
  d.tensors.emplace_back(2, 3, std::vector<double>{1, 2, 3, 4, 5, -6.5});
  d.labels = {9};
  const auto bytes = encode_dump(d);
  CHECK(bytes.size() == 56);
  std::uint32_t version, channels, spatial, flags, label;
  std::uint64_t n;
  float last;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&n, bytes.data() + 8, 8);
  std::memcpy(&channels, bytes.data() + 16, 4);
  std::memcpy(&spatial, bytes.data() + 20, 4);
  std::memcpy(&flags, bytes.data() + 24, 4);
  std::memcpy(&label, bytes.data() + 28, 4);
  std::memcpy(&last, bytes.data() + 52, 4);
  CHECK(version == 1);
  CHECK(n == 1);
  CHECK(channels == 2);
  CHECK(spatial == 3);
  CHECK(flags == 0);
  CHECK(label == 9);
  CHECK(last == -6.5f);
  CHECK(decode_dump(bytes) == d);
}

TEST_CASE("dump length formula with poison bits") {
  const Dataset d = random_dump(3, 5, 17, true);
  CHECK(encode_dump(d).size() == 28 + 4 * 17 + 17 + 4 * 17 * 3 * 5);
  CHECK(decode_dump(encode_dump(d)) == d);
  const Dataset plain = random_dump(3, 5, 17, false);
  CHECK(encode_dump(plain).size() == 28 + 4 * 17 + 4 * 17 * 3 * 5);
  CHECK(decode_dump(encode_dump(plain)) == plain);
}

TEST_CASE("files round-trip and hash identically") {
  TempDir tmp;
  const Dataset d = random_dump(4, 6, 100, true, 3);
  write_dump(d, tmp.path / "a.bfd");
  write_dump(d, tmp.path / "b.bfd");
  const auto a = read_file(tmp.path / "a.bfd");
  const auto b = read_file(tmp.path / "b.bfd");
  CHECK(sha256(a) == sha256(b));
  CHECK(sha256(a).size() == 64);
  CHECK(read_dump(tmp.path / "a.bfd") == d);
  CHECK(encode_dump(read_dump(tmp.path / "a.bfd")) == a);

  // Overwrite in place, no temp files left behind.
  write_dump(random_dump(2, 2, 3, false), tmp.path / "a.bfd");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(tmp.path)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 2);

  for (int present : {0, 1, 2}) {
    const StatsFile s = random_stats(present);
    write_stats(s, tmp.path / "s.bstat");
    CHECK(read_stats(tmp.path / "s.bstat") == s);
    CHECK(encode_stats(read_stats(tmp.path / "s.bstat")) == encode_stats(s));
  }
  CHECK(failure_of([&] { read_dump(tmp.path / "missing.bfd"); })->kind == ErrorKind::kIo);
  CHECK(failure_of([&] { write_dump(d, tmp.path / "no" / "dir.bfd"); })->kind == ErrorKind::kIo);
}

TEST_CASE("stats layout") {
  const StatsFile s = random_stats(1);
  const auto bytes = encode_stats(s);
  const std::size_t len = gramian_length(3, 2);
  CHECK(bytes.size() == 28 + 3 * (8 + 16 * len) + 29);
  CHECK(std::memcmp(bytes.data(), "BSTA", 4) == 0);
  double k;
  std::uint32_t classes, first_id;
  std::memcpy(&classes, bytes.data() + 8, 4);
  std::memcpy(&k, bytes.data() + 20, 8);
  std::memcpy(&first_id, bytes.data() + 28, 4);
  CHECK(classes == 3);
  CHECK(k == 10.0);
  CHECK(first_id == 0);
  CHECK(bytes[28 + 3 * (8 + 16 * len)] == 1);
  CHECK(encode_stats(random_stats(2)).size() == bytes.size() + 3 * 8);
  CHECK(encode_stats(random_stats(0)).size() == bytes.size());
}

TEST_CASE("header errors are distinct and carry offsets") {
  const auto good = encode_dump(random_dump(2, 3, 4, true));

  auto bad_magic = good;
  bad_magic[1] = 'X';
  auto f = failure_of([&] { decode_dump(bad_magic); });
  REQUIRE(f);
  CHECK(f->kind == ErrorKind::kBadMagic);
  CHECK(f->offset == 0u);
  CHECK(failure_of([&] { decode_stats(good); })->kind == ErrorKind::kBadMagic);

  auto bad_version = good;
  put<std::uint32_t>(bad_version, 4, 2);
  f = failure_of([&] { decode_dump(bad_version); });
  CHECK(f->kind == ErrorKind::kVersionMismatch);
  CHECK(f->offset == 4u);

  auto longer = good;
  longer.push_back(0);
  f = failure_of([&] { decode_dump(longer); });
  CHECK(f->kind == ErrorKind::kLengthMismatch);
  CHECK(f->offset == good.size());

  const std::vector<std::uint8_t> shorter(good.begin(), good.end() - 1);
  f = failure_of([&] { decode_dump(shorter); });
  CHECK(f->kind == ErrorKind::kTruncated);

  auto huge = good;
  put<std::uint64_t>(huge, 8, std::numeric_limits<std::uint64_t>::max() / 2);
  f = failure_of([&] { decode_dump(huge); });
  CHECK(f->kind == ErrorKind::kLengthMismatch);

  auto flags = good;
  put<std::uint32_t>(flags, 24, 6);
  CHECK(failure_of([&] { decode_dump(flags); })->kind == ErrorKind::kValidation);

  auto poison = good;
  poison[28 + 4 * 4 + 2] = 7;
  f = failure_of([&] { decode_dump(poison); });
  CHECK(f->kind == ErrorKind::kValidation);
  CHECK(f->offset == 28u + 16u + 2u);

  auto nan = good;
  const std::size_t payload = 28 + 16 + 4 + 4 * 5;
  put<float>(nan, payload, std::numeric_limits<float>::quiet_NaN());
  f = failure_of([&] { decode_dump(nan); });
  CHECK(f->kind == ErrorKind::kInvalidInput);
  CHECK(f->offset == payload);

  CHECK(failure_of([&] { decode_dump(std::vector<std::uint8_t>{'B', 'F'}); })->kind ==
        ErrorKind::kTruncated);
}

TEST_CASE("stats content errors") {
  const auto good = encode_stats(random_stats(2));
  auto version = good;
  put<std::uint32_t>(version, 4, 7);
  CHECK(failure_of([&] { decode_stats(version); })->kind == ErrorKind::kVersionMismatch);

  const std::size_t len = gramian_length(3, 2);
  auto mad = good;
  put<double>(mad, 28 + 8 + 8 * len, -1.0);
  CHECK(failure_of([&] { decode_stats(mad); })->kind == ErrorKind::kValidation);

  auto dup = good;
  put<std::uint32_t>(dup, 28 + (8 + 16 * len), 0);
  CHECK(failure_of([&] { decode_stats(dup); })->kind == ErrorKind::kValidation);

  auto tag = good;
  tag[28 + 3 * (8 + 16 * len)] = 3;
  CHECK(failure_of([&] { decode_stats(tag); })->kind == ErrorKind::kValidation);

  auto k = good;
  put<double>(k, 20, 0.0);
  CHECK(failure_of([&] { decode_stats(k); })->kind == ErrorKind::kValidation);

  auto extra = good;
  extra.push_back(1);
  CHECK(failure_of([&] { decode_stats(extra); })->kind == ErrorKind::kLengthMismatch);
}

TEST_CASE("every truncation fails with a structured error") {
  const auto dump = encode_dump(random_dump(2, 2, 5, true));
  for (std::size_t cut = 0; cut < dump.size(); ++cut) {
    const std::vector<std::uint8_t> part(dump.begin(), dump.begin() + static_cast<long>(cut));
    const auto f = failure_of([&] { decode_dump(part); });
    REQUIRE(f);
    CHECK(f->kind == ErrorKind::kTruncated);
  }
  for (int present : {0, 1, 2}) {
    const auto stats = encode_stats(random_stats(present));
    for (std::size_t cut = 0; cut < stats.size(); ++cut) {
      const std::vector<std::uint8_t> part(stats.begin(), stats.begin() + static_cast<long>(cut));
      const auto f = failure_of([&] { decode_stats(part); });
      REQUIRE(f);
      CHECK(f->kind == ErrorKind::kTruncated);
    }
  }
}

TEST_CASE("random corruption never escapes as anything but Error") {
  const auto dump = encode_dump(random_dump(2, 3, 6, true));
  const auto stats = encode_stats(random_stats(2));
  auto r = testing::rng(70);
  for (int t = 0; t < 2000; ++t) {
    auto bytes = (t % 2 == 0) ? dump : stats;
    const int edits = 1 + static_cast<int>(r.below(4));
    for (int e = 0; e < edits; ++e) bytes[r.below(bytes.size())] = static_cast<std::uint8_t>(r.below(256));
    if (r.below(3) == 0) bytes.resize(r.below(bytes.size() + 1));
    try {
      if (t % 2 == 0) {
        const Dataset d = decode_dump(bytes);
        CHECK(encode_dump(d) == bytes);
      } else {
        const StatsFile s = decode_stats(bytes);
        CHECK(encode_stats(s) == bytes);
      }
    } catch (const Error&) {
    }
  }
}

TEST_CASE("synthetic dumps round-trip bitwise") {
  ScenarioSpec spec;
  spec.n_classes = 3;
  spec.samples_per_class = 20;
  spec.n_channels = 5;
  spec.spatial = 7;
  const Dataset d = generate(spec);
  CHECK(decode_dump(encode_dump(d)) == d);
}
