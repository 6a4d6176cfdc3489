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

#include "gramscan/error.hpp"

namespace gramscan {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidOrder: return "invalid_order";
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kBadMagic: return "bad_magic";
    case ErrorKind::kVersionMismatch: return "version_mismatch";
    case ErrorKind::kLengthMismatch: return "length_mismatch";
  }
  return "unknown";
}

namespace {
std::string decorate(ErrorKind kind, const std::string& message,
                     std::optional<std::uint64_t> offset) {
  std::string out(to_string(kind));
  out += ": ";
  out += message;
  if (offset) {
    out += " (at byte offset " + std::to_string(*offset) + ")";
  }
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::uint64_t> offset)
    : std::runtime_error(decorate(kind, message, offset)),
      kind_(kind),
      offset_(offset) {}

}  // namespace gramscan
