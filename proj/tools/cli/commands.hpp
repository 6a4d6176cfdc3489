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
#include <ostream>
#include <string>
#include <vector>

namespace gramscan::cli {

enum ExitCode : int {
  kExitClean = 0,
  kExitOperational = 1,
  kExitDetected = 2,
};

/// Seed taken from BEATRIX_SEED, if set and parseable.
std::optional<std::uint64_t> env_seed();

/// Runs one command line. `args` excludes the program name. Reports go to
/// `out` (or the --out file), structured errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gramscan::cli
