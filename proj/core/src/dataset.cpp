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

#include "gramscan/dataset.hpp"

#include "gramscan/error.hpp"

namespace gramscan {

void Dataset::validate() const {
  if (labels.size() != tensors.size()) {
    throw Error(ErrorKind::kValidation, "dataset has mismatched label count");
  }
  if (poison && poison->size() != tensors.size()) {
    throw Error(ErrorKind::kValidation, "dataset has mismatched poison flag count");
  }
  for (const auto& t : tensors) {
    if (t.channels() != n_channels || t.spatial() != spatial) {
      throw Error(ErrorKind::kValidation, "dataset tensor shape differs from the header");
    }
  }
  if (poison) {
    for (auto b : *poison) {
      if (b > 1) throw Error(ErrorKind::kValidation, "poison flag must be 0 or 1");
    }
  }
}

}  // namespace gramscan
