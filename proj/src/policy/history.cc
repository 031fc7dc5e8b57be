// Copyright 2026 The tubepolicy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tdp/policy/history.h"

#include "tdp/policy/schedule.h"

namespace tdp {

ObservationHistory::ObservationHistory(int length, int dim) : length_(length), dim_(dim) {
  if (length < 1 || dim < 1) throw PolicyError("history length and dim must be positive");
}

void ObservationHistory::Push(const std::vector<double>& obs) {
  if (static_cast<int>(obs.size()) != dim_) {
    throw PolicyError("history observation has the wrong dimension");
  }
  if (items_.empty()) {
    items_.assign(length_, obs);
    return;
  }
  items_.push_back(obs);
  while (static_cast<int>(items_.size()) > length_) items_.pop_front();
}

std::vector<double> ObservationHistory::Flatten() const {
  if (items_.empty()) throw PolicyError("observation history is not warmed up");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(length_) * dim_);
  for (const auto& o : items_) out.insert(out.end(), o.begin(), o.end());
  return out;
}

const std::vector<double>& ObservationHistory::Latest() const {
  if (items_.empty()) throw PolicyError("observation history is not warmed up");
  return items_.back();
}

}  // namespace tdp
