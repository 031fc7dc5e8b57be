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

#ifndef TDP_POLICY_HISTORY_H_
#define TDP_POLICY_HISTORY_H_

#include <deque>
#include <vector>

namespace tdp {

// ring of the last H_o normalized observations, oldest first; the first push
// fills every slot with that observation
class ObservationHistory {
 public:
  ObservationHistory(int length, int dim);

  void Push(const std::vector<double>& obs);
  bool warmed_up() const { return !items_.empty(); }
  int length() const { return length_; }
  int dim() const { return dim_; }
  // concatenation oldest to newest, size length * dim
  std::vector<double> Flatten() const;
  const std::vector<double>& Latest() const;

 private:
  int length_;
  int dim_;
  std::deque<std::vector<double>> items_;
};

}  // namespace tdp

#endif  // TDP_POLICY_HISTORY_H_
