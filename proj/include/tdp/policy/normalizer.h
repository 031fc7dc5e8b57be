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

#ifndef TDP_POLICY_NORMALIZER_H_
#define TDP_POLICY_NORMALIZER_H_

#include <vector>

#include "tdp/envs/demos.h"

namespace tdp {

// per-dimension affine map of [min, max] onto [-1, 1]; degenerate ranges use
// unit scale
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(NormalizationStats stats);

  std::vector<double> NormalizeObs(const std::vector<double>& o) const;
  std::vector<double> DenormalizeObs(const std::vector<double>& y) const;
  std::vector<double> NormalizeAct(const std::vector<double>& a) const;
  std::vector<double> DenormalizeAct(const std::vector<double>& y) const;

  const NormalizationStats& stats() const { return stats_; }

 private:
  NormalizationStats stats_;
};

}  // namespace tdp

#endif  // TDP_POLICY_NORMALIZER_H_
