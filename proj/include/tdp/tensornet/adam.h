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

#ifndef TDP_TENSORNET_ADAM_H_
#define TDP_TENSORNET_ADAM_H_

#include <cstdint>
#include <vector>

#include "tdp/tensornet/autodiff.h"

namespace tdp {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// first and second moment buffers plus the step counter
struct AdamState {
  std::vector<DenseArray> m;
  std::vector<DenseArray> v;
  std::int64_t step = 0;
};

AdamState MakeAdamState(const std::vector<Var>& params);

// bias-corrected adaptive moment update applied in place to the parameter
// values
void AdamStep(std::vector<Var>& params, const std::vector<DenseArray>& grads,
              AdamState& state, const AdamConfig& config);

}  // namespace tdp

#endif  // TDP_TENSORNET_ADAM_H_
