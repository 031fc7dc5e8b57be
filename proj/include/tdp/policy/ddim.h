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

#ifndef TDP_POLICY_DDIM_H_
#define TDP_POLICY_DDIM_H_

#include <functional>
#include <vector>

#include "tdp/policy/schedule.h"

namespace tdp {

// deterministic update: reconstruct u0 from (u, eps_hat) at t1, re-noise to
// t1_prev with the same eps_hat
std::vector<double> DdimStep(const std::vector<double>& u,
                             const std::vector<double>& eps_hat, int t1, int t1_prev,
                             const NoiseSchedule& schedule);

// evenly spaced indices round(k * T / T_ddim), k = 1..T_ddim (ascending)
std::vector<int> DdimTimesteps(int diffusion_steps, int ddim_steps);

// noise prediction callback eps_hat(u, t1)
using NoisePredictor =
    std::function<std::vector<double>(const std::vector<double>& u, int t1)>;

// runs the chain from u_T down to index 0 and returns the clean estimate
std::vector<double> DdimSample(const NoisePredictor& predictor, std::vector<double> u_T,
                               const NoiseSchedule& schedule, int ddim_steps);

}  // namespace tdp

#endif  // TDP_POLICY_DDIM_H_
