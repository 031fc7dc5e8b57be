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

#ifndef TDP_POLICY_SCHEDULE_H_
#define TDP_POLICY_SCHEDULE_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace tdp {

class PolicyError : public std::runtime_error {
 public:
  explicit PolicyError(const std::string& what) : std::runtime_error(what) {}
};

// linear-beta diffusion schedule; alpha_bar[0] = 1 is the clean datum
struct NoiseSchedule {
  int steps = 0;
  double beta_start = 0.0;
  double beta_end = 0.0;
  // beta[i - 1] is the rate of step i, i = 1..steps
  std::vector<double> beta;
  // alpha_bar[t] = prod_{i <= t} (1 - beta_i), t = 0..steps
  std::vector<double> alpha_bar;
};

NoiseSchedule BuildSchedule(int steps, double beta_start, double beta_end);

// sqrt(alpha_bar[t1]) u0 + sqrt(1 - alpha_bar[t1]) eps
std::vector<double> ForwardNoise(const std::vector<double>& u0, int t1,
                                 const std::vector<double>& eps,
                                 const NoiseSchedule& schedule);

}  // namespace tdp

#endif  // TDP_POLICY_SCHEDULE_H_
