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

#include "tdp/policy/schedule.h"

#include <cmath>

namespace tdp {

NoiseSchedule BuildSchedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw PolicyError("diffusion step count must be at least 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw PolicyError("schedule requires 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.steps = steps;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.beta.resize(steps);
  for (int i = 0; i < steps; ++i) {
    const double f = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    s.beta[i] = beta_start + (beta_end - beta_start) * f;
  }
  s.alpha_bar.resize(steps + 1);
  s.alpha_bar[0] = 1.0;
  for (int t = 1; t <= steps; ++t) s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.beta[t - 1]);
  return s;
}

std::vector<double> ForwardNoise(const std::vector<double>& u0, int t1,
                                 const std::vector<double>& eps,
                                 const NoiseSchedule& schedule) {
  if (t1 < 0 || t1 > schedule.steps) {
    throw PolicyError("diffusion time " + std::to_string(t1) + " outside [0, " +
                      std::to_string(schedule.steps) + "]");
  }
  if (u0.size() != eps.size()) throw PolicyError("ForwardNoise: size mismatch");
  const double a = schedule.alpha_bar[t1];
  const double sa = std::sqrt(a), sn = std::sqrt(1.0 - a);
  std::vector<double> out(u0.size());
  for (std::size_t i = 0; i < u0.size(); ++i) out[i] = sa * u0[i] + sn * eps[i];
  return out;
}

}  // namespace tdp
