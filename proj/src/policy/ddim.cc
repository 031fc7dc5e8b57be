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

#include "tdp/policy/ddim.h"

#include <cmath>

namespace tdp {

std::vector<double> DdimStep(const std::vector<double>& u,
                             const std::vector<double>& eps_hat, int t1, int t1_prev,
                             const NoiseSchedule& schedule) {
  if (!(t1 > t1_prev && t1_prev >= 0 && t1 <= schedule.steps)) {
    throw PolicyError("DdimStep requires steps >= t1 > t1_prev >= 0, got t1=" +
                      std::to_string(t1) + " t1_prev=" + std::to_string(t1_prev));
  }
  if (u.size() != eps_hat.size()) throw PolicyError("DdimStep: size mismatch");
  const double a = schedule.alpha_bar[t1];
  const double ap = schedule.alpha_bar[t1_prev];
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double u0 = (u[i] - std::sqrt(1.0 - a) * eps_hat[i]) / std::sqrt(a);
    out[i] = std::sqrt(ap) * u0 + std::sqrt(1.0 - ap) * eps_hat[i];
  }
  return out;
}

std::vector<int> DdimTimesteps(int diffusion_steps, int ddim_steps) {
  if (ddim_steps < 1) throw PolicyError("T_ddim must be at least 1");
  if (ddim_steps > diffusion_steps) throw PolicyError("T_ddim exceeds the diffusion steps");
  std::vector<int> taus;
  for (int k = 1; k <= ddim_steps; ++k) {
    taus.push_back(static_cast<int>(
        std::lround(static_cast<double>(k) * diffusion_steps / ddim_steps)));
  }
  return taus;
}

std::vector<double> DdimSample(const NoisePredictor& predictor, std::vector<double> u_T,
                               const NoiseSchedule& schedule, int ddim_steps) {
  const std::vector<int> taus = DdimTimesteps(schedule.steps, ddim_steps);
  std::vector<double> u = std::move(u_T);
  for (int k = ddim_steps - 1; k >= 0; --k) {
    const int t = taus[k];
    const int t_prev = k > 0 ? taus[k - 1] : 0;
    u = DdimStep(u, predictor(u, t), t, t_prev, schedule);
  }
  return u;
}

}  // namespace tdp
