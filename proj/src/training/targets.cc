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

#include "tdp/training/targets.h"

#include <algorithm>
#include <cmath>

namespace tdp {

std::vector<double> InterpolateAction(const ChunkView& c, double t2) {
  const int hp = c.pred_horizon;
  std::vector<double> out(c.act_dim);
  if (hp == 1) {
    for (int d = 0; d < c.act_dim; ++d) out[d] = c.act[d];
    return out;
  }
  const double x = t2 * hp;
  const int i = std::clamp(static_cast<int>(std::floor(x)), 0, hp - 2);
  const double f = x - i;
  const double* a0 = c.act + static_cast<std::size_t>(i) * c.act_dim;
  const double* a1 = a0 + c.act_dim;
  for (int d = 0; d < c.act_dim; ++d) out[d] = a0[d] + f * (a1[d] - a0[d]);
  return out;
}

std::vector<double> ActionDerivative(const ChunkView& c, double t2) {
  const int hp = c.pred_horizon;
  const double h = 1.0 / hp;
  const double last = (hp - 1) * h;
  double lo = std::max(t2 - h, 0.0);
  double hi = std::min(t2 + h, last);
  if (hi <= lo) hi = lo + h;
  const std::vector<double> a = InterpolateAction(c, lo);
  const std::vector<double> b = InterpolateAction(c, hi);
  std::vector<double> out(c.act_dim);
  for (int d = 0; d < c.act_dim; ++d) out[d] = (b[d] - a[d]) / (hi - lo);
  return out;
}

std::vector<double> TargetVelocity(const ChunkView& c, const std::vector<double>& u,
                                   double t2, double lambda_flow) {
  const std::vector<double> mean = InterpolateAction(c, t2);
  std::vector<double> v = ActionDerivative(c, t2);
  for (int d = 0; d < c.act_dim; ++d) v[d] -= lambda_flow * (u[d] - mean[d]);
  return v;
}

double StabilizingStd(double t2, double sigma0, double k) {
  return sigma0 * std::exp(-k * t2);
}

std::vector<double> SampleStabilizing(const std::vector<double>& mean, double t2,
                                      double sigma0, double k, Rng& rng) {
  const double s = StabilizingStd(t2, sigma0, k);
  std::vector<double> u(mean.size());
  for (std::size_t d = 0; d < mean.size(); ++d) u[d] = mean[d] + s * rng.Normal();
  return u;
}

int AlignedIndex(double t2, int pred_horizon) {
  const int l = static_cast<int>(std::floor(t2 * pred_horizon));
  return std::clamp(l, 0, pred_horizon - 1);
}

std::vector<double> AlignedHistory(const ChunkView& c, double t2) {
  const int l = AlignedIndex(t2, c.pred_horizon);
  const double* begin = c.obs + static_cast<std::size_t>(l) * c.obs_dim;
  return std::vector<double>(begin, begin + static_cast<std::size_t>(c.obs_horizon) * c.obs_dim);
}

}  // namespace tdp
