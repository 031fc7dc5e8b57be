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

#include "tdp/policy/normalizer.h"

#include <utility>

#include "tdp/policy/schedule.h"

namespace tdp {
namespace {

double Range(double lo, double hi) { return hi - lo > 1e-12 ? hi - lo : 2.0; }

std::vector<double> Forward(const std::vector<double>& x, const std::vector<double>& lo,
                            const std::vector<double>& hi) {
  if (x.size() != lo.size()) throw PolicyError("normalizer dimension mismatch");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = 2.0 * (x[i] - lo[i]) / Range(lo[i], hi[i]) - 1.0;
  }
  return y;
}

std::vector<double> Inverse(const std::vector<double>& y, const std::vector<double>& lo,
                            const std::vector<double>& hi) {
  if (y.size() != lo.size()) throw PolicyError("normalizer dimension mismatch");
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    x[i] = (y[i] + 1.0) * 0.5 * Range(lo[i], hi[i]) + lo[i];
  }
  return x;
}

}  // namespace

Normalizer::Normalizer(NormalizationStats stats) : stats_(std::move(stats)) {}

std::vector<double> Normalizer::NormalizeObs(const std::vector<double>& o) const {
  return Forward(o, stats_.obs_min, stats_.obs_max);
}

std::vector<double> Normalizer::DenormalizeObs(const std::vector<double>& y) const {
  return Inverse(y, stats_.obs_min, stats_.obs_max);
}

std::vector<double> Normalizer::NormalizeAct(const std::vector<double>& a) const {
  return Forward(a, stats_.act_min, stats_.act_max);
}

std::vector<double> Normalizer::DenormalizeAct(const std::vector<double>& y) const {
  return Inverse(y, stats_.act_min, stats_.act_max);
}

}  // namespace tdp
