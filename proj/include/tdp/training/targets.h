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

#ifndef TDP_TRAINING_TARGETS_H_
#define TDP_TRAINING_TARGETS_H_

#include <vector>

#include "tdp/envs/rng.h"
#include "tdp/training/chunks.h"

namespace tdp {

// zeta_u(t2): linear interpolation between entries i / H_p, extended
// linearly past the last entry
std::vector<double> InterpolateAction(const ChunkView& c, double t2);

// d zeta_u / d t2 by central differences of width 1 / H_p on the
// interpolant, one-sided at the ends (units: action per unit t2)
std::vector<double> ActionDerivative(const ChunkView& c, double t2);

// d zeta_u / d t2 - lambda (u - zeta_u(t2))
std::vector<double> TargetVelocity(const ChunkView& c, const std::vector<double>& u,
                                   double t2, double lambda_flow);

// N(mean, sigma0^2 exp(-2 k t2) I)
std::vector<double> SampleStabilizing(const std::vector<double>& mean, double t2,
                                      double sigma0, double k, Rng& rng);
double StabilizingStd(double t2, double sigma0, double k);

// l = min(floor(t2 * H_p), H_p - 1)
int AlignedIndex(double t2, int pred_horizon);

// zeta_o[l : l + H_o] flattened
std::vector<double> AlignedHistory(const ChunkView& c, double t2);

}  // namespace tdp

#endif  // TDP_TRAINING_TARGETS_H_
