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

#ifndef TDP_TESTS_TEST_UTIL_H_
#define TDP_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tdp/policy/dual_time_policy.h"
#include "tdp/training/chunks.h"

namespace tdp::testing_util {

// small network used wherever the full-size one would only slow tests down
PolicyConfig TinyPolicyConfig(int obs_dim = 3, int act_dim = 2, int obs_horizon = 2,
                              int pred_horizon = 4);

// chunks with standard-normal entries
ChunkDataset RandomDataset(int chunks, int pred_horizon, int obs_horizon, int obs_dim,
                           int act_dim, std::uint64_t seed);

// overwrites every parameter (FiLM heads included) with N(0, scale^2)
void RandomizeParameters(DualTimePolicy& policy, std::uint64_t seed, double scale);

// max over |n_checks| random parameter entries of |analytic - numeric| /
// max(|analytic|, |numeric|) for the combined loss; entries where both
// derivatives vanish below 1e-10 are skipped
double GradientCheckMaxRelativeError(std::uint64_t seed, int n_checks);

// one chunk whose actions all equal |value|
ChunkDataset ConstantChunk(int pred_horizon, double value, int obs_horizon = 1);

// one chunk with actions a + b * i / H_p
ChunkDataset RampChunk(int pred_horizon, double a, double b);

// explicit Euler on the contraction target field of |v| over [0, horizon];
// returns |u(horizon) - exact(horizon)|
double EulerFinalError(const ChunkView& v, double u0, double lambda, double horizon, int steps,
                       const std::function<double(double)>& exact);

// fresh empty directory under the system temp path
std::string MakeTempDir(const std::string& tag);

std::string ReadFile(const std::string& path);

}  // namespace tdp::testing_util

#endif  // TDP_TESTS_TEST_UTIL_H_
