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

#ifndef TDP_STABILITY_VERIFY_H_
#define TDP_STABILITY_VERIFY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdp/envs/demos.h"
#include "tdp/envs/point_mass.h"
#include "tdp/inference/controller.h"
#include "tdp/stability/bounds.h"

namespace tdp {

// analytic constants of a point-mass environment (L_x = 1 - damping,
// L_u = dt); the remaining fields stay zero
StabilityConstants PointMassConstants(const PointMass& env, int action_horizon);

struct StreamingStepCheck {
  int t = 0;
  double error = 0.0;         // |e_t|
  double next_error = 0.0;    // |e_{t+1}|
  double action_error = 0.0;  // |u_t - u_t*|
  double disturbance = 0.0;   // |w_t|
  double bound = 0.0;         // L_x |e_t| + L_u |u_t - u_t*| + |w_t|
  double margin = 0.0;        // bound - next_error
  bool ok = true;
};

struct StreamingReport {
  std::vector<StreamingStepCheck> steps;
  int violations = 0;
  std::optional<int> first_violation;
  double measured_eps_a = 0.0;  // max |u_t - u_t*|
  double max_error = 0.0;
  bool pass = true;
};

// per-step one-step error recursion against the reference episode, with
// e_t = x_t - x_t* and u_t* the reference action at the same step
StreamingReport VerifyStreaming(const RolloutRecord& rollout,
                                const DemonstrationEpisode& reference,
                                const StabilityConstants& constants);

struct CycleCheck {
  int k = 0;
  double z = 0.0;             // post-correction error at the start of cycle k
  double z_next = 0.0;
  double z_bound = 0.0;       // alpha z + beta
  double max_within = 0.0;    // largest error inside the cycle
  double within_margin = 0.0; // min over steps j of bound_j - |e_j|
  bool ok = true;
};

struct CycleReport {
  std::vector<CycleCheck> cycles;
  double alpha = 0.0;
  double beta = 0.0;
  double limit = 0.0;
  double tail_max = 0.0;  // max z_k over the second half of the run
  double final_error = 0.0;
  int violations = 0;
  bool pass = true;
};

struct OracleCorrectorOptions {
  int cycles = 200;
  double initial_error = 1.0;
  std::uint64_t seed = 0;
  // residuals at full magnitude aligned with the error instead of uniform
  bool adversarial = false;
};

// damped point mass tracked against its own expert trajectory: actions
// carry |u - u*| <= eps_a, disturbances |w| <= w_bar, and every H_a steps
// the oracle corrector sets e <- lambda_corr e + r with |r| <= eps_d
CycleReport VerifyCycles(const PointMass& env, const StabilityConstants& constants,
                         const OracleCorrectorOptions& options);

nlohmann::json StreamingReportToJson(const StreamingReport& r);
nlohmann::json CycleReportToJson(const CycleReport& r);
std::string StreamingReportText(const StreamingReport& r);
std::string CycleReportText(const CycleReport& r);

}  // namespace tdp

#endif  // TDP_STABILITY_VERIFY_H_
