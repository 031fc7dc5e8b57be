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

#ifndef TDP_STABILITY_BOUNDS_H_
#define TDP_STABILITY_BOUNDS_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace tdp {

class StabilityError : public std::runtime_error {
 public:
  explicit StabilityError(const std::string& what) : std::runtime_error(what) {}
};

// tolerance added to every bound comparison
inline constexpr double kBoundSlack = 1e-9;

struct StabilityConstants {
  double lipschitz_x = 0.0;  // L_x
  double lipschitz_u = 0.0;  // L_u
  double eps_a = 0.0;        // streaming imitation error bound
  double w_bar = 0.0;        // disturbance bound
  double lambda_corr = 0.0;  // correction contraction factor, in [0, 1)
  double eps_d = 0.0;        // correction residual bound
  int action_horizon = 1;    // H_a, correction period in steps

  // c = L_u eps_a + w_bar
  double c() const;
  // alpha = lambda_corr L_x^(H_a - 1); requires L_x < 1
  double alpha() const;
  // beta = lambda_corr (1 - L_x^(H_a - 1)) / (1 - L_x) c + eps_d; requires L_x < 1
  double beta() const;
  // beta / (1 - alpha)
  double UltimateBound() const;

  // nonnegativity and lambda_corr < 1; |theorem| additionally demands L_x < 1
  void Validate(bool theorem) const;
};

nlohmann::json StabilityConstantsToJson(const StabilityConstants& k);
StabilityConstants StabilityConstantsFromJson(const nlohmann::json& j);

// L_x^j V0 + sum_{i < j} L_x^i c, geometric closed form when L_x != 1
double StreamingBound(double v0, int j, double lipschitz_x, double c);

struct CycleTrace {
  std::vector<double> z;  // z_1 .. z_k
  double alpha = 0.0;
  double beta = 0.0;
  double limit = 0.0;  // beta / (1 - alpha)
};

// z_{k+1} = alpha z_k + beta from z_0; StabilityError when L_x >= 1
CycleTrace CycleBound(double z0, int cycles, const StabilityConstants& constants);

}  // namespace tdp

#endif  // TDP_STABILITY_BOUNDS_H_
