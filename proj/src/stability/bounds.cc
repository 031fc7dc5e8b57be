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

#include "tdp/stability/bounds.h"

#include <cmath>

namespace tdp {
namespace {

void RequireContractive(double lipschitz_x) {
  if (!(lipschitz_x < 1.0)) {
    throw StabilityError(
        "cycle contraction requires L_x < 1 (the practical stability hypothesis); got L_x = " +
        std::to_string(lipschitz_x));
  }
}

}  // namespace

double StabilityConstants::c() const { return lipschitz_u * eps_a + w_bar; }

double StabilityConstants::alpha() const {
  RequireContractive(lipschitz_x);
  return lambda_corr * std::pow(lipschitz_x, action_horizon - 1);
}

double StabilityConstants::beta() const {
  RequireContractive(lipschitz_x);
  const double geo = (1.0 - std::pow(lipschitz_x, action_horizon - 1)) / (1.0 - lipschitz_x);
  return lambda_corr * geo * c() + eps_d;
}

double StabilityConstants::UltimateBound() const { return beta() / (1.0 - alpha()); }

void StabilityConstants::Validate(bool theorem) const {
  const double values[] = {lipschitz_x, lipschitz_u, eps_a, w_bar, lambda_corr, eps_d};
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw StabilityError("stability constants must be finite and nonnegative");
    }
  }
  if (!(lambda_corr < 1.0)) throw StabilityError("lambda_corr must lie in [0, 1)");
  if (action_horizon < 1) throw StabilityError("H_a must be at least 1");
  if (theorem) RequireContractive(lipschitz_x);
}

nlohmann::json StabilityConstantsToJson(const StabilityConstants& k) {
  return {{"lipschitz_x", k.lipschitz_x}, {"lipschitz_u", k.lipschitz_u},
          {"eps_a", k.eps_a},             {"w_bar", k.w_bar},
          {"lambda_corr", k.lambda_corr}, {"eps_d", k.eps_d},
          {"action_horizon", k.action_horizon}};
}

StabilityConstants StabilityConstantsFromJson(const nlohmann::json& j) {
  StabilityConstants k;
  k.lipschitz_x = j.value("lipschitz_x", k.lipschitz_x);
  k.lipschitz_u = j.value("lipschitz_u", k.lipschitz_u);
  k.eps_a = j.value("eps_a", k.eps_a);
  k.w_bar = j.value("w_bar", k.w_bar);
  k.lambda_corr = j.value("lambda_corr", k.lambda_corr);
  k.eps_d = j.value("eps_d", k.eps_d);
  k.action_horizon = j.value("action_horizon", k.action_horizon);
  return k;
}

double StreamingBound(double v0, int j, double lipschitz_x, double c) {
  if (j < 0 || lipschitz_x < 0.0 || c < 0.0) {
    throw StabilityError("streaming bound requires j >= 0, L_x >= 0, c >= 0");
  }
  const double p = std::pow(lipschitz_x, j);
  if (lipschitz_x == 1.0) return v0 + j * c;
  return p * v0 + (1.0 - p) / (1.0 - lipschitz_x) * c;
}

CycleTrace CycleBound(double z0, int cycles, const StabilityConstants& constants) {
  constants.Validate(true);
  if (cycles < 0) throw StabilityError("cycle count must be nonnegative");
  CycleTrace trace;
  trace.alpha = constants.alpha();
  trace.beta = constants.beta();
  trace.limit = trace.beta / (1.0 - trace.alpha);
  double z = z0;
  for (int k = 0; k < cycles; ++k) {
    z = trace.alpha * z + trace.beta;
    trace.z.push_back(z);
  }
  return trace;
}

}  // namespace tdp
