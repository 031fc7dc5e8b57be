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

#include <cmath>

#include "tdp/envs/environment.h"
#include "tdp/envs/planar_push.h"
#include "tdp/envs/point_mass.h"

namespace tdp {

void Environment::Step(const std::vector<double>& action) {
  if (static_cast<int>(action.size()) != act_dim()) {
    throw EnvError(id() + ": action has " + std::to_string(action.size()) +
                   " entries, expected " + std::to_string(act_dim()));
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw EnvError(id() + ": non-finite action");
  }
  if (!InActionBox(action)) throw EnvError(id() + ": action outside the action box");
  Advance(action);
  ++t_;
}

std::unique_ptr<Environment> MakeEnvironment(const std::string& id) {
  if (id == "point-mass") return std::make_unique<PointMass>();
  if (id == "point-mass-damped") {
    PointMassConfig c;
    c.damping = 0.1;
    c.action_limit = 2.0;
    return std::make_unique<PointMass>(c);
  }
  if (id == "planar-push") return std::make_unique<PlanarPush>();
  throw EnvError("unknown environment '" + id + "'");
}

std::vector<std::string> EnvironmentIds() {
  return {"point-mass", "point-mass-damped", "planar-push"};
}

}  // namespace tdp
