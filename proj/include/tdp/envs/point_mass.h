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

#ifndef TDP_ENVS_POINT_MASS_H_
#define TDP_ENVS_POINT_MASS_H_

#include <memory>
#include <string>
#include <vector>

#include "tdp/envs/environment.h"

namespace tdp {

struct PointMassConfig {
  double dt = 0.1;
  // state feedback damping kappa*dt; 0 gives the raw single integrator
  double damping = 0.0;
  double goal = 1.0;
  double start = 0.0;
  double action_limit = 1.0;
  double success_tol = 0.05;
  int max_steps = 100;
  int eval_steps = 40;
};

// x_{t+1} = (1 - damping) x_t + u_t dt (+ w_t through Perturb)
class PointMass : public Environment {
 public:
  explicit PointMass(PointMassConfig config = {});

  std::string id() const override;
  int obs_dim() const override { return 1; }
  int act_dim() const override { return 1; }
  double dt() const override { return config_.dt; }
  int max_steps() const override { return config_.max_steps; }
  int eval_steps() const override { return config_.eval_steps; }
  bool ends_on_success() const override { return false; }

  void Reset(Rng& rng) override;
  std::vector<double> Observe() const override { return {x_}; }
  void SetState(const std::vector<double>& state) override;
  void Perturb(const std::vector<double>& w) override;

  bool Success() const override;
  double Score() const override;

  std::vector<double> ExpertAction() const override;
  std::vector<double> WarmStartAction() const override { return {0.0}; }
  std::vector<double> ClampAction(const std::vector<double>& a) const override;
  bool InActionBox(const std::vector<double>& a) const override;

  std::unique_ptr<Environment> Clone() const override;

  const PointMassConfig& config() const { return config_; }
  double x() const { return x_; }
  // Lipschitz constants of the one-step map
  double lipschitz_x() const { return 1.0 - config_.damping; }
  double lipschitz_u() const { return config_.dt; }

  // expert law evaluated at an arbitrary position
  double ExpertAt(double x) const;

 protected:
  void Advance(const std::vector<double>& action) override;

 private:
  PointMassConfig config_;
  double x_ = 0.0;
};

}  // namespace tdp

#endif  // TDP_ENVS_POINT_MASS_H_
