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

#ifndef TDP_ENVS_PLANAR_PUSH_H_
#define TDP_ENVS_PLANAR_PUSH_H_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "tdp/envs/environment.h"

namespace tdp {

struct PlanarPushConfig {
  double dt = 0.05;
  // square block half extent and disk pusher radius
  double block_half = 0.06;
  double pusher_radius = 0.02;
  // pusher speed limit (units per second)
  double max_speed = 0.2;
  double pos_tol = 0.05;
  double rot_tol = 0.1;
  double workspace = 1.0;
  int max_steps = 300;
  // expert gains: cross-track to heading, heading to contact offset
  double expert_cross_gain = 8.0;
  double expert_heading_gain = 0.2;
  double expert_heading_window = 0.1;
};

// signed pusher-to-block distance in the block frame
struct ContactQuery {
  double distance = 0.0;
  // unit normal from the pusher toward the block (block frame)
  std::array<double, 2> normal{0.0, 0.0};
  // closest point on the block boundary (block frame)
  std::array<double, 2> point{0.0, 0.0};
};

// disk pusher moving a square block toward the pose (0, 0, 0); state and
// observation are [pusher x, pusher y, block x, block y, block angle] and the
// action is the pusher setpoint
class PlanarPush : public Environment {
 public:
  explicit PlanarPush(PlanarPushConfig config = {});

  std::string id() const override { return "planar-push"; }
  int obs_dim() const override { return 5; }
  int act_dim() const override { return 2; }
  double dt() const override { return config_.dt; }
  int max_steps() const override { return config_.max_steps; }
  int eval_steps() const override { return config_.max_steps; }
  bool ends_on_success() const override { return true; }

  void Reset(Rng& rng) override;
  std::vector<double> Observe() const override;
  void SetState(const std::vector<double>& state) override;
  void Perturb(const std::vector<double>& w) override;

  bool Success() const override;
  double Score() const override;
  bool OutOfWorkspace() const override;

  std::vector<double> ExpertAction() const override;
  std::vector<double> WarmStartAction() const override {
    return {pusher_[0], pusher_[1]};
  }
  std::vector<double> ClampAction(const std::vector<double>& a) const override;
  bool InActionBox(const std::vector<double>& a) const override;

  std::unique_ptr<Environment> Clone() const override;

  const PlanarPushConfig& config() const { return config_; }
  const std::array<double, 2>& pusher() const { return pusher_; }
  const std::array<double, 3>& block() const { return block_; }
  std::array<double, 3> goal() const { return {0.0, 0.0, 0.0}; }

  ContactQuery Query() const;
  bool InContact() const { return Query().distance < config_.pusher_radius; }

 protected:
  void Advance(const std::vector<double>& action) override;

 private:
  // pushes the block out of the pusher disk along the contact normal
  void Resolve();

  PlanarPushConfig config_;
  std::array<double, 2> pusher_{0.0, 0.0};
  std::array<double, 3> block_{0.0, 0.0, 0.0};
};

// angle wrapped to (-pi, pi]
double WrapAngle(double a);

}  // namespace tdp

#endif  // TDP_ENVS_PLANAR_PUSH_H_
