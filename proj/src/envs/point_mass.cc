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

#include "tdp/envs/point_mass.h"

#include <algorithm>
#include <cmath>

namespace tdp {
namespace {

// gain of the scheduled proportional law
constexpr double kGain = 4.0;
// offset keeping the gain positive at the start position
constexpr double kGainOffset = 0.15;

}  // namespace

PointMass::PointMass(PointMassConfig config) : config_(config) {
  if (config_.damping < 0.0 || config_.damping >= 1.0) {
    throw EnvError("point mass damping must lie in [0, 1)");
  }
  x_ = config_.start;
}

std::string PointMass::id() const {
  return config_.damping > 0.0 ? "point-mass-damped" : "point-mass";
}

void PointMass::Reset(Rng& rng) {
  x_ = config_.start;
  t_ = 0;
}

void PointMass::SetState(const std::vector<double>& state) {
  if (state.size() != 1 || !std::isfinite(state[0])) {
    throw EnvError("point mass state must be one finite value");
  }
  x_ = state[0];
}

void PointMass::Perturb(const std::vector<double>& w) {
  if (w.size() != 1) throw EnvError("point mass perturbation must be 1-D");
  x_ += w[0];
}

bool PointMass::Success() const {
  return std::abs(x_ - config_.goal) < config_.success_tol;
}

double PointMass::Score() const {
  const double err = std::abs(x_ - config_.goal);
  return err <= config_.success_tol ? 1.0 : config_.success_tol / err;
}

double PointMass::ExpertAt(double x) const {
  // gain grows with progress, giving a smooth S-shaped approach to the goal
  double u = kGain * (std::max(x, 0.0) + kGainOffset) * (config_.goal - x);
  // cancel the damping so the goal is an equilibrium
  u += config_.damping / config_.dt * x;
  return std::clamp(u, -config_.action_limit, config_.action_limit);
}

std::vector<double> PointMass::ExpertAction() const { return {ExpertAt(x_)}; }

std::vector<double> PointMass::ClampAction(const std::vector<double>& a) const {
  return {std::clamp(a.at(0), -config_.action_limit, config_.action_limit)};
}

bool PointMass::InActionBox(const std::vector<double>& a) const {
  return std::abs(a.at(0)) <= config_.action_limit + 1e-12;
}

std::unique_ptr<Environment> PointMass::Clone() const {
  return std::make_unique<PointMass>(*this);
}

void PointMass::Advance(const std::vector<double>& action) {
  x_ = (1.0 - config_.damping) * x_ + action[0] * config_.dt;
}

}  // namespace tdp
