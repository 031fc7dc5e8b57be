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

#ifndef TDP_ENVS_ENVIRONMENT_H_
#define TDP_ENVS_ENVIRONMENT_H_

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdp/envs/rng.h"

namespace tdp {

class EnvError : public std::runtime_error {
 public:
  explicit EnvError(const std::string& what) : std::runtime_error(what) {}
};

// deterministic simulation with a fully observed state; the observation
// vector equals the state vector, and disturbances are additive on it
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  int state_dim() const { return obs_dim(); }
  virtual double dt() const = 0;
  // hard episode cap
  virtual int max_steps() const = 0;
  // default evaluation horizon (<= max_steps)
  virtual int eval_steps() const = 0;
  // episodes stop as soon as Success() holds
  virtual bool ends_on_success() const = 0;

  // samples a start state and zeroes the step counter
  virtual void Reset(Rng& rng) = 0;
  virtual std::vector<double> Observe() const = 0;
  virtual void SetState(const std::vector<double>& state) = 0;

  // applies |action| (must be finite and inside the action box)
  void Step(const std::vector<double>& action);
  // additive state jump; the step counter is unchanged
  virtual void Perturb(const std::vector<double>& w) = 0;

  virtual bool Success() const = 0;
  // pose-tolerance score in [0, 1]; equals 1 exactly when Success() holds
  virtual double Score() const = 0;
  virtual bool OutOfWorkspace() const { return false; }

  // scripted expert for the current state
  virtual std::vector<double> ExpertAction() const = 0;
  // action representing the current robot configuration
  virtual std::vector<double> WarmStartAction() const = 0;
  virtual std::vector<double> ClampAction(const std::vector<double>& a) const = 0;
  virtual bool InActionBox(const std::vector<double>& a) const = 0;

  virtual std::unique_ptr<Environment> Clone() const = 0;

  int t() const { return t_; }
  void set_t(int t) { t_ = t; }

 protected:
  virtual void Advance(const std::vector<double>& action) = 0;
  int t_ = 0;
};

// factory for "point-mass", "point-mass-damped", "planar-push"
std::unique_ptr<Environment> MakeEnvironment(const std::string& id);
std::vector<std::string> EnvironmentIds();

}  // namespace tdp

#endif  // TDP_ENVS_ENVIRONMENT_H_
