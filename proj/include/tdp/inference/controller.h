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

#ifndef TDP_INFERENCE_CONTROLLER_H_
#define TDP_INFERENCE_CONTROLLER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdp/envs/disturbance.h"
#include "tdp/envs/environment.h"
#include "tdp/envs/rng.h"
#include "tdp/policy/dual_time_policy.h"
#include "tdp/policy/history.h"

namespace tdp {

class InferenceError : public std::runtime_error {
 public:
  explicit InferenceError(const std::string& what) : std::runtime_error(what) {}
};

enum class ControlMode { kTube, kChunkOnly, kStreamingOnly };

// how chunk_only builds its open-loop action sequence at each cycle start
enum class ChunkSynthesis {
  // fresh denoise per planned step against a simulated copy of the plant
  // started from the cycle-start observation
  kDenoisePlanned,
  // one denoise, then the streaming field integrated against the simulated
  // copy's observations
  kStreamPlanned,
  // one denoise, then the streaming field integrated against the frozen
  // cycle-start history
  kFrozen,
};

std::string ControlModeName(ControlMode m);
ControlMode ParseControlMode(const std::string& s);
std::string ChunkSynthesisName(ChunkSynthesis s);
ChunkSynthesis ParseChunkSynthesis(const std::string& s);

struct ControllerConfig {
  int ddim_steps = 10;  // T_ddim
  // streaming integration step in trajectory time; 0 selects 1 / H_p
  double dt = 0.0;
  int action_horizon = 8;  // H_a
  ControlMode mode = ControlMode::kTube;
  ChunkSynthesis chunk_synthesis = ChunkSynthesis::kDenoisePlanned;
  // episode length; 0 selects the environment's evaluation horizon
  int max_steps = 0;

  // throws InferenceError unless 0 < H_a <= H_p and T_ddim >= 1
  void Validate(const PolicyConfig& policy) const;
  double StepSize(const PolicyConfig& policy) const;
};

nlohmann::json ControllerConfigToJson(const ControllerConfig& c);
ControllerConfig ControllerConfigFromJson(const nlohmann::json& j);

enum class Phase { kDenoise, kStream };
std::string PhaseName(Phase p);

struct RolloutStep {
  int t = 0;
  std::vector<double> obs;     // raw observation before the action
  std::vector<double> action;  // raw executed action
  double t2 = 0.0;
  Phase phase = Phase::kStream;
  std::vector<double> disturbance;  // applied right after this action
  int cycle = 0;
  // environment step index of the newest observation the action depended on
  int history_step = 0;
  double latency_us = 0.0;  // wall clock; excluded from equality and hashing
};

struct RolloutRecord {
  std::string env;
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<RolloutStep> steps;
  std::vector<double> final_obs;
  bool success = false;
  double score = 0.0;
  std::optional<int> steps_to_success;
  int denoise_calls = 0;

  // deterministic content as JSON-lines (one line per step, then a summary)
  std::string ToJsonl() const;
  nlohmann::json Summary() const;
  // per-step wall-clock latencies
  nlohmann::json Timing() const;
  // equality of everything except wall-clock latencies
  bool SameTrajectory(const RolloutRecord& other) const;
};

// T_ddim DDIM steps from u ~ N(0, I) drawn from |rng|, conditioned on the
// flattened normalized history at t2 = 0; returns a normalized action
std::vector<double> DenoiseInitial(const DualTimePolicy& policy,
                                   const std::vector<double>& history, int ddim_steps, Rng& rng);

// u + v(u, t1 = 0, t2 | h) dt
std::vector<double> StreamStep(const DualTimePolicy& policy, const std::vector<double>& u,
                               const std::vector<double>& history, double t2, double dt);

// action chosen for the current step with its bookkeeping
struct ControlDecision {
  std::vector<double> action;  // raw, clamped to the action box
  Phase phase = Phase::kStream;
  double t2 = 0.0;
  int cycle = 0;
  int history_step = 0;
  double latency_us = 0.0;
};

// step-wise controller: Act() picks the action for the current state,
// Observe() ingests the state reached after the step (and any disturbance);
// RunController and the serve loop both drive this interface
class ControllerSession {
 public:
  // |rng| supplies denoise noise and must outlive the session
  ControllerSession(const DualTimePolicy& policy, const ControllerConfig& config, Rng& rng);

  // starts from the environment's current observation
  void Start(const Environment& env);
  ControlDecision Act(const Environment& env);
  void Observe(const Environment& env);

  int denoise_calls() const { return denoise_calls_; }
  const ControllerConfig& config() const { return config_; }

 private:
  std::vector<double> Normalized(const Environment& env) const;
  void PlanChunk(const Environment& env);

  const DualTimePolicy& policy_;
  ControllerConfig config_;
  Rng& rng_;
  double dt_ = 0.0;
  int per_cycle_ = 0;
  ObservationHistory history_;
  std::vector<double> u_;
  std::vector<std::vector<double>> plan_;
  int j_ = 0;  // actions already executed in the current cycle
  int cycle_ = -1;
  int history_step_ = 0;
  int cycle_step_ = 0;
  bool started_ = false;
  bool have_u_ = false;
  int denoise_calls_ = 0;
};

// one episode from the environment's current state; the environment must
// already be reset; |rng| seeds the denoise noise
RolloutRecord RunController(Environment& env, const DualTimePolicy& policy,
                            const ControllerConfig& config, const DisturbanceScript& script,
                            Rng& rng);

// one episode driven by an arbitrary state-feedback law (expert or synthetic)
using FeedbackLaw = std::function<std::vector<double>(const Environment&)>;
RolloutRecord RunFeedbackLaw(Environment& env, const FeedbackLaw& law,
                             const DisturbanceScript& script, int max_steps,
                             const std::string& mode_name);

}  // namespace tdp

#endif  // TDP_INFERENCE_CONTROLLER_H_
