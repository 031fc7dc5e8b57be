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

#include "tdp/inference/controller.h"

#include <chrono>
#include <cmath>
#include <sstream>

#include "tdp/policy/ddim.h"

namespace tdp {
namespace {

using Clock = std::chrono::steady_clock;

double MicrosSince(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

// shared step bookkeeping for every control mode
class EpisodeRunner {
 public:
  EpisodeRunner(Environment& env, const DisturbanceScript& script, int max_steps,
                RolloutRecord& record)
      : env_(env), script_(script), max_steps_(max_steps), record_(record) {
    Observe();
  }

  bool Done() const {
    if (env_.ends_on_success() && env_.Success()) return true;
    if (env_.OutOfWorkspace()) return true;
    return env_.t() >= max_steps_;
  }

  void Execute(const std::vector<double>& action, Phase phase, double t2, int cycle,
               int history_step, double latency_us) {
    RolloutStep s;
    s.t = env_.t();
    s.obs = env_.Observe();
    s.action = action;
    s.t2 = t2;
    s.phase = phase;
    s.cycle = cycle;
    s.history_step = history_step;
    s.latency_us = latency_us;
    env_.Step(action);
    s.disturbance = script_.At(s.t, env_.state_dim());
    if (EuclideanNorm(s.disturbance) > 0.0) env_.Perturb(s.disturbance);
    record_.steps.push_back(std::move(s));
    Observe();
  }

  void Finish() {
    record_.final_obs = env_.Observe();
    record_.success = env_.Success();
    record_.score = env_.ends_on_success() ? best_score_ : env_.Score();
    if (!record_.success) record_.steps_to_success.reset();
  }

 private:
  void Observe() {
    const double score = env_.Score();
    if (score > best_score_) best_score_ = score;
    if (env_.Success() && !record_.steps_to_success) record_.steps_to_success = env_.t();
  }

  Environment& env_;
  const DisturbanceScript& script_;
  int max_steps_;
  RolloutRecord& record_;
  double best_score_ = 0.0;
};

int Horizon(const Environment& env, const ControllerConfig& config) {
  return config.max_steps > 0 ? config.max_steps : env.eval_steps();
}

// executable raw action for a normalized policy output
std::vector<double> ToAction(const Environment& env, const DualTimePolicy& policy,
                             const std::vector<double>& u) {
  return env.ClampAction(policy.normalizer().DenormalizeAct(u));
}

// number of streaming steps per cycle: j dt <= H_a / H_p
int StepsPerCycle(const ControllerConfig& config, const PolicyConfig& pc, double dt) {
  const double end = static_cast<double>(config.action_horizon) / pc.pred_horizon;
  return static_cast<int>(std::floor(end / dt + 1e-9));
}

nlohmann::json StepToJson(const RolloutStep& s) {
  return {{"t", s.t},
          {"obs", s.obs},
          {"action", s.action},
          {"t2", s.t2},
          {"phase", PhaseName(s.phase)},
          {"disturbance", s.disturbance},
          {"cycle", s.cycle},
          {"history_step", s.history_step}};
}

}  // namespace

std::string ControlModeName(ControlMode m) {
  switch (m) {
    case ControlMode::kTube:
      return "tube";
    case ControlMode::kChunkOnly:
      return "chunk_only";
    case ControlMode::kStreamingOnly:
      return "streaming_only";
  }
  return "tube";
}

ControlMode ParseControlMode(const std::string& s) {
  if (s == "tube") return ControlMode::kTube;
  if (s == "chunk_only" || s == "chunk") return ControlMode::kChunkOnly;
  if (s == "streaming_only" || s == "stream") return ControlMode::kStreamingOnly;
  throw InferenceError("unknown control mode: " + s);
}

std::string ChunkSynthesisName(ChunkSynthesis s) {
  switch (s) {
    case ChunkSynthesis::kDenoisePlanned:
      return "denoise_planned";
    case ChunkSynthesis::kStreamPlanned:
      return "stream_planned";
    case ChunkSynthesis::kFrozen:
      return "frozen";
  }
  return "denoise_planned";
}

ChunkSynthesis ParseChunkSynthesis(const std::string& s) {
  if (s == "denoise_planned") return ChunkSynthesis::kDenoisePlanned;
  if (s == "stream_planned") return ChunkSynthesis::kStreamPlanned;
  if (s == "frozen") return ChunkSynthesis::kFrozen;
  throw InferenceError("unknown chunk synthesis: " + s);
}

void ControllerConfig::Validate(const PolicyConfig& policy) const {
  if (ddim_steps < 1) throw InferenceError("T_ddim must be at least 1");
  if (ddim_steps > policy.diffusion_steps) {
    throw InferenceError("T_ddim exceeds the trained diffusion steps");
  }
  if (action_horizon < 1 || action_horizon > policy.pred_horizon) {
    throw InferenceError("H_a must satisfy 0 < H_a <= H_p");
  }
  if (dt < 0.0 || !std::isfinite(dt)) throw InferenceError("dt must be finite and >= 0");
  if (max_steps < 0) throw InferenceError("max_steps must be >= 0");
  if (StepSize(policy) > static_cast<double>(action_horizon) / policy.pred_horizon + 1e-12) {
    throw InferenceError("dt exceeds H_a / H_p; no streaming step fits in a cycle");
  }
}

double ControllerConfig::StepSize(const PolicyConfig& policy) const {
  return dt > 0.0 ? dt : 1.0 / policy.pred_horizon;
}

nlohmann::json ControllerConfigToJson(const ControllerConfig& c) {
  return {{"ddim_steps", c.ddim_steps},
          {"dt", c.dt},
          {"action_horizon", c.action_horizon},
          {"mode", ControlModeName(c.mode)},
          {"chunk_synthesis", ChunkSynthesisName(c.chunk_synthesis)},
          {"max_steps", c.max_steps}};
}

ControllerConfig ControllerConfigFromJson(const nlohmann::json& j) {
  ControllerConfig c;
  c.ddim_steps = j.value("ddim_steps", c.ddim_steps);
  c.dt = j.value("dt", c.dt);
  c.action_horizon = j.value("action_horizon", c.action_horizon);
  if (j.contains("mode")) c.mode = ParseControlMode(j.at("mode").get<std::string>());
  if (j.contains("chunk_synthesis")) {
    c.chunk_synthesis = ParseChunkSynthesis(j.at("chunk_synthesis").get<std::string>());
  }
  c.max_steps = j.value("max_steps", c.max_steps);
  return c;
}

std::string PhaseName(Phase p) { return p == Phase::kDenoise ? "denoise" : "stream"; }

std::string RolloutRecord::ToJsonl() const {
  std::ostringstream out;
  for (const RolloutStep& s : steps) out << StepToJson(s).dump() << '\n';
  out << nlohmann::json{{"summary", Summary()}}.dump() << '\n';
  return out.str();
}

nlohmann::json RolloutRecord::Summary() const {
  nlohmann::json j = {{"env", env},
                      {"mode", mode},
                      {"seed", seed},
                      {"steps", steps.size()},
                      {"final_obs", final_obs},
                      {"success", success},
                      {"score", score},
                      {"denoise_calls", denoise_calls}};
  j["steps_to_success"] =
      steps_to_success ? nlohmann::json(*steps_to_success) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json RolloutRecord::Timing() const {
  nlohmann::json j = nlohmann::json::array();
  for (const RolloutStep& s : steps) {
    j.push_back({{"t", s.t}, {"phase", PhaseName(s.phase)}, {"latency_us", s.latency_us}});
  }
  return j;
}

bool RolloutRecord::SameTrajectory(const RolloutRecord& other) const {
  return ToJsonl() == other.ToJsonl();
}

std::vector<double> DenoiseInitial(const DualTimePolicy& policy,
                                   const std::vector<double>& history, int ddim_steps,
                                   Rng& rng) {
  if (ddim_steps < 1) throw InferenceError("T_ddim must be at least 1");
  std::vector<double> u_T(policy.config().action_dim);
  for (double& x : u_T) x = rng.Normal();
  const NoisePredictor predictor = [&](const std::vector<double>& u, int t1) {
    return policy.Predict(u, static_cast<double>(t1), 0.0, history);
  };
  return DdimSample(predictor, std::move(u_T), policy.schedule(), ddim_steps);
}

std::vector<double> StreamStep(const DualTimePolicy& policy, const std::vector<double>& u,
                               const std::vector<double>& history, double t2, double dt) {
  const std::vector<double> v = policy.Predict(u, 0.0, t2, history);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(v[i])) throw InferenceError("non-finite streaming velocity");
    out[i] = u[i] + v[i] * dt;
  }
  return out;
}

ControllerSession::ControllerSession(const DualTimePolicy& policy,
                                     const ControllerConfig& config, Rng& rng)
    : policy_(policy),
      config_(config),
      rng_(rng),
      history_(policy.config().obs_horizon, policy.config().obs_dim) {
  config_.Validate(policy.config());
  dt_ = config_.StepSize(policy.config());
  per_cycle_ = StepsPerCycle(config_, policy.config(), dt_);
}

std::vector<double> ControllerSession::Normalized(const Environment& env) const {
  return policy_.normalizer().NormalizeObs(env.Observe());
}

void ControllerSession::Start(const Environment& env) {
  const PolicyConfig& pc = policy_.config();
  if (env.obs_dim() != pc.obs_dim || env.act_dim() != pc.action_dim) {
    throw InferenceError("policy dimensions do not match environment " + env.id());
  }
  history_ = ObservationHistory(pc.obs_horizon, pc.obs_dim);
  history_.Push(Normalized(env));
  history_step_ = env.t();
  cycle_ = -1;
  j_ = 0;
  have_u_ = false;
  plan_.clear();
  started_ = true;
}

void ControllerSession::Observe(const Environment& env) {
  history_.Push(Normalized(env));
  history_step_ = env.t();
}

void ControllerSession::PlanChunk(const Environment& env) {
  const Normalizer& norm = policy_.normalizer();
  std::unique_ptr<Environment> sim = env.Clone();
  sim->SetState(env.Observe());
  ObservationHistory sim_history = history_;
  std::vector<double> u = DenoiseInitial(policy_, history_.Flatten(), config_.ddim_steps, rng_);
  ++denoise_calls_;
  plan_.clear();
  for (int j = 1; j <= per_cycle_; ++j) {
    plan_.push_back(ToAction(*sim, policy_, u));
    if (j == per_cycle_) break;
    sim->Step(plan_.back());
    sim_history.Push(norm.NormalizeObs(sim->Observe()));
    switch (config_.chunk_synthesis) {
      case ChunkSynthesis::kDenoisePlanned:
        u = DenoiseInitial(policy_, sim_history.Flatten(), config_.ddim_steps, rng_);
        ++denoise_calls_;
        break;
      case ChunkSynthesis::kStreamPlanned:
        u = StreamStep(policy_, u, sim_history.Flatten(), j * dt_, dt_);
        break;
      case ChunkSynthesis::kFrozen:
        u = StreamStep(policy_, u, history_.Flatten(), j * dt_, dt_);
        break;
    }
  }
}

ControlDecision ControllerSession::Act(const Environment& env) {
  if (!started_) throw InferenceError("ControllerSession::Act before Start");
  const auto start = Clock::now();
  const bool new_cycle = cycle_ < 0 || j_ >= per_cycle_;
  if (new_cycle) {
    ++cycle_;
    j_ = 0;
    cycle_step_ = env.t();
  }
  ControlDecision d;
  bool timed = true;
  switch (config_.mode) {
    case ControlMode::kTube:
      if (new_cycle) {
        u_ = DenoiseInitial(policy_, history_.Flatten(), config_.ddim_steps, rng_);
        ++denoise_calls_;
      } else {
        u_ = StreamStep(policy_, u_, history_.Flatten(), j_ * dt_, dt_);
      }
      d.phase = new_cycle ? Phase::kDenoise : Phase::kStream;
      d.action = ToAction(env, policy_, u_);
      d.history_step = history_step_;
      break;
    case ControlMode::kStreamingOnly:
      if (!have_u_) {
        u_ = policy_.normalizer().NormalizeAct(env.WarmStartAction());
        have_u_ = true;
        timed = false;
      } else {
        const double t2_prev = (new_cycle ? per_cycle_ : j_) * dt_;
        u_ = StreamStep(policy_, u_, history_.Flatten(), t2_prev, dt_);
      }
      d.phase = Phase::kStream;
      d.action = ToAction(env, policy_, u_);
      d.history_step = history_step_;
      break;
    case ControlMode::kChunkOnly:
      if (new_cycle) PlanChunk(env);
      timed = new_cycle;
      d.phase = new_cycle ? Phase::kDenoise : Phase::kStream;
      d.action = plan_[j_];
      d.history_step = cycle_step_;
      break;
  }
  ++j_;
  d.t2 = j_ * dt_;
  d.cycle = cycle_;
  d.latency_us = timed ? MicrosSince(start) : 0.0;
  return d;
}

RolloutRecord RunController(Environment& env, const DualTimePolicy& policy,
                            const ControllerConfig& config, const DisturbanceScript& script,
                            Rng& rng) {
  ControllerSession session(policy, config, rng);
  session.Start(env);
  RolloutRecord record;
  record.env = env.id();
  record.mode = ControlModeName(config.mode);
  EpisodeRunner runner(env, script, Horizon(env, config), record);
  while (!runner.Done()) {
    const ControlDecision d = session.Act(env);
    runner.Execute(d.action, d.phase, d.t2, d.cycle, d.history_step, d.latency_us);
    session.Observe(env);
  }
  record.denoise_calls = session.denoise_calls();
  runner.Finish();
  return record;
}

RolloutRecord RunFeedbackLaw(Environment& env, const FeedbackLaw& law,
                             const DisturbanceScript& script, int max_steps,
                             const std::string& mode_name) {
  RolloutRecord record;
  record.env = env.id();
  record.mode = mode_name;
  EpisodeRunner runner(env, script, max_steps > 0 ? max_steps : env.eval_steps(), record);
  while (!runner.Done()) {
    const int t = env.t();
    runner.Execute(env.ClampAction(law(env)), Phase::kStream, 0.0, 0, t, 0.0);
  }
  runner.Finish();
  return record;
}

}  // namespace tdp
