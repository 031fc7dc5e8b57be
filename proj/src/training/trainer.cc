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

#include "tdp/training/trainer.h"

#include <cmath>

#include "tdp/envs/rng.h"

namespace tdp {

void HyperParams::Validate() const {
  if (pred_horizon < 2) throw TrainingError("H_p must be at least 2");
  if (obs_horizon < 1) throw TrainingError("H_o must be at least 1");
  if (action_horizon < 1 || action_horizon > pred_horizon) {
    throw TrainingError("H_a must satisfy 0 < H_a <= H_p");
  }
  if (!(flow.lambda_flow > 0.0)) throw TrainingError("lambda_flow must be positive");
  if (!(flow.sigma0 > 0.0)) throw TrainingError("sigma0 must be positive");
  if (!(flow.k > 0.0)) throw TrainingError("k must be positive");
  if (!(lr > 0.0)) throw TrainingError("learning rate must be positive");
  if (batch_size < 1) throw TrainingError("batch size must be positive");
  if (steps < 0) throw TrainingError("steps must be non-negative");
  if (log_every < 1) throw TrainingError("log_every must be positive");
  if (patience < 0) throw TrainingError("patience must be non-negative");
  if (slicing.stride < 1 || slicing.pad_before < 0 || slicing.pad_after < 0) {
    throw TrainingError("invalid slicing options");
  }
}

nlohmann::json HyperParamsToJson(const HyperParams& h) {
  return {{"pred_horizon", h.pred_horizon},
          {"obs_horizon", h.obs_horizon},
          {"action_horizon", h.action_horizon},
          {"lambda_flow", h.flow.lambda_flow},
          {"k", h.flow.k},
          {"sigma0", h.flow.sigma0},
          {"lr", h.lr},
          {"batch_size", h.batch_size},
          {"steps", h.steps},
          {"log_every", h.log_every},
          {"patience", h.patience},
          {"stride", h.slicing.stride},
          {"pad_before", h.slicing.pad_before},
          {"pad_after", h.slicing.pad_after},
          {"width", h.width},
          {"depth", h.depth},
          {"obs_features", h.obs_features},
          {"time_features", h.time_features},
          {"t1_scale", h.t1_scale},
          {"t2_scale", h.t2_scale},
          {"diffusion_steps", h.diffusion_steps},
          {"beta_start", h.beta_start},
          {"beta_end", h.beta_end}};
}

HyperParams HyperParamsFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw TrainingError("hyperparameters must be a JSON object");
  const HyperParams defaults;
  const nlohmann::json known = HyperParamsToJson(defaults);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw TrainingError("unknown hyperparameter: " + key);
  }
  HyperParams h;
  h.pred_horizon = j.value("pred_horizon", h.pred_horizon);
  h.obs_horizon = j.value("obs_horizon", h.obs_horizon);
  h.action_horizon = j.value("action_horizon", h.action_horizon);
  h.flow.lambda_flow = j.value("lambda_flow", h.flow.lambda_flow);
  h.flow.k = j.value("k", h.flow.k);
  h.flow.sigma0 = j.value("sigma0", h.flow.sigma0);
  h.lr = j.value("lr", h.lr);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.steps = j.value("steps", h.steps);
  h.log_every = j.value("log_every", h.log_every);
  h.patience = j.value("patience", h.patience);
  h.slicing.stride = j.value("stride", h.slicing.stride);
  h.slicing.pad_before = j.value("pad_before", h.slicing.pad_before);
  h.slicing.pad_after = j.value("pad_after", h.slicing.pad_after);
  h.width = j.value("width", h.width);
  h.depth = j.value("depth", h.depth);
  h.obs_features = j.value("obs_features", h.obs_features);
  h.time_features = j.value("time_features", h.time_features);
  h.t1_scale = j.value("t1_scale", h.t1_scale);
  h.t2_scale = j.value("t2_scale", h.t2_scale);
  h.diffusion_steps = j.value("diffusion_steps", h.diffusion_steps);
  h.beta_start = j.value("beta_start", h.beta_start);
  h.beta_end = j.value("beta_end", h.beta_end);
  h.Validate();
  return h;
}

PolicyConfig MakePolicyConfig(const HyperParams& h, int obs_dim, int act_dim) {
  PolicyConfig c;
  c.action_dim = act_dim;
  c.obs_dim = obs_dim;
  c.obs_horizon = h.obs_horizon;
  c.pred_horizon = h.pred_horizon;
  c.width = h.width;
  c.depth = h.depth;
  c.obs_features = h.obs_features;
  c.time_features = h.time_features;
  c.t1_scale = h.t1_scale;
  c.t2_scale = h.t2_scale;
  c.diffusion_steps = h.diffusion_steps;
  c.beta_start = h.beta_start;
  c.beta_end = h.beta_end;
  return c;
}

nlohmann::json TrainLogEntryToJson(const TrainLogEntry& e) {
  return {{"step", e.step},
          {"epoch", e.epoch},
          {"l_diff", e.l_diff},
          {"l_stream", e.l_stream},
          {"loss", e.loss}};
}

Trainer::Trainer(const ChunkDataset& data, const HyperParams& hyper,
                 const Normalizer& normalizer, std::uint64_t seed)
    : data_(data),
      hyper_(hyper),
      seed_(seed),
      policy_(MakePolicyConfig(hyper, data.obs_dim(), data.act_dim()),
              DeriveSeed(seed, RngStream::kInit), normalizer),
      rng_(DeriveSeed(seed, RngStream::kTraining)) {
  hyper_.Validate();
  if (data.pred_horizon() != hyper.pred_horizon || data.obs_horizon() != hyper.obs_horizon) {
    throw TrainingError("dataset horizons do not match the hyperparameters");
  }
  params_ = policy_.parameter_vars();
  adam_.lr = hyper.lr;
  adam_state_ = MakeAdamState(params_);
}

std::pair<double, double> Trainer::Step() {
  const TrainBatch batch =
      SampleBatch(data_, hyper_.batch_size, policy_.schedule(), hyper_.flow, rng_);
  CombinedLoss loss;
  try {
    loss = ComputeCombinedLoss(policy_, batch);
  } catch (const TensorError& e) {
    throw TrainingDiverged(std::string("non-finite forward pass: ") + e.what(), step_ + 1);
  }
  const double l_diff = loss.diffusion.value().item();
  const double l_stream = loss.streaming.value().item();
  if (!std::isfinite(l_diff) || !std::isfinite(l_stream)) {
    throw TrainingDiverged("loss became non-finite", step_ + 1);
  }
  const std::vector<DenseArray> grads = Backward(loss.total, params_);
  for (const DenseArray& g : grads) {
    for (double x : g.values()) {
      if (!std::isfinite(x)) throw TrainingDiverged("gradient became non-finite", step_ + 1);
    }
  }
  AdamStep(params_, grads, adam_state_, adam_);
  ++step_;
  return {l_diff, l_stream};
}

std::vector<TrainLogEntry> Trainer::Run(
    const std::function<void(const TrainLogEntry&)>& on_log) {
  std::vector<TrainLogEntry> log;
  if (!last_good_) SnapshotGood();
  double sum_diff = 0.0, sum_stream = 0.0;
  int count = 0;
  while (step_ < hyper_.steps && !plateau_stop_) {
    const auto [l_diff, l_stream] = Step();
    sum_diff += l_diff;
    sum_stream += l_stream;
    ++count;
    if (step_ % hyper_.log_every == 0 || step_ == hyper_.steps) {
      TrainLogEntry e;
      e.step = step_;
      e.epoch = static_cast<int>(static_cast<std::int64_t>(step_) * hyper_.batch_size /
                                 data_.size());
      e.l_diff = sum_diff / count;
      e.l_stream = sum_stream / count;
      e.loss = e.l_diff + e.l_stream;
      log.push_back(e);
      if (on_log) on_log(e);
      SnapshotGood();
      sum_diff = sum_stream = 0.0;
      count = 0;
      if (hyper_.patience > 0) {
        if (!have_best_ || e.loss < best_window_ * (1.0 - 1e-3)) {
          best_window_ = e.loss;
          have_best_ = true;
          windows_since_best_ = 0;
        } else if (++windows_since_best_ >= hyper_.patience) {
          plateau_stop_ = true;
        }
      }
    }
  }
  return log;
}

nlohmann::json Trainer::TrainStateJson() const {
  return {{"step", step_},
          {"seed", seed_},
          {"rng", rng_.SaveState()},
          {"adam_step", adam_state_.step},
          {"best_window", best_window_},
          {"have_best", have_best_},
          {"windows_since_best", windows_since_best_}};
}

CheckpointData Trainer::ToCheckpoint() const {
  nlohmann::json extra = meta_;
  extra["hyper"] = HyperParamsToJson(hyper_);
  extra["train_state"] = TrainStateJson();
  CheckpointData data = policy_.ToCheckpoint(extra);
  const NamedParameters& named = policy_.parameters();
  for (std::size_t i = 0; i < named.size(); ++i) {
    data.tensors.push_back({"adam.m." + named[i].first, adam_state_.m[i]});
    data.tensors.push_back({"adam.v." + named[i].first, adam_state_.v[i]});
  }
  return data;
}

void Trainer::Save(const std::string& path) const { WriteCheckpoint(path, ToCheckpoint()); }

void Trainer::Resume(const CheckpointData& data) {
  const nlohmann::json& state = data.meta.at("train_state");
  if (state.at("seed").get<std::uint64_t>() != seed_) {
    throw TrainingError("resume seed does not match the checkpoint");
  }
  policy_ = DualTimePolicy::FromCheckpoint(data);
  params_ = policy_.parameter_vars();
  const NamedParameters& named = policy_.parameters();
  for (std::size_t i = 0; i < named.size(); ++i) {
    adam_state_.m[i] = data.Get("adam.m." + named[i].first);
    adam_state_.v[i] = data.Get("adam.v." + named[i].first);
  }
  adam_state_.step = state.at("adam_step").get<std::int64_t>();
  rng_.LoadState(state.at("rng").get<std::string>());
  step_ = state.at("step").get<int>();
  best_window_ = state.at("best_window").get<double>();
  have_best_ = state.at("have_best").get<bool>();
  windows_since_best_ = state.at("windows_since_best").get<int>();
  plateau_stop_ = false;
  last_good_.reset();
}

void Trainer::SnapshotGood() { last_good_ = ToCheckpoint(); }

CheckpointData Trainer::LastGoodCheckpoint() const {
  if (last_good_) return *last_good_;
  return ToCheckpoint();
}

}  // namespace tdp
