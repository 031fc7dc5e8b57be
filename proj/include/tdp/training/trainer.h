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

#ifndef TDP_TRAINING_TRAINER_H_
#define TDP_TRAINING_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdp/policy/dual_time_policy.h"
#include "tdp/tensornet/adam.h"
#include "tdp/training/chunks.h"
#include "tdp/training/losses.h"

namespace tdp {

struct HyperParams {
  int pred_horizon = 16;  // H_p
  int obs_horizon = 2;    // H_o
  int action_horizon = 8;  // H_a
  FlowParams flow;
  double lr = 1e-4;
  int batch_size = 64;
  int steps = 2000;
  int log_every = 100;
  // log windows without a 0.1% relative improvement before stopping; 0 = off
  int patience = 0;
  SliceOptions slicing;
  // network shape
  int width = 256;
  int depth = 3;
  int obs_features = 64;
  int time_features = 32;
  double t1_scale = 1.0;
  double t2_scale = 100.0;
  int diffusion_steps = 100;
  double beta_start = 1e-4;
  double beta_end = 2e-2;

  // throws TrainingError on violated invariants
  void Validate() const;
};

nlohmann::json HyperParamsToJson(const HyperParams& h);
// missing keys keep their defaults; unknown keys are rejected
HyperParams HyperParamsFromJson(const nlohmann::json& j);

PolicyConfig MakePolicyConfig(const HyperParams& h, int obs_dim, int act_dim);

// windowed mean losses
struct TrainLogEntry {
  int step = 0;
  int epoch = 0;
  double l_diff = 0.0;
  double l_stream = 0.0;
  double loss = 0.0;
};

nlohmann::json TrainLogEntryToJson(const TrainLogEntry& e);

class TrainingDiverged : public TrainingError {
 public:
  TrainingDiverged(const std::string& what, int step)
      : TrainingError(what), step(step) {}
  int step;
};

// Alg. 1 driver with exact resumption: parameters, optimizer moments, the
// sampling generator and the step counter all live in the checkpoint
class Trainer {
 public:
  Trainer(const ChunkDataset& data, const HyperParams& hyper, const Normalizer& normalizer,
          std::uint64_t seed);

  // one optimizer step; returns (l_diff, l_stream); throws TrainingDiverged
  // on a non-finite loss or gradient
  std::pair<double, double> Step();

  // runs until |hyper.steps| total steps or a plateau stop; |on_log| sees
  // every log window
  std::vector<TrainLogEntry> Run(const std::function<void(const TrainLogEntry&)>& on_log = {});

  // checkpoint including optimizer state; loading it into a fresh Trainer
  // over the same data continues the identical trajectory
  CheckpointData ToCheckpoint() const;
  void Save(const std::string& path) const;
  void Resume(const CheckpointData& data);

  // parameters at the end of the most recent finite log window
  CheckpointData LastGoodCheckpoint() const;

  const DualTimePolicy& policy() const { return policy_; }
  int step() const { return step_; }
  bool stopped_on_plateau() const { return plateau_stop_; }
  const HyperParams& hyper() const { return hyper_; }
  // extra fields merged into checkpoint meta (e.g. the environment id)
  void set_meta(nlohmann::json meta) { meta_ = std::move(meta); }

 private:
  nlohmann::json TrainStateJson() const;
  void SnapshotGood();

  const ChunkDataset& data_;
  HyperParams hyper_;
  std::uint64_t seed_;
  DualTimePolicy policy_;
  std::vector<Var> params_;
  AdamConfig adam_;
  AdamState adam_state_;
  Rng rng_;
  int step_ = 0;
  bool plateau_stop_ = false;
  double best_window_ = 0.0;
  int windows_since_best_ = 0;
  bool have_best_ = false;
  std::optional<CheckpointData> last_good_;
  nlohmann::json meta_ = nlohmann::json::object();
};

}  // namespace tdp

#endif  // TDP_TRAINING_TRAINER_H_
