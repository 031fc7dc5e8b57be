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

#ifndef TDP_POLICY_DUAL_TIME_POLICY_H_
#define TDP_POLICY_DUAL_TIME_POLICY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdp/policy/normalizer.h"
#include "tdp/policy/schedule.h"
#include "tdp/tensornet/checkpoint.h"
#include "tdp/tensornet/layers.h"

namespace tdp {

struct PolicyConfig {
  int action_dim = 1;
  int obs_dim = 1;
  int obs_horizon = 2;    // H_o
  int pred_horizon = 16;  // H_p
  int width = 256;
  int depth = 3;
  int obs_features = 64;
  int time_features = 32;
  double t1_scale = 1.0;
  double t2_scale = 100.0;
  int diffusion_steps = 100;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
};

nlohmann::json PolicyConfigToJson(const PolicyConfig& c);
PolicyConfig PolicyConfigFromJson(const nlohmann::json& j);

// v_theta(u, t1, t2 | h): predicts the injected noise at t2 = 0 and the
// streaming velocity at t1 = 0 with one parameter set
class DualTimePolicy {
 public:
  DualTimePolicy(const PolicyConfig& config, std::uint64_t seed,
                 Normalizer normalizer = {});

  // batched evaluation; u [B, n_u], history [B, H_o * n_o], t1/t2 length B
  Var Forward(const Var& u, const std::vector<double>& t1,
              const std::vector<double>& t2, const Var& history) const;

  // single evaluation without graph recording
  std::vector<double> Predict(const std::vector<double>& u, double t1, double t2,
                              const std::vector<double>& history) const;

  const PolicyConfig& config() const { return config_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const Normalizer& normalizer() const { return normalizer_; }
  void set_normalizer(Normalizer n) { normalizer_ = std::move(n); }
  const NamedParameters& parameters() const { return params_; }
  std::vector<Var> parameter_vars() const { return ParameterVars(params_); }
  std::size_t parameter_count() const;

  // film conditioning rows belonging to the t1 embedding
  int t1_cond_begin() const { return config_.obs_features; }
  int t1_cond_end() const { return config_.obs_features + config_.time_features; }

  // checkpoint conversion; |extra| is merged into the manifest meta section
  CheckpointData ToCheckpoint(const nlohmann::json& extra = {}) const;
  static DualTimePolicy FromCheckpoint(const CheckpointData& data);
  void Save(const std::string& path, const nlohmann::json& extra = {}) const;
  static DualTimePolicy Load(const std::string& path);

  // architecture pieces, exposed for tests
  Linear obs_encoder;
  std::vector<Linear> hidden;
  std::vector<Linear> film;
  Linear head;

 private:
  void CollectParameters();

  PolicyConfig config_;
  NoiseSchedule schedule_;
  Normalizer normalizer_;
  NamedParameters params_;
};

}  // namespace tdp

#endif  // TDP_POLICY_DUAL_TIME_POLICY_H_
