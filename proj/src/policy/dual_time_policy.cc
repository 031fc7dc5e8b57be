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

#include "tdp/policy/dual_time_policy.h"

#include <random>

#include "tdp/tensornet/embedding.h"

namespace tdp {

nlohmann::json PolicyConfigToJson(const PolicyConfig& c) {
  return {{"action_dim", c.action_dim},       {"obs_dim", c.obs_dim},
          {"obs_horizon", c.obs_horizon},     {"pred_horizon", c.pred_horizon},
          {"width", c.width},                 {"depth", c.depth},
          {"obs_features", c.obs_features},   {"time_features", c.time_features},
          {"t1_scale", c.t1_scale},           {"t2_scale", c.t2_scale},
          {"diffusion_steps", c.diffusion_steps}, {"beta_start", c.beta_start},
          {"beta_end", c.beta_end}};
}

PolicyConfig PolicyConfigFromJson(const nlohmann::json& j) {
  PolicyConfig c;
  c.action_dim = j.at("action_dim");
  c.obs_dim = j.at("obs_dim");
  c.obs_horizon = j.at("obs_horizon");
  c.pred_horizon = j.at("pred_horizon");
  c.width = j.value("width", c.width);
  c.depth = j.value("depth", c.depth);
  c.obs_features = j.value("obs_features", c.obs_features);
  c.time_features = j.value("time_features", c.time_features);
  c.t1_scale = j.value("t1_scale", c.t1_scale);
  c.t2_scale = j.value("t2_scale", c.t2_scale);
  c.diffusion_steps = j.value("diffusion_steps", c.diffusion_steps);
  c.beta_start = j.value("beta_start", c.beta_start);
  c.beta_end = j.value("beta_end", c.beta_end);
  return c;
}

DualTimePolicy::DualTimePolicy(const PolicyConfig& config, std::uint64_t seed,
                               Normalizer normalizer)
    : config_(config),
      schedule_(BuildSchedule(config.diffusion_steps, config.beta_start, config.beta_end)),
      normalizer_(std::move(normalizer)) {
  if (config.action_dim < 1 || config.obs_dim < 1 || config.obs_horizon < 1 ||
      config.pred_horizon < 2 || config.depth < 1 || config.width < 1) {
    throw PolicyError("invalid policy configuration");
  }
  std::mt19937_64 rng(seed);
  const int cond = config.obs_features + 2 * config.time_features;
  obs_encoder = MakeLinear(config.obs_horizon * config.obs_dim, config.obs_features, rng);
  int in = config.action_dim;
  for (int i = 0; i < config.depth; ++i) {
    hidden.push_back(MakeLinear(in, config.width, rng));
    // zero heads start every FiLM block as the identity
    film.push_back(MakeZeroLinear(cond, 2 * config.width));
    in = config.width;
  }
  head = MakeLinear(config.width, config.action_dim, rng);
  CollectParameters();
}

void DualTimePolicy::CollectParameters() {
  params_.clear();
  AppendLinear("obs_encoder", obs_encoder, &params_);
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    AppendLinear("hidden" + std::to_string(i), hidden[i], &params_);
    AppendLinear("film" + std::to_string(i), film[i], &params_);
  }
  AppendLinear("head", head, &params_);
}

std::size_t DualTimePolicy::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : params_) n += v.value().size();
  return n;
}

Var DualTimePolicy::Forward(const Var& u, const std::vector<double>& t1,
                            const std::vector<double>& t2, const Var& history) const {
  const int batch = u.value().rows();
  if (u.value().cols() != config_.action_dim ||
      history.value().cols() != config_.obs_horizon * config_.obs_dim ||
      history.value().rows() != batch || static_cast<int>(t1.size()) != batch ||
      static_cast<int>(t2.size()) != batch) {
    throw PolicyError("DualTimePolicy::Forward: input shapes do not match the configuration");
  }
  Var features = obs_encoder.Forward(history);
  Var e1 = Constant(SinusoidalEmbedBatch(t1, config_.time_features, config_.t1_scale));
  Var e2 = Constant(SinusoidalEmbedBatch(t2, config_.time_features, config_.t2_scale));
  Var cond = Mish(ConcatCols({features, e1, e2}));
  Var z = u;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    z = hidden[i].Forward(z);
    z = FilmModulate(z, film[i].Forward(cond));
    z = Mish(z);
  }
  Var out = head.Forward(z);
  out.value().CheckFinite("policy output");
  return out;
}

std::vector<double> DualTimePolicy::Predict(const std::vector<double>& u, double t1, double t2,
                                            const std::vector<double>& history) const {
  NoGradGuard guard;
  Var uv = Constant(DenseArray({1, static_cast<int>(u.size())}, u));
  Var hv = Constant(DenseArray({1, static_cast<int>(history.size())}, history));
  return Forward(uv, {t1}, {t2}, hv).value().values();
}

CheckpointData DualTimePolicy::ToCheckpoint(const nlohmann::json& extra) const {
  CheckpointData data;
  data.meta = extra.is_object() ? extra : nlohmann::json::object();
  data.meta["policy"] = PolicyConfigToJson(config_);
  data.meta["normalization"] = NormalizationToJson(normalizer_.stats());
  data.meta["schedule"] = {{"steps", schedule_.steps},
                           {"beta_start", schedule_.beta_start},
                           {"beta_end", schedule_.beta_end}};
  for (const auto& [name, v] : params_) data.tensors.push_back({name, v.value()});
  return data;
}

DualTimePolicy DualTimePolicy::FromCheckpoint(const CheckpointData& data) {
  const PolicyConfig config = PolicyConfigFromJson(data.meta.at("policy"));
  Normalizer normalizer;
  if (data.meta.contains("normalization")) {
    normalizer = Normalizer(NormalizationFromJson(data.meta.at("normalization")));
  }
  DualTimePolicy p(config, 0, normalizer);
  for (auto& [name, v] : p.params_) {
    const DenseArray& stored = data.Get(name);
    if (!stored.SameShape(v.value())) {
      throw PolicyError("checkpoint tensor " + name + " has shape " + stored.ShapeString() +
                        ", expected " + v.value().ShapeString());
    }
    v.mutable_value() = stored;
  }
  return p;
}

void DualTimePolicy::Save(const std::string& path, const nlohmann::json& extra) const {
  WriteCheckpoint(path, ToCheckpoint(extra));
}

DualTimePolicy DualTimePolicy::Load(const std::string& path) {
  return FromCheckpoint(ReadCheckpoint(path));
}

}  // namespace tdp
