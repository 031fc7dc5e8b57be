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

#include "tdp/training/chunks.h"

#include <iostream>

namespace tdp {

std::vector<Chunk> SliceChunks(const std::vector<std::vector<double>>& obs_in,
                               const std::vector<std::vector<double>>& act_in,
                               int pred_horizon, int obs_horizon,
                               const SliceOptions& options) {
  if (pred_horizon < 1 || obs_horizon < 1 || options.stride < 1 || options.pad_before < 0 ||
      options.pad_after < 0) {
    throw TrainingError("invalid slicing parameters");
  }
  if (obs_in.empty() || act_in.empty()) return {};
  std::vector<std::vector<double>> obs, act;
  obs.insert(obs.end(), options.pad_before, obs_in.front());
  act.insert(act.end(), options.pad_before, act_in.front());
  obs.insert(obs.end(), obs_in.begin(), obs_in.end());
  act.insert(act.end(), act_in.begin(), act_in.end());
  obs.insert(obs.end(), options.pad_after, obs_in.back());
  act.insert(act.end(), options.pad_after, act_in.back());

  std::vector<Chunk> chunks;
  const int n_obs = static_cast<int>(obs.size());
  const int n_act = static_cast<int>(act.size());
  for (int s = 0; s + obs_horizon + pred_horizon <= n_obs &&
                  s + obs_horizon - 1 + pred_horizon <= n_act;
       s += options.stride) {
    Chunk c;
    c.obs.assign(obs.begin() + s, obs.begin() + s + obs_horizon + pred_horizon);
    c.act.assign(act.begin() + s + obs_horizon - 1,
                 act.begin() + s + obs_horizon - 1 + pred_horizon);
    chunks.push_back(std::move(c));
  }
  if (chunks.empty()) {
    std::cerr << "warning: episode of " << obs_in.size()
              << " observations is shorter than H_o + H_p; no chunks\n";
  }
  return chunks;
}

ChunkDataset::ChunkDataset(const std::vector<DemonstrationEpisode>& demos,
                           const Normalizer& normalizer, int pred_horizon, int obs_horizon,
                           const SliceOptions& options)
    : pred_horizon_(pred_horizon), obs_horizon_(obs_horizon) {
  for (const auto& e : demos) {
    std::vector<std::vector<double>> obs, act;
    for (const auto& o : e.obs) obs.push_back(normalizer.NormalizeObs(o));
    for (const auto& a : e.act) act.push_back(normalizer.NormalizeAct(a));
    for (const auto& c : SliceChunks(obs, act, pred_horizon, obs_horizon, options)) Append(c);
  }
  if (count_ == 0) throw TrainingError("demo set produced no training chunks");
}

ChunkDataset::ChunkDataset(const std::vector<Chunk>& chunks, int pred_horizon,
                           int obs_horizon)
    : pred_horizon_(pred_horizon), obs_horizon_(obs_horizon) {
  for (const auto& c : chunks) Append(c);
  if (count_ == 0) throw TrainingError("no training chunks");
}

void ChunkDataset::Append(const Chunk& c) {
  if (static_cast<int>(c.obs.size()) != obs_horizon_ + pred_horizon_ ||
      static_cast<int>(c.act.size()) != pred_horizon_) {
    throw TrainingError("chunk does not match the dataset horizons");
  }
  if (count_ == 0) {
    obs_dim_ = static_cast<int>(c.obs[0].size());
    act_dim_ = static_cast<int>(c.act[0].size());
  }
  for (const auto& o : c.obs) obs_.insert(obs_.end(), o.begin(), o.end());
  for (const auto& a : c.act) act_.insert(act_.end(), a.begin(), a.end());
  ++count_;
}

ChunkView ChunkDataset::View(int i) const {
  ChunkView v;
  v.obs = obs_.data() + static_cast<std::size_t>(i) * (obs_horizon_ + pred_horizon_) * obs_dim_;
  v.act = act_.data() + static_cast<std::size_t>(i) * pred_horizon_ * act_dim_;
  v.obs_horizon = obs_horizon_;
  v.pred_horizon = pred_horizon_;
  v.obs_dim = obs_dim_;
  v.act_dim = act_dim_;
  return v;
}

}  // namespace tdp
