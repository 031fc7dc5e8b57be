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

#ifndef TDP_ENVS_DEMOS_H_
#define TDP_ENVS_DEMOS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdp/envs/disturbance.h"
#include "tdp/envs/environment.h"

namespace tdp {

// one expert rollout; obs has one more entry than act
struct DemonstrationEpisode {
  std::string env;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<double>> act;
  nlohmann::json meta = nlohmann::json::object();
};

// per-dimension min/max over a demo set
struct NormalizationStats {
  std::vector<double> obs_min, obs_max, act_min, act_max;
};

struct DemoOptions {
  // optional disturbance spec injected during collection (default none)
  std::string disturbance = "none";
};

// rolls out the expert until n successful episodes are collected; failed
// attempts are discarded; aborts with EnvError when the expert succeeds in
// fewer than half of the attempts or 4n attempts do not yield n successes
std::vector<DemonstrationEpisode> GenerateDemos(const std::string& env_id, int n,
                                                std::uint64_t seed,
                                                const DemoOptions& options = {});

// expert rollout of a single episode from the environment's current state
DemonstrationEpisode RecordExpertEpisode(Environment& env, std::uint64_t seed,
                                         const DisturbanceScript& script);

NormalizationStats ComputeNormalization(const std::vector<DemonstrationEpisode>& demos);

// JSON-lines file, one episode per line
void WriteDemos(const std::string& path, const std::vector<DemonstrationEpisode>& demos);
std::vector<DemonstrationEpisode> ReadDemos(const std::string& path);

nlohmann::json NormalizationToJson(const NormalizationStats& stats);
NormalizationStats NormalizationFromJson(const nlohmann::json& j);
void WriteNormalization(const std::string& path, const NormalizationStats& stats);
NormalizationStats ReadNormalization(const std::string& path);

// sidecar path convention: demos.jsonl -> demos.norm.json
std::string NormalizationPathFor(const std::string& demos_path);

nlohmann::json EpisodeToJson(const DemonstrationEpisode& e);
DemonstrationEpisode EpisodeFromJson(const nlohmann::json& j);

}  // namespace tdp

#endif  // TDP_ENVS_DEMOS_H_
