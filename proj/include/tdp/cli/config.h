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

#ifndef TDP_CLI_CONFIG_H_
#define TDP_CLI_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "tdp/inference/controller.h"
#include "tdp/training/trainer.h"

namespace tdp {

// experiment file: {"env", "seed", "demos": {"n"}, "hyper": {...},
// "controller": {...}, "eval": {"episodes", "disturbance"}}
struct RunConfig {
  std::string env;
  std::optional<std::uint64_t> seed;
  int demo_count = 1;
  HyperParams hyper;
  ControllerConfig controller;
  int eval_episodes = 50;
  std::string eval_disturbance = "none";
  nlohmann::json raw = nlohmann::json::object();
};

RunConfig RunConfigFromJson(const nlohmann::json& j);
RunConfig LoadRunConfig(const std::string& path);

// explicit flag, then TDP_SEED, then the config's seed, then 0
std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag,
                          const std::optional<std::uint64_t>& config_seed);

}  // namespace tdp

#endif  // TDP_CLI_CONFIG_H_
