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

#include "tdp/cli/config.h"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace tdp {

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  RunConfig c;
  c.raw = j;
  c.env = j.value("env", std::string());
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("demos")) c.demo_count = j.at("demos").value("n", c.demo_count);
  if (j.contains("hyper")) c.hyper = HyperParamsFromJson(j.at("hyper"));
  if (j.contains("controller")) c.controller = ControllerConfigFromJson(j.at("controller"));
  if (j.contains("eval")) {
    c.eval_episodes = j.at("eval").value("episodes", c.eval_episodes);
    c.eval_disturbance = j.at("eval").value("disturbance", c.eval_disturbance);
  }
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  return RunConfigFromJson(nlohmann::json::parse(in));
}

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag,
                          const std::optional<std::uint64_t>& config_seed) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TDP_SEED"); env != nullptr && *env != '\0') {
    return std::stoull(env);
  }
  return config_seed.value_or(0);
}

}  // namespace tdp
