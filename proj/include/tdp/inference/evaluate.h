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

#ifndef TDP_INFERENCE_EVALUATE_H_
#define TDP_INFERENCE_EVALUATE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdp/envs/disturbance.h"
#include "tdp/inference/controller.h"

namespace tdp {

struct EvalMetrics {
  std::string env;
  std::string mode;
  std::string disturbance;
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_score = 0.0;
  // over successful episodes only; absent when nothing succeeded
  std::optional<double> mean_steps;
  std::optional<int> min_steps;
  // mean per-call wall-clock latency by phase; absent when never invoked
  std::optional<double> denoise_latency_us;
  std::optional<double> stream_latency_us;
};

// episode i uses environment seed DeriveSeed(DeriveSeed(seed, kEnvironment), i)
// and denoise seed DeriveSeed(DeriveSeed(seed, kDenoise), i)
std::uint64_t EpisodeSeed(std::uint64_t seed, RngStream stream, int episode);

EvalMetrics Evaluate(const std::string& env_id, const DualTimePolicy& policy,
                     const ControllerConfig& config, int episodes,
                     const DisturbanceGenerator& disturbance, std::uint64_t seed,
                     std::vector<RolloutRecord>* records = nullptr);

// the scripted expert driven through the same episode protocol
EvalMetrics EvaluateExpert(const std::string& env_id, int episodes,
                           const DisturbanceGenerator& disturbance, std::uint64_t seed,
                           int max_steps = 0, std::vector<RolloutRecord>* records = nullptr);

EvalMetrics SummarizeRollouts(const std::vector<RolloutRecord>& records,
                              const std::string& disturbance);

// deterministic fields only (no latencies)
nlohmann::json MetricsToJson(const EvalMetrics& m);
nlohmann::json MetricsTimingToJson(const EvalMetrics& m);
// aligned plain-text table, one row per entry
// |with_timing| adds the wall-clock latency columns
std::string MetricsTable(const std::vector<EvalMetrics>& rows, bool with_timing = true);

}  // namespace tdp

#endif  // TDP_INFERENCE_EVALUATE_H_
