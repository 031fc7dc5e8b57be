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

#include "tdp/inference/evaluate.h"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace tdp {
namespace {

nlohmann::json Optional(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string Cell(const std::optional<double>& v, int precision) {
  if (!v) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << *v;
  return out.str();
}

}  // namespace

std::uint64_t EpisodeSeed(std::uint64_t seed, RngStream stream, int episode) {
  return DeriveSeed(DeriveSeed(seed, stream), static_cast<std::uint64_t>(episode));
}

EvalMetrics SummarizeRollouts(const std::vector<RolloutRecord>& records,
                              const std::string& disturbance) {
  EvalMetrics m;
  m.disturbance = disturbance;
  m.episodes = static_cast<int>(records.size());
  if (records.empty()) return m;
  m.env = records.front().env;
  m.mode = records.front().mode;
  double score_sum = 0.0, steps_sum = 0.0;
  double denoise_sum = 0.0, stream_sum = 0.0;
  int denoise_n = 0, stream_n = 0;
  for (const RolloutRecord& r : records) {
    score_sum += r.score;
    if (r.success) {
      ++m.successes;
      const int steps = r.steps_to_success.value_or(static_cast<int>(r.steps.size()));
      steps_sum += steps;
      m.min_steps = m.min_steps ? std::min(*m.min_steps, steps) : steps;
    }
    for (const RolloutStep& s : r.steps) {
      if (s.latency_us <= 0.0) continue;
      if (s.phase == Phase::kDenoise) {
        denoise_sum += s.latency_us;
        ++denoise_n;
      } else {
        stream_sum += s.latency_us;
        ++stream_n;
      }
    }
  }
  m.success_rate = static_cast<double>(m.successes) / m.episodes;
  m.mean_score = score_sum / m.episodes;
  if (m.successes > 0) m.mean_steps = steps_sum / m.successes;
  if (denoise_n > 0) m.denoise_latency_us = denoise_sum / denoise_n;
  if (stream_n > 0) m.stream_latency_us = stream_sum / stream_n;
  return m;
}

EvalMetrics Evaluate(const std::string& env_id, const DualTimePolicy& policy,
                     const ControllerConfig& config, int episodes,
                     const DisturbanceGenerator& disturbance, std::uint64_t seed,
                     std::vector<RolloutRecord>* records) {
  if (episodes < 1) throw InferenceError("evaluation needs at least one episode");
  std::vector<RolloutRecord> local;
  for (int i = 0; i < episodes; ++i) {
    std::unique_ptr<Environment> env = MakeEnvironment(env_id);
    Rng env_rng(EpisodeSeed(seed, RngStream::kEnvironment, i));
    Rng denoise_rng(EpisodeSeed(seed, RngStream::kDenoise, i));
    env->Reset(env_rng);
    const int horizon = config.max_steps > 0 ? config.max_steps : env->eval_steps();
    const DisturbanceScript script = disturbance.Make(*env, horizon, env_rng);
    RolloutRecord r = RunController(*env, policy, config, script, denoise_rng);
    r.seed = seed;
    local.push_back(std::move(r));
  }
  EvalMetrics m = SummarizeRollouts(local, disturbance.spec());
  if (records) *records = std::move(local);
  return m;
}

EvalMetrics EvaluateExpert(const std::string& env_id, int episodes,
                           const DisturbanceGenerator& disturbance, std::uint64_t seed,
                           int max_steps, std::vector<RolloutRecord>* records) {
  if (episodes < 1) throw InferenceError("evaluation needs at least one episode");
  std::vector<RolloutRecord> local;
  for (int i = 0; i < episodes; ++i) {
    std::unique_ptr<Environment> env = MakeEnvironment(env_id);
    Rng env_rng(EpisodeSeed(seed, RngStream::kEnvironment, i));
    env->Reset(env_rng);
    const int horizon = max_steps > 0 ? max_steps : env->eval_steps();
    const DisturbanceScript script = disturbance.Make(*env, horizon, env_rng);
    RolloutRecord r = RunFeedbackLaw(
        *env, [](const Environment& e) { return e.ExpertAction(); }, script, horizon, "expert");
    r.seed = seed;
    local.push_back(std::move(r));
  }
  EvalMetrics m = SummarizeRollouts(local, disturbance.spec());
  if (records) *records = std::move(local);
  return m;
}

nlohmann::json MetricsToJson(const EvalMetrics& m) {
  nlohmann::json j = {{"env", m.env},
                      {"mode", m.mode},
                      {"disturbance", m.disturbance},
                      {"episodes", m.episodes},
                      {"successes", m.successes},
                      {"success_rate", m.success_rate},
                      {"mean_score", m.mean_score},
                      {"mean_steps_to_success", Optional(m.mean_steps)}};
  j["min_steps_to_success"] = m.min_steps ? nlohmann::json(*m.min_steps) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json MetricsTimingToJson(const EvalMetrics& m) {
  return {{"env", m.env},
          {"mode", m.mode},
          {"disturbance", m.disturbance},
          {"denoise_latency_us", Optional(m.denoise_latency_us)},
          {"stream_latency_us", Optional(m.stream_latency_us)}};
}

std::string MetricsTable(const std::vector<EvalMetrics>& rows, bool with_timing) {
  std::vector<std::string> header = {"env",     "mode",  "disturbance", "episodes",
                                     "success", "score", "mean_steps",  "min_steps"};
  if (with_timing) {
    header.push_back("denoise_us");
    header.push_back("stream_us");
  }
  std::vector<std::vector<std::string>> cells = {header};
  for (const EvalMetrics& m : rows) {
    cells.push_back({m.env, m.mode, m.disturbance, std::to_string(m.episodes),
                     Cell(m.success_rate, 3), Cell(m.mean_score, 3), Cell(m.mean_steps, 1),
                     m.min_steps ? std::to_string(*m.min_steps) : "-"});
    if (with_timing) {
      cells.back().push_back(Cell(m.denoise_latency_us, 1));
      cells.back().push_back(Cell(m.stream_latency_us, 1));
    }
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      out << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  return out.str();
}

}  // namespace tdp
