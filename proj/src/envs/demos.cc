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

#include "tdp/envs/demos.h"

#include <algorithm>
#include <fstream>

namespace tdp {

DemonstrationEpisode RecordExpertEpisode(Environment& env, std::uint64_t seed,
                                         const DisturbanceScript& script) {
  DemonstrationEpisode e;
  e.env = env.id();
  e.seed = seed;
  e.dt = env.dt();
  e.obs.push_back(env.Observe());
  for (int t = 0; t < env.max_steps(); ++t) {
    if (env.ends_on_success() && env.Success()) break;
    const std::vector<double> a = env.ExpertAction();
    env.Step(a);
    if (!script.empty()) env.Perturb(script.At(t, env.state_dim()));
    e.act.push_back(a);
    e.obs.push_back(env.Observe());
    if (env.OutOfWorkspace()) break;
  }
  e.meta = {{"expert", "scripted"},
            {"length_mode", "obs_eq_act_plus_one"},
            {"success", env.Success()},
            {"steps", static_cast<int>(e.act.size())}};
  return e;
}

std::vector<DemonstrationEpisode> GenerateDemos(const std::string& env_id, int n,
                                                std::uint64_t seed,
                                                const DemoOptions& options) {
  if (n < 1) throw EnvError("demo count must be at least 1");
  const DisturbanceGenerator gen = DisturbanceGenerator::Parse(options.disturbance);
  const std::uint64_t base = DeriveSeed(seed, RngStream::kDemo);
  std::vector<DemonstrationEpisode> demos;
  int attempts = 0;
  while (static_cast<int>(demos.size()) < n && attempts < 4 * n) {
    const std::uint64_t episode_seed = DeriveSeed(base, static_cast<std::uint64_t>(attempts));
    ++attempts;
    auto env = MakeEnvironment(env_id);
    Rng rng(episode_seed);
    env->Reset(rng);
    DisturbanceScript script = gen.Make(*env, env->max_steps(), rng);
    DemonstrationEpisode e = RecordExpertEpisode(*env, episode_seed, script);
    e.meta["disturbance"] = options.disturbance;
    if (e.meta["success"].get<bool>()) demos.push_back(std::move(e));
  }
  const double rate = static_cast<double>(demos.size()) / attempts;
  if (static_cast<int>(demos.size()) < n || rate < 0.5) {
    throw EnvError("expert success rate " + std::to_string(rate) + " over " +
                   std::to_string(attempts) + " attempts on " + env_id +
                   " is too low to build the demo set");
  }
  return demos;
}

NormalizationStats ComputeNormalization(const std::vector<DemonstrationEpisode>& demos) {
  if (demos.empty()) throw EnvError("cannot normalize an empty demo set");
  NormalizationStats s;
  const std::size_t no = demos[0].obs.at(0).size();
  const std::size_t na = demos[0].act.at(0).size();
  s.obs_min.assign(no, 1e300);
  s.obs_max.assign(no, -1e300);
  s.act_min.assign(na, 1e300);
  s.act_max.assign(na, -1e300);
  for (const auto& e : demos) {
    for (const auto& o : e.obs) {
      for (std::size_t i = 0; i < no; ++i) {
        s.obs_min[i] = std::min(s.obs_min[i], o[i]);
        s.obs_max[i] = std::max(s.obs_max[i], o[i]);
      }
    }
    for (const auto& a : e.act) {
      for (std::size_t i = 0; i < na; ++i) {
        s.act_min[i] = std::min(s.act_min[i], a[i]);
        s.act_max[i] = std::max(s.act_max[i], a[i]);
      }
    }
  }
  return s;
}

nlohmann::json EpisodeToJson(const DemonstrationEpisode& e) {
  return {{"env", e.env}, {"seed", e.seed}, {"dt", e.dt},
          {"obs", e.obs}, {"act", e.act},   {"meta", e.meta}};
}

DemonstrationEpisode EpisodeFromJson(const nlohmann::json& j) {
  DemonstrationEpisode e;
  e.env = j.at("env").get<std::string>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.dt = j.at("dt").get<double>();
  e.obs = j.at("obs").get<std::vector<std::vector<double>>>();
  e.act = j.at("act").get<std::vector<std::vector<double>>>();
  e.meta = j.value("meta", nlohmann::json::object());
  if (e.obs.size() != e.act.size() + 1 && e.obs.size() != e.act.size()) {
    throw EnvError("episode observation/action lengths are inconsistent");
  }
  return e;
}

void WriteDemos(const std::string& path, const std::vector<DemonstrationEpisode>& demos) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw EnvError("cannot open " + path + " for writing");
  for (const auto& e : demos) f << EpisodeToJson(e).dump() << "\n";
}

std::vector<DemonstrationEpisode> ReadDemos(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw EnvError("cannot open " + path);
  std::vector<DemonstrationEpisode> demos;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    demos.push_back(EpisodeFromJson(nlohmann::json::parse(line)));
  }
  return demos;
}

nlohmann::json NormalizationToJson(const NormalizationStats& s) {
  return {{"obs_min", s.obs_min}, {"obs_max", s.obs_max},
          {"act_min", s.act_min}, {"act_max", s.act_max}};
}

NormalizationStats NormalizationFromJson(const nlohmann::json& j) {
  NormalizationStats s;
  s.obs_min = j.at("obs_min").get<std::vector<double>>();
  s.obs_max = j.at("obs_max").get<std::vector<double>>();
  s.act_min = j.at("act_min").get<std::vector<double>>();
  s.act_max = j.at("act_max").get<std::vector<double>>();
  return s;
}

void WriteNormalization(const std::string& path, const NormalizationStats& stats) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw EnvError("cannot open " + path + " for writing");
  f << NormalizationToJson(stats).dump(2) << "\n";
}

NormalizationStats ReadNormalization(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw EnvError("cannot open " + path);
  return NormalizationFromJson(nlohmann::json::parse(f));
}

std::string NormalizationPathFor(const std::string& demos_path) {
  const std::string ext = ".jsonl";
  if (demos_path.size() > ext.size() &&
      demos_path.compare(demos_path.size() - ext.size(), ext.size(), ext) == 0) {
    return demos_path.substr(0, demos_path.size() - ext.size()) + ".norm.json";
  }
  return demos_path + ".norm.json";
}

}  // namespace tdp
