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

#include "tdp/cli/commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdp/cli/config.h"
#include "tdp/cli/manifest.h"
#include "tdp/cli/serve.h"
#include "tdp/envs/demos.h"
#include "tdp/envs/disturbance.h"
#include "tdp/envs/environment.h"
#include "tdp/envs/point_mass.h"
#include "tdp/envs/rng.h"
#include "tdp/inference/controller.h"
#include "tdp/inference/evaluate.h"
#include "tdp/policy/dual_time_policy.h"
#include "tdp/stability/bounds.h"
#include "tdp/stability/verify.h"
#include "tdp/tensornet/checkpoint.h"
#include "tdp/training/chunks.h"
#include "tdp/training/trainer.h"

namespace tdp {
namespace {

namespace fs = std::filesystem;

const std::set<std::string>& InputFlags() {
  static const std::set<std::string> flags = {"--demos", "--checkpoint", "--config",
                                              "--resume", "--manifest"};
  return flags;
}

std::vector<std::string> SplitEquals(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const std::string& a : args) {
    const std::size_t eq = a.find('=');
    if (a.rfind("--", 0) == 0 && eq != std::string::npos) {
      out.push_back(a.substr(0, eq));
      out.push_back(a.substr(eq + 1));
    } else {
      out.push_back(a);
    }
  }
  return out;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// replaces the extension of |out|: results.json -> results<suffix>
std::string SidePath(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  p.replace_extension(suffix);
  return p.string();
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void WriteText(const std::string& path, const std::string& text) {
  EnsureParent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string FormatDouble(double x, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

// state shared by every subcommand invocation
struct Invocation {
  std::vector<std::string> args;  // after "--k=v" splitting, without program name
  std::string command;
};

struct ManifestSpec {
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::string out;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> unhashed;
};

void WriteRunManifest(const Invocation& inv, const ManifestSpec& spec) {
  RunManifest m;
  m.command = inv.command;
  m.args = CanonicalArgs(inv.args, spec.seed);
  m.seed = spec.seed;
  m.config = spec.config;
  m.out = spec.out;
  for (const std::string& in : spec.inputs) {
    m.inputs.push_back({fs::absolute(in).lexically_normal().string(), Sha256File(in)});
  }
  DigestOutputs(m, spec.outputs);
  for (const std::string& u : spec.unhashed) {
    m.unhashed.push_back(fs::path(u).filename().string());
  }
  WriteManifest(ManifestPathFor(spec.out), m);
}

RunConfig LoadConfigOrDefault(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return LoadRunConfig(path);
}

std::optional<std::uint64_t> FlagSeed(const CLI::Option* opt, std::uint64_t value) {
  if (opt->count() > 0) return value;
  return std::nullopt;
}

// ---------------------------------------------------------------- demo-gen

struct DemoGenArgs {
  std::string env;
  int n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string disturb = "none";
  std::string config;
};

int RunDemoGen(const Invocation& inv, const DemoGenArgs& a, const CLI::Option* seed_opt,
               const CLI::Option* n_opt) {
  const RunConfig cfg = LoadConfigOrDefault(a.config);
  const std::string env_id = !a.env.empty() ? a.env : cfg.env;
  if (env_id.empty()) throw UsageError("demo-gen requires --env (or a config env)");
  const int n = n_opt->count() > 0 ? a.n : cfg.demo_count;
  if (n < 1) throw UsageError("--n must be positive");
  const std::uint64_t seed = ResolveSeed(FlagSeed(seed_opt, a.seed), cfg.seed);

  DemoOptions options;
  options.disturbance = a.disturb;
  const std::vector<DemonstrationEpisode> demos = GenerateDemos(env_id, n, seed, options);
  EnsureParent(a.out);
  WriteDemos(a.out, demos);
  const std::string norm_path = NormalizationPathFor(a.out);
  WriteNormalization(norm_path, ComputeNormalization(demos));

  std::size_t transitions = 0;
  for (const DemonstrationEpisode& d : demos) transitions += d.act.size();
  std::cout << "wrote " << demos.size() << " demonstrations (" << transitions
            << " transitions) of " << env_id << " to " << a.out << "\n";

  ManifestSpec spec;
  spec.seed = seed;
  spec.config = cfg.raw;
  spec.out = a.out;
  if (!a.config.empty()) spec.inputs.push_back(a.config);
  spec.outputs = {a.out, norm_path};
  WriteRunManifest(inv, spec);
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string demos;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int steps = 0;
  std::string resume;
};

int RunTrain(const Invocation& inv, const TrainArgs& a, const CLI::Option* seed_opt,
             const CLI::Option* steps_opt) {
  const RunConfig cfg = LoadConfigOrDefault(a.config);
  HyperParams hyper = cfg.hyper;
  if (steps_opt->count() > 0) hyper.steps = a.steps;
  hyper.Validate();
  const std::uint64_t seed = ResolveSeed(FlagSeed(seed_opt, a.seed), cfg.seed);

  const std::vector<DemonstrationEpisode> demos = ReadDemos(a.demos);
  if (demos.empty()) throw UsageError("no demonstrations in " + a.demos);
  const std::string env_id = demos.front().env;
  if (!cfg.env.empty() && cfg.env != env_id) {
    throw UsageError("config env '" + cfg.env + "' does not match demonstrations '" + env_id +
                     "'");
  }
  std::vector<std::string> inputs = {a.demos};
  const std::string norm_path = NormalizationPathFor(a.demos);
  NormalizationStats stats;
  if (fs::exists(norm_path)) {
    stats = ReadNormalization(norm_path);
    inputs.push_back(norm_path);
  } else {
    stats = ComputeNormalization(demos);
  }
  const Normalizer normalizer(stats);
  const ChunkDataset data(demos, normalizer, hyper.pred_horizon, hyper.obs_horizon,
                          hyper.slicing);
  spdlog::info("training on {} chunks from {} demonstrations of {}", data.size(), demos.size(),
               env_id);

  Trainer trainer(data, hyper, normalizer, seed);
  trainer.set_meta({{"env", env_id}});
  if (!a.resume.empty()) {
    trainer.Resume(ReadCheckpoint(a.resume));
    inputs.push_back(a.resume);
    spdlog::info("resumed from {} at step {}", a.resume, trainer.step());
  }
  if (!a.config.empty()) inputs.push_back(a.config);

  std::ostringstream log;
  std::ostringstream timing;
  const auto start = std::chrono::steady_clock::now();
  const auto on_log = [&](const TrainLogEntry& e) {
    log << TrainLogEntryToJson(e).dump() << '\n';
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timing << nlohmann::json{{"step", e.step}, {"wall_s", wall}}.dump() << '\n';
    spdlog::info("step {:6d}  L_diff {:.6f}  L_stream {:.6f}  loss {:.6f}", e.step, e.l_diff,
                 e.l_stream, e.loss);
  };

  const std::string log_path = SidePath(a.out, ".log.jsonl");
  const std::string timing_path = SidePath(a.out, ".timing.jsonl");
  ManifestSpec spec;
  spec.seed = seed;
  spec.config = cfg.raw;
  spec.out = a.out;
  spec.inputs = inputs;
  spec.outputs = {a.out, log_path};
  spec.unhashed = {timing_path};

  int code = kExitOk;
  try {
    trainer.Run(on_log);
    EnsureParent(a.out);
    trainer.Save(a.out);
  } catch (const TrainingDiverged& e) {
    spdlog::error("training diverged at step {}: {}; writing last good checkpoint", e.step,
                  e.what());
    EnsureParent(a.out);
    WriteCheckpoint(a.out, trainer.LastGoodCheckpoint());
    code = kExitRuntimeFault;
  }
  WriteText(log_path, log.str());
  WriteText(timing_path, timing.str());
  WriteRunManifest(inv, spec);
  if (code == kExitOk) {
    std::cout << "trained " << trainer.step() << " steps"
              << (trainer.stopped_on_plateau() ? " (plateau stop)" : "") << "; checkpoint "
              << a.out << "\n";
  }
  return code;
}

// ---------------------------------------------------------- policy loading

struct LoadedPolicy {
  CheckpointData data;
  std::string env;
  std::optional<int> action_horizon;
};

LoadedPolicy LoadPolicyCheckpoint(const std::string& path) {
  LoadedPolicy p;
  p.data = ReadCheckpoint(path);
  if (p.data.meta.contains("env")) p.env = p.data.meta.at("env").get<std::string>();
  if (p.data.meta.contains("hyper")) {
    p.action_horizon = p.data.meta.at("hyper").at("action_horizon").get<int>();
  }
  return p;
}

struct ControllerFlags {
  int ddim_steps = 0;
  int action_horizon = 0;
  std::string chunk_synthesis;
  int max_steps = 0;
  CLI::Option* ddim_opt = nullptr;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* max_steps_opt = nullptr;

  void Register(CLI::App* app) {
    ddim_opt = app->add_option("--ddim-steps", ddim_steps, "DDIM steps T_ddim");
    horizon_opt = app->add_option("--action-horizon", action_horizon, "action horizon H_a");
    app->add_option("--chunk-synthesis", chunk_synthesis,
                    "chunk_only synthesis: denoise_planned, stream_planned or frozen");
    max_steps_opt = app->add_option("--max-steps", max_steps, "episode length override");
  }

  ControllerConfig Resolve(const RunConfig& cfg, const LoadedPolicy& policy,
                           bool config_given) const {
    ControllerConfig c = cfg.controller;
    const bool config_horizon =
        config_given && cfg.raw.contains("controller") &&
        cfg.raw.at("controller").contains("action_horizon");
    if (!config_horizon && policy.action_horizon) c.action_horizon = *policy.action_horizon;
    if (ddim_opt->count() > 0) c.ddim_steps = ddim_steps;
    if (horizon_opt->count() > 0) c.action_horizon = action_horizon;
    if (max_steps_opt->count() > 0) c.max_steps = max_steps;
    try {
      if (!chunk_synthesis.empty()) c.chunk_synthesis = ParseChunkSynthesis(chunk_synthesis);
      if (policy.data.meta.contains("policy")) {
        c.Validate(PolicyConfigFromJson(policy.data.meta.at("policy")));
      }
    } catch (const InferenceError& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

std::vector<ControlMode> ParseModes(const std::string& list) {
  std::vector<ControlMode> modes;
  for (const std::string& m : SplitList(list)) {
    if (m == "all") {
      modes = {ControlMode::kTube, ControlMode::kChunkOnly, ControlMode::kStreamingOnly};
      continue;
    }
    try {
      modes.push_back(ParseControlMode(m));
    } catch (const InferenceError& e) {
      throw UsageError(e.what());
    }
  }
  if (modes.empty()) throw UsageError("no control modes given");
  return modes;
}

DisturbanceGenerator ParseDisturbance(const std::string& spec) {
  try {
    return DisturbanceGenerator::Parse(spec);
  } catch (const DisturbanceError& e) {
    throw UsageError(e.what());
  }
}

std::string ResolveEnv(const std::string& flag, const RunConfig& cfg,
                       const LoadedPolicy& policy) {
  if (!flag.empty()) return flag;
  if (!cfg.env.empty()) return cfg.env;
  if (!policy.env.empty()) return policy.env;
  throw UsageError("environment unknown: pass --env");
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string env;
  std::string modes = "tube";
  int episodes = 0;
  std::string disturb;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  bool plot = false;
  ControllerFlags controller;
};

void AppendTaggedRollout(std::ostringstream& out, const RolloutRecord& r, int episode) {
  std::istringstream lines(r.ToJsonl());
  std::string line;
  while (std::getline(lines, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    j["mode"] = r.mode;
    j["episode"] = episode;
    out << j.dump() << '\n';
  }
}

std::string PlotCsv(const std::vector<std::vector<RolloutRecord>>& by_mode) {
  std::ostringstream csv;
  csv << std::setprecision(10);
  bool header = false;
  for (const auto& records : by_mode) {
    for (std::size_t e = 0; e < records.size(); ++e) {
      const RolloutRecord& r = records[e];
      if (r.steps.empty()) continue;
      const std::size_t n_o = r.steps.front().obs.size();
      const std::size_t n_u = r.steps.front().action.size();
      if (!header) {
        csv << "mode,episode,t,cycle,phase,t2";
        for (std::size_t i = 0; i < n_o; ++i) csv << ",obs_" << i;
        for (std::size_t i = 0; i < n_u; ++i) csv << ",action_" << i;
        for (std::size_t i = 0; i < n_o; ++i) csv << ",disturbance_" << i;
        csv << "\n";
        header = true;
      }
      for (const RolloutStep& s : r.steps) {
        csv << r.mode << ',' << e << ',' << s.t << ',' << s.cycle << ',' << PhaseName(s.phase)
            << ',' << s.t2;
        for (double x : s.obs) csv << ',' << x;
        for (double x : s.action) csv << ',' << x;
        for (std::size_t i = 0; i < n_o; ++i) {
          csv << ',' << (i < s.disturbance.size() ? s.disturbance[i] : 0.0);
        }
        csv << "\n";
      }
    }
  }
  return csv.str();
}

int RunEval(const Invocation& inv, const EvalArgs& a, const CLI::Option* seed_opt,
            const CLI::Option* episodes_opt) {
  const RunConfig cfg = LoadConfigOrDefault(a.config);
  const LoadedPolicy loaded = LoadPolicyCheckpoint(a.checkpoint);
  const DualTimePolicy policy = DualTimePolicy::FromCheckpoint(loaded.data);
  const std::string env_id = ResolveEnv(a.env, cfg, loaded);
  const ControllerConfig base = a.controller.Resolve(cfg, loaded, !a.config.empty());
  const int episodes = episodes_opt->count() > 0 ? a.episodes : cfg.eval_episodes;
  if (episodes < 1) throw UsageError("--episodes must be positive");
  const std::string disturb = !a.disturb.empty() ? a.disturb : cfg.eval_disturbance;
  const DisturbanceGenerator generator = ParseDisturbance(disturb);
  const std::uint64_t seed = ResolveSeed(FlagSeed(seed_opt, a.seed), cfg.seed);

  std::vector<EvalMetrics> rows;
  std::vector<std::vector<RolloutRecord>> by_mode;
  nlohmann::json metrics = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  std::ostringstream rollouts;
  for (ControlMode mode : ParseModes(a.modes)) {
    ControllerConfig c = base;
    c.mode = mode;
    std::vector<RolloutRecord> records;
    rows.push_back(Evaluate(env_id, policy, c, episodes, generator, seed, &records));
    metrics.push_back(MetricsToJson(rows.back()));
    timing.push_back(MetricsTimingToJson(rows.back()));
    for (std::size_t e = 0; e < records.size(); ++e) {
      AppendTaggedRollout(rollouts, records[e], static_cast<int>(e));
    }
    by_mode.push_back(std::move(records));
  }

  nlohmann::json controller = ControllerConfigToJson(base);
  controller.erase("mode");
  const nlohmann::json results = {{"env", env_id},
                                  {"checkpoint_sha256", Sha256File(a.checkpoint)},
                                  {"episodes", episodes},
                                  {"disturbance", disturb},
                                  {"seed", seed},
                                  {"controller", controller},
                                  {"metrics", metrics}};
  const std::string table = MetricsTable(rows, false);
  const std::string txt_path = SidePath(a.out, ".txt");
  const std::string rollouts_path = SidePath(a.out, ".rollouts.jsonl");
  const std::string timing_path = SidePath(a.out, ".timing.json");
  WriteText(a.out, results.dump(2) + "\n");
  WriteText(txt_path, table);
  WriteText(rollouts_path, rollouts.str());
  WriteText(timing_path, nlohmann::json{{"metrics", timing}}.dump(2) + "\n");
  std::cout << MetricsTable(rows, true);

  ManifestSpec spec;
  spec.seed = seed;
  spec.config = cfg.raw;
  spec.out = a.out;
  spec.inputs = {a.checkpoint};
  if (!a.config.empty()) spec.inputs.push_back(a.config);
  spec.outputs = {a.out, txt_path, rollouts_path};
  spec.unhashed = {timing_path};
  if (a.plot) {
    const std::string plot_path = SidePath(a.out, ".trajectories.csv");
    WriteText(plot_path, PlotCsv(by_mode));
    spec.outputs.push_back(plot_path);
  }
  WriteRunManifest(inv, spec);
  return kExitOk;
}

// ------------------------------------------------------------- ablate-ddim

struct AblateArgs {
  std::string checkpoint;
  std::string env;
  std::string modes = "tube,chunk_only";
  std::string ddim_list = "1,2,3,5,10";
  int trials = 5;
  int episodes = 20;
  std::string disturb;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  ControllerFlags controller;
};

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double StdDev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

int RunAblate(const Invocation& inv, const AblateArgs& a, const CLI::Option* seed_opt) {
  const RunConfig cfg = LoadConfigOrDefault(a.config);
  const LoadedPolicy loaded = LoadPolicyCheckpoint(a.checkpoint);
  const DualTimePolicy policy = DualTimePolicy::FromCheckpoint(loaded.data);
  const std::string env_id = ResolveEnv(a.env, cfg, loaded);
  const ControllerConfig base = a.controller.Resolve(cfg, loaded, !a.config.empty());
  const std::string disturb = !a.disturb.empty() ? a.disturb : cfg.eval_disturbance;
  const DisturbanceGenerator generator = ParseDisturbance(disturb);
  const std::uint64_t seed = ResolveSeed(FlagSeed(seed_opt, a.seed), cfg.seed);
  if (a.trials < 1 || a.episodes < 1) throw UsageError("--trials and --episodes must be positive");

  std::vector<int> ddim_steps;
  for (const std::string& s : SplitList(a.ddim_list)) ddim_steps.push_back(std::stoi(s));
  if (ddim_steps.empty()) throw UsageError("--ddim-list is empty");
  const int reference_steps = *std::max_element(ddim_steps.begin(), ddim_steps.end());
  const std::vector<ControlMode> modes = ParseModes(a.modes);

  struct Cell {
    int ddim = 0;
    std::string mode;
    std::vector<double> scores, success;
    std::vector<double> denoise_us, stream_us;
  };
  std::vector<Cell> cells;
  std::ostringstream csv;
  csv << std::setprecision(10) << "ddim_steps,mode,trial,mean_score,success_rate\n";
  for (int t_ddim : ddim_steps) {
    for (ControlMode mode : modes) {
      Cell cell;
      cell.ddim = t_ddim;
      cell.mode = ControlModeName(mode);
      ControllerConfig c = base;
      c.mode = mode;
      c.ddim_steps = t_ddim;
      for (int trial = 0; trial < a.trials; ++trial) {
        const std::uint64_t trial_seed =
            DeriveSeed(seed, static_cast<std::uint64_t>(1000 + trial));
        const EvalMetrics m = Evaluate(env_id, policy, c, a.episodes, generator, trial_seed);
        cell.scores.push_back(m.mean_score);
        cell.success.push_back(m.success_rate);
        if (m.denoise_latency_us) cell.denoise_us.push_back(*m.denoise_latency_us);
        if (m.stream_latency_us) cell.stream_us.push_back(*m.stream_latency_us);
        csv << t_ddim << ',' << cell.mode << ',' << trial << ',' << m.mean_score << ','
            << m.success_rate << "\n";
      }
      spdlog::info("T_ddim {:2d} {:>14s}: score {:.3f}", t_ddim, cell.mode, Mean(cell.scores));
      cells.push_back(std::move(cell));
    }
  }

  const auto reference_score = [&](const std::string& mode) {
    for (const Cell& c : cells) {
      if (c.ddim == reference_steps && c.mode == mode) return Mean(c.scores);
    }
    return 0.0;
  };
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  std::ostringstream txt;
  txt << std::left << std::setw(8) << "T_ddim" << std::setw(16) << "mode" << std::setw(12)
      << "score" << std::setw(10) << "std" << std::setw(10) << "success" << "vs T="
      << reference_steps << "\n";
  for (const Cell& c : cells) {
    const double ref = reference_score(c.mode);
    const double mean = Mean(c.scores);
    const nlohmann::json relative = ref > 0.0 ? nlohmann::json(mean / ref) : nlohmann::json(nullptr);
    rows.push_back({{"ddim_steps", c.ddim},
                    {"mode", c.mode},
                    {"trial_scores", c.scores},
                    {"mean_score", mean},
                    {"std_score", StdDev(c.scores)},
                    {"success_rate", Mean(c.success)},
                    {"relative_to_reference", relative}});
    nlohmann::json t = {{"ddim_steps", c.ddim}, {"mode", c.mode}};
    t["denoise_latency_us"] = c.denoise_us.empty() ? nlohmann::json(nullptr)
                                                   : nlohmann::json(Mean(c.denoise_us));
    t["stream_latency_us"] = c.stream_us.empty() ? nlohmann::json(nullptr)
                                                 : nlohmann::json(Mean(c.stream_us));
    timing.push_back(t);
    txt << std::left << std::setw(8) << c.ddim << std::setw(16) << c.mode << std::setw(12)
        << FormatDouble(mean, 4) << std::setw(10) << FormatDouble(StdDev(c.scores), 3)
        << std::setw(10) << FormatDouble(Mean(c.success), 3)
        << (ref > 0.0 ? FormatDouble(mean / ref, 4) : std::string("n/a")) << "\n";
  }

  const nlohmann::json results = {{"env", env_id},
                                  {"checkpoint_sha256", Sha256File(a.checkpoint)},
                                  {"disturbance", disturb},
                                  {"trials", a.trials},
                                  {"episodes", a.episodes},
                                  {"reference_ddim_steps", reference_steps},
                                  {"seed", seed},
                                  {"rows", rows}};
  const std::string txt_path = SidePath(a.out, ".txt");
  const std::string csv_path = SidePath(a.out, ".csv");
  const std::string timing_path = SidePath(a.out, ".timing.json");
  WriteText(a.out, results.dump(2) + "\n");
  WriteText(txt_path, txt.str());
  WriteText(csv_path, csv.str());
  WriteText(timing_path, nlohmann::json{{"rows", timing}}.dump(2) + "\n");
  std::cout << txt.str();

  ManifestSpec spec;
  spec.seed = seed;
  spec.config = cfg.raw;
  spec.out = a.out;
  spec.inputs = {a.checkpoint};
  if (!a.config.empty()) spec.inputs.push_back(a.config);
  spec.outputs = {a.out, txt_path, csv_path};
  spec.unhashed = {timing_path};
  WriteRunManifest(inv, spec);
  return kExitOk;
}

// -------------------------------------------------------- verify-stability

struct VerifyArgs {
  std::string out;
  std::string checkpoint;
  std::string demos;
  std::string env;
  std::string config;
  std::string suites = "a,b,c,d";
  int episodes = 50;
  std::string disturb;
  double declare_lx = 0.0;
  double lambda_corr = 0.5;
  double eps_a = 0.05;
  double w_bar = 0.01;
  double eps_d = 0.01;
  int cycles = 200;
  int draws = 10000;
  std::uint64_t seed = 0;
  ControllerFlags controller;
};

struct SuiteOutcome {
  nlohmann::json report;
  std::string text;
  bool pass = true;
  std::string failure;  // first violation description
};

// closed form against the iterated recursion V_{j+1} = L_x V_j + c
SuiteOutcome SuiteConsistency(int draws, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v0 = rng.Uniform(0.0, 10.0);
    const double lx = rng.Uniform(0.0, 1.0);
    const double c = rng.Uniform(0.0, 1.0);
    const int j = static_cast<int>(rng.UniformInt(0, 100));
    double v = v0;
    for (int s = 0; s < j; ++s) v = lx * v + c;
    const double rel = std::abs(StreamingBound(v0, j, lx, c) - v) / std::max(1.0, std::abs(v));
    worst = std::max(worst, rel);
  }
  SuiteOutcome o;
  o.pass = worst <= 1e-12;
  o.report = {{"draws", draws}, {"max_relative_error", worst}, {"pass", o.pass}};
  o.text = "(a) closed form vs recursion over " + std::to_string(draws) +
           " draws: max relative error " + FormatDouble(worst, 3) + (o.pass ? "  PASS" : "  FAIL");
  if (!o.pass) o.failure = "closed-form streaming bound disagrees with its recursion";
  return o;
}

SuiteOutcome SuiteTrainedRollouts(const VerifyArgs& a, const RunConfig& cfg,
                                  std::uint64_t seed, std::vector<std::string>& inputs) {
  if (a.demos.empty()) throw UsageError("suite (b) needs --demos for the reference trajectory");
  const LoadedPolicy loaded = LoadPolicyCheckpoint(a.checkpoint);
  const DualTimePolicy policy = DualTimePolicy::FromCheckpoint(loaded.data);
  const std::string env_id = ResolveEnv(a.env, cfg, loaded);
  const std::unique_ptr<Environment> env = MakeEnvironment(env_id);
  const auto* point_mass = dynamic_cast<const PointMass*>(env.get());
  if (point_mass == nullptr) throw UsageError("suite (b) requires a point-mass environment");
  const std::vector<DemonstrationEpisode> demos = ReadDemos(a.demos);
  if (demos.empty()) throw UsageError("no demonstrations in " + a.demos);
  inputs.push_back(a.checkpoint);
  inputs.push_back(a.demos);

  const ControllerConfig controller = a.controller.Resolve(cfg, loaded, !a.config.empty());
  StabilityConstants constants = PointMassConstants(*point_mass, controller.action_horizon);
  if (a.declare_lx > 0.0) constants.lipschitz_x = a.declare_lx;
  const std::string disturb = !a.disturb.empty() ? a.disturb : "none";
  std::vector<RolloutRecord> records;
  Evaluate(env_id, policy, controller, a.episodes, ParseDisturbance(disturb), seed,
           &records);

  SuiteOutcome o;
  int violations = 0;
  int checked = 0;
  double eps_a = 0.0;
  double max_error = 0.0;
  nlohmann::json first = nullptr;
  for (std::size_t e = 0; e < records.size(); ++e) {
    const StreamingReport r = VerifyStreaming(records[e], demos.front(), constants);
    violations += r.violations;
    checked += static_cast<int>(r.steps.size());
    eps_a = std::max(eps_a, r.measured_eps_a);
    max_error = std::max(max_error, r.max_error);
    if (r.first_violation && first.is_null()) {
      const StreamingStepCheck& s = r.steps[*r.first_violation];
      first = {{"episode", e}, {"t", s.t}, {"next_error", s.next_error}, {"bound", s.bound}};
      o.failure = "episode " + std::to_string(e) + " step " + std::to_string(s.t) +
                  ": |e_{t+1}| = " + FormatDouble(s.next_error, 9) + " > bound " +
                  FormatDouble(s.bound, 9);
    }
  }
  o.pass = violations == 0;
  o.report = {{"env", env_id},
              {"episodes", records.size()},
              {"steps_checked", checked},
              {"violations", violations},
              {"first_violation", first},
              {"declared_lipschitz_x", constants.lipschitz_x},
              {"true_lipschitz_x", point_mass->lipschitz_x()},
              {"lipschitz_u", constants.lipschitz_u},
              {"measured_eps_a", eps_a},
              {"max_error", max_error},
              {"pass", o.pass}};
  o.text = "(b) trained rollouts: " + std::to_string(records.size()) + " episodes, " +
           std::to_string(checked) + " steps, " + std::to_string(violations) +
           " violations, measured eps_a " + FormatDouble(eps_a, 4) + (o.pass ? "  PASS" : "  FAIL");
  return o;
}

SuiteOutcome SuiteCycles(const PointMass& env, const StabilityConstants& constants,
                         int cycles, double initial_error, std::uint64_t seed, bool adversarial,
                         const std::string& label) {
  OracleCorrectorOptions options;
  options.cycles = cycles;
  options.initial_error = initial_error;
  options.seed = seed;
  options.adversarial = adversarial;
  const CycleReport r = VerifyCycles(env, constants, options);
  SuiteOutcome o;
  o.pass = r.pass;
  o.report = CycleReportToJson(r);
  o.report.erase("cycles");
  o.report["pass"] = r.pass;
  o.text = label + ": " + std::to_string(r.cycles.size()) + " cycles, " +
           std::to_string(r.violations) + " violations, tail max " +
           FormatDouble(r.tail_max, 4) + " vs limit " + FormatDouble(r.limit, 4) +
           (o.pass ? "  PASS" : "  FAIL");
  for (const CycleCheck& c : r.cycles) {
    if (!c.ok) {
      o.failure = label + " cycle " + std::to_string(c.k) + ": z = " +
                  FormatDouble(c.z_next, 9) + " > alpha z + beta = " + FormatDouble(c.z_bound, 9);
      break;
    }
  }
  return o;
}

int RunVerify(const Invocation& inv, const VerifyArgs& a, const CLI::Option* seed_opt) {
  const RunConfig cfg = LoadConfigOrDefault(a.config);
  const std::uint64_t seed = ResolveSeed(FlagSeed(seed_opt, a.seed), cfg.seed);
  std::set<std::string> suites;
  for (const std::string& s : SplitList(a.suites)) {
    if (s != "a" && s != "b" && s != "c" && s != "d") throw UsageError("unknown suite " + s);
    suites.insert(s);
  }
  if (suites.count("b") > 0 && a.checkpoint.empty()) {
    spdlog::info("suite (b) skipped: no --checkpoint given");
    suites.erase("b");
  }
  std::vector<std::string> inputs;
  if (!a.config.empty()) inputs.push_back(a.config);

  const std::unique_ptr<Environment> damped = MakeEnvironment("point-mass-damped");
  const auto& point_mass = dynamic_cast<const PointMass&>(*damped);
  int action_horizon = cfg.controller.action_horizon;
  if (a.controller.horizon_opt->count() > 0) action_horizon = a.controller.action_horizon;
  StabilityConstants constants = PointMassConstants(point_mass, action_horizon);
  if (a.declare_lx > 0.0) constants.lipschitz_x = a.declare_lx;
  constants.eps_a = a.eps_a;
  constants.w_bar = a.w_bar;
  constants.lambda_corr = a.lambda_corr;
  constants.eps_d = a.eps_d;

  nlohmann::json report = {{"constants", StabilityConstantsToJson(constants)}};
  std::vector<std::string> lines;
  std::vector<std::string> failures;
  bool pass = true;
  const auto record = [&](const std::string& key, const SuiteOutcome& o) {
    report["suites"][key] = o.report;
    lines.push_back(o.text);
    if (!o.pass) {
      pass = false;
      if (!o.failure.empty()) failures.push_back(o.failure);
    }
  };

  try {
    constants.Validate(true);
    report["alpha"] = constants.alpha();
    report["beta"] = constants.beta();
    report["limit"] = constants.UltimateBound();
    if (suites.count("a") > 0) {
      record("a", SuiteConsistency(a.draws, DeriveSeed(seed, std::uint64_t{101})));
    }
    if (suites.count("b") > 0) {
      record("b", SuiteTrainedRollouts(a, cfg, seed, inputs));
    }
    if (suites.count("c") > 0) {
      record("c_random", SuiteCycles(point_mass, constants, a.cycles, 1.0,
                                     DeriveSeed(seed, std::uint64_t{102}), false,
                                     "(c) oracle corrector, random residuals"));
      record("c_adversarial", SuiteCycles(point_mass, constants, a.cycles, 1.0,
                                          DeriveSeed(seed, std::uint64_t{103}), true,
                                          "(c) oracle corrector, adversarial residuals"));
    }
    if (suites.count("d") > 0) {
      StabilityConstants ideal = constants;
      ideal.eps_a = 0.0;
      ideal.w_bar = 0.0;
      ideal.eps_d = 0.0;
      SuiteOutcome o = SuiteCycles(point_mass, ideal, 50, 1.0,
                                   DeriveSeed(seed, std::uint64_t{104}), false,
                                   "(d) ideal corrector");
      const double final_error = o.report.at("final_error").get<double>();
      if (final_error >= 1e-6) {
        o.pass = false;
        o.failure = "(d) final error " + FormatDouble(final_error, 4) + " not below 1e-6";
      }
      o.report["pass"] = o.pass;
      o.text += "  final error " + FormatDouble(final_error, 3);
      record("d", o);
    }
  } catch (const StabilityError& e) {
    pass = false;
    failures.push_back(std::string("preconditions not met: ") + e.what());
  }
  report["pass"] = pass;
  report["failures"] = failures;

  std::ostringstream txt;
  txt << "L_x " << constants.lipschitz_x << "  L_u " << constants.lipschitz_u << "  H_a "
      << constants.action_horizon << "  lambda " << constants.lambda_corr << "\n";
  if (report.contains("alpha")) {
    txt << "alpha " << FormatDouble(report["alpha"].get<double>(), 9) << "  beta "
        << FormatDouble(report["beta"].get<double>(), 9) << "  beta/(1-alpha) "
        << FormatDouble(report["limit"].get<double>(), 9) << "\n";
  }
  for (const std::string& l : lines) txt << l << "\n";
  for (const std::string& f : failures) txt << "violation: " << f << "\n";
  txt << (pass ? "stability verification PASSED\n" : "stability verification FAILED\n");

  const std::string txt_path = SidePath(a.out, ".txt");
  WriteText(a.out, report.dump(2) + "\n");
  WriteText(txt_path, txt.str());
  std::cout << txt.str();
  ManifestSpec spec;
  spec.seed = seed;
  spec.config = cfg.raw;
  spec.out = a.out;
  spec.inputs = inputs;
  spec.outputs = {a.out, txt_path};
  WriteRunManifest(inv, spec);
  return pass ? kExitOk : kExitVerificationFailed;
}

// ------------------------------------------------------------------- serve

struct ServeArgs {
  std::string checkpoint;
  std::string env;
  std::string mode;
  std::string host = "127.0.0.1";
  int port = 8765;
  double rate = 60.0;
  double w_bar = 0.0;
  double duration = 0.0;
  std::string config;
  std::uint64_t seed = 0;
  ControllerFlags controller;
  CLI::Option* w_bar_opt = nullptr;
};

int RunServe(const ServeArgs& a, const CLI::Option* seed_opt) {
  const RunConfig cfg = LoadConfigOrDefault(a.config);
  const LoadedPolicy loaded = LoadPolicyCheckpoint(a.checkpoint);
  const DualTimePolicy policy = DualTimePolicy::FromCheckpoint(loaded.data);
  ServeOptions options;
  options.env = ResolveEnv(a.env, cfg, loaded);
  options.host = a.host;
  if (a.port < 0 || a.port > 65535) throw UsageError("--port out of range");
  options.port = static_cast<unsigned short>(a.port);
  if (!(a.rate > 0.0)) throw UsageError("--rate must be positive");
  options.rate_hz = a.rate;
  if (a.w_bar_opt->count() > 0) options.w_bar = a.w_bar;
  options.controller = a.controller.Resolve(cfg, loaded, !a.config.empty());
  if (!a.mode.empty()) options.controller.mode = ParseControlMode(a.mode);
  options.seed = ResolveSeed(FlagSeed(seed_opt, a.seed), cfg.seed);
  options.handle_signals = true;

  ServeEndpoint endpoint(policy, options);
  endpoint.Start();
  std::cout << "serving " << options.env << " on ws://" << options.host << ":" << endpoint.port()
            << std::endl;
  if (a.duration > 0.0) {
    std::thread stopper([&endpoint, d = a.duration] {
      std::this_thread::sleep_for(std::chrono::duration<double>(d));
      endpoint.Stop();
    });
    endpoint.Wait();
    stopper.join();
  } else {
    endpoint.Wait();
  }
  return kExitOk;
}

// ------------------------------------------------------------------- rerun

int RunRerun(const std::string& manifest_path, const std::string& into) {
  const RunManifest m = ReadManifest(manifest_path);
  if (m.tool_version != kToolVersion) {
    spdlog::warn("manifest written by {}, rerunning with {}", m.tool_version, kToolVersion);
  }
  for (const FileDigest& in : m.inputs) {
    const std::string actual = fs::exists(in.path) ? Sha256File(in.path) : "missing";
    if (actual != in.sha256) {
      std::cerr << "input changed: " << in.path << " expected " << in.sha256 << " got "
                << actual << "\n";
      return kExitVerificationFailed;
    }
  }
  fs::create_directories(into);
  std::vector<std::string> args = m.args;
  bool replaced = false;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--out") {
      args[i + 1] = (fs::path(into) / fs::path(m.out).filename()).string();
      replaced = true;
    }
  }
  if (!replaced) throw UsageError("manifest args carry no --out");
  const int code = RunCli(args);
  if (code != kExitOk && code != kExitVerificationFailed) return code;
  const std::vector<DigestMismatch> mismatches = CompareOutputs(m, into);
  for (const DigestMismatch& d : mismatches) {
    std::cerr << "output differs: " << d.file << " expected " << d.expected << " got "
              << d.actual << "\n";
  }
  if (!mismatches.empty()) return kExitVerificationFailed;
  std::cout << "rerun reproduced " << m.outputs.size() << " outputs bit-identically\n";
  return code;
}

int Dispatch(const std::vector<std::string>& raw) {
  CLI::App app{"Tube diffusion policy toolkit", "tdp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Invocation inv;
  inv.args = SplitEquals(raw);
  std::function<int()> action;

  DemoGenArgs demo;
  CLI::App* demo_cmd = app.add_subcommand("demo-gen", "record expert demonstrations");
  demo_cmd->add_option("--env", demo.env, "environment id");
  CLI::Option* demo_n = demo_cmd->add_option("--n", demo.n, "number of demonstrations");
  CLI::Option* demo_seed = demo_cmd->add_option("--seed", demo.seed, "master seed");
  demo_cmd->add_option("--out", demo.out, "output JSON-lines file")->required();
  demo_cmd->add_option("--disturb", demo.disturb, "disturbance spec during collection");
  demo_cmd->add_option("--config", demo.config, "run config JSON");
  demo_cmd->callback([&] { action = [&] { return RunDemoGen(inv, demo, demo_seed, demo_n); }; });

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train the dual-time policy");
  train_cmd->add_option("--demos", train.demos, "demonstrations JSON-lines")->required();
  train_cmd->add_option("--config", train.config, "run config JSON");
  train_cmd->add_option("--out", train.out, "checkpoint path")->required();
  CLI::Option* train_seed = train_cmd->add_option("--seed", train.seed, "master seed");
  CLI::Option* train_steps = train_cmd->add_option("--steps", train.steps, "total steps");
  train_cmd->add_option("--resume", train.resume, "checkpoint to continue from");
  train_cmd->callback(
      [&] { action = [&] { return RunTrain(inv, train, train_seed, train_steps); }; });

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint path")->required();
  eval_cmd->add_option("--env", eval.env, "environment id");
  eval_cmd->add_option("--mode", eval.modes, "comma list: tube, chunk_only, streaming_only, all");
  CLI::Option* eval_episodes = eval_cmd->add_option("--episodes", eval.episodes, "episodes");
  eval_cmd->add_option("--disturb", eval.disturb, "disturbance spec");
  eval_cmd->add_option("--config", eval.config, "run config JSON");
  CLI::Option* eval_seed = eval_cmd->add_option("--seed", eval.seed, "master seed");
  eval_cmd->add_option("--out", eval.out, "results JSON")->required();
  eval_cmd->add_flag("--emit-plot-data", eval.plot, "write per-step trajectory CSV");
  eval.controller.Register(eval_cmd);
  eval_cmd->callback(
      [&] { action = [&] { return RunEval(inv, eval, eval_seed, eval_episodes); }; });

  AblateArgs ablate;
  CLI::App* ablate_cmd = app.add_subcommand("ablate-ddim", "sweep the number of DDIM steps");
  ablate_cmd->add_option("--checkpoint", ablate.checkpoint, "checkpoint path")->required();
  ablate_cmd->add_option("--env", ablate.env, "environment id");
  ablate_cmd->add_option("--mode", ablate.modes, "comma list of modes");
  ablate_cmd->add_option("--ddim-list", ablate.ddim_list, "comma list of T_ddim values");
  ablate_cmd->add_option("--trials", ablate.trials, "trials per setting");
  ablate_cmd->add_option("--episodes", ablate.episodes, "episodes per trial");
  ablate_cmd->add_option("--disturb", ablate.disturb, "disturbance spec");
  ablate_cmd->add_option("--config", ablate.config, "run config JSON");
  CLI::Option* ablate_seed = ablate_cmd->add_option("--seed", ablate.seed, "master seed");
  ablate_cmd->add_option("--out", ablate.out, "results JSON")->required();
  ablate.controller.Register(ablate_cmd);
  ablate_cmd->callback([&] { action = [&] { return RunAblate(inv, ablate, ablate_seed); }; });

  VerifyArgs verify;
  CLI::App* verify_cmd = app.add_subcommand("verify-stability", "check the stability bounds");
  verify_cmd->add_option("--out", verify.out, "report JSON")->required();
  verify_cmd->add_option("--checkpoint", verify.checkpoint, "checkpoint for suite (b)");
  verify_cmd->add_option("--demos", verify.demos, "reference demonstrations for suite (b)");
  verify_cmd->add_option("--env", verify.env, "environment id for suite (b)");
  verify_cmd->add_option("--config", verify.config, "run config JSON");
  verify_cmd->add_option("--suite", verify.suites, "comma list from a,b,c,d");
  verify_cmd->add_option("--episodes", verify.episodes, "rollouts for suite (b)");
  verify_cmd->add_option("--disturb", verify.disturb, "disturbance spec for suite (b)");
  verify_cmd->add_option("--declare-lx", verify.declare_lx,
                         "declared L_x in place of the true constant");
  verify_cmd->add_option("--lambda-corr", verify.lambda_corr, "correction contraction");
  verify_cmd->add_option("--eps-a", verify.eps_a, "streaming imitation error bound");
  verify_cmd->add_option("--w-bar", verify.w_bar, "disturbance bound");
  verify_cmd->add_option("--eps-d", verify.eps_d, "correction residual bound");
  verify_cmd->add_option("--cycles", verify.cycles, "oracle corrector cycles");
  verify_cmd->add_option("--draws", verify.draws, "closed-form consistency draws");
  CLI::Option* verify_seed = verify_cmd->add_option("--seed", verify.seed, "master seed");
  verify.controller.Register(verify_cmd);
  verify_cmd->callback([&] { action = [&] { return RunVerify(inv, verify, verify_seed); }; });

  ServeArgs serve;
  CLI::App* serve_cmd = app.add_subcommand("serve", "stream live rollouts over WebSocket");
  serve_cmd->add_option("--checkpoint", serve.checkpoint, "checkpoint path")->required();
  serve_cmd->add_option("--env", serve.env, "environment id");
  serve_cmd->add_option("--mode", serve.mode, "control mode");
  serve_cmd->add_option("--host", serve.host, "bind address");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks one)");
  serve_cmd->add_option("--rate", serve.rate, "simulation rate in Hz");
  serve.w_bar_opt = serve_cmd->add_option("--w-bar", serve.w_bar, "perturbation norm bound");
  serve_cmd->add_option("--duration", serve.duration, "seconds to run (0 = until signal)");
  serve_cmd->add_option("--config", serve.config, "run config JSON");
  CLI::Option* serve_seed = serve_cmd->add_option("--seed", serve.seed, "master seed");
  serve.controller.Register(serve_cmd);
  serve_cmd->callback([&] { action = [&] { return RunServe(serve, serve_seed); }; });

  std::string manifest;
  std::string into;
  CLI::App* rerun_cmd = app.add_subcommand("rerun", "replay a manifest and compare outputs");
  rerun_cmd->add_option("--manifest", manifest, "run manifest")->required();
  rerun_cmd->add_option("--into", into, "directory for the fresh outputs")->required();
  rerun_cmd->callback([&] { action = [&] { return RunRerun(manifest, into); }; });

  std::vector<std::string> reversed(inv.args.rbegin(), inv.args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  inv.command = app.get_subcommands().front()->get_name();
  return action();
}

}  // namespace

std::vector<std::string> CanonicalArgs(const std::vector<std::string>& args,
                                       unsigned long long seed) {
  const std::vector<std::string> split = SplitEquals(args);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == "--seed") {
      ++i;
      continue;
    }
    out.push_back(split[i]);
    if (InputFlags().count(split[i]) > 0 && i + 1 < split.size()) {
      out.push_back(fs::absolute(split[++i]).lexically_normal().string());
    }
  }
  out.push_back("--seed");
  out.push_back(std::to_string(seed));
  return out;
}

int RunCli(const std::vector<std::string>& args) {
  try {
    return Dispatch(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kExitVerificationFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeFault;
  }
}

}  // namespace tdp
