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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "tdp/cli/commands.h"
#include "tdp/cli/config.h"
#include "tdp/cli/manifest.h"
#include "test_util.h"

namespace tdp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void WriteJson(const std::string& path, const json& j) {
  std::ofstream(path) << j.dump(2);
}

json ReadJson(const std::string& path) { return json::parse(testing_util::ReadFile(path)); }

TEST(ManifestTest, Sha256KnownVectors) {
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string dir = testing_util::MakeTempDir("sha");
  std::ofstream(dir + "/f") << "abc";
  EXPECT_EQ(Sha256File(dir + "/f"), Sha256Hex("abc"));
  fs::remove_all(dir);
}

TEST(ManifestTest, RoundTripAndOutputComparison) {
  const std::string dir = testing_util::MakeTempDir("manifest");
  std::ofstream(dir + "/a.json") << "{}";
  std::ofstream(dir + "/a.txt") << "table";
  RunManifest m;
  m.command = "eval";
  m.args = {"eval", "--out", dir + "/a.json", "--seed", "3"};
  m.seed = 3;
  m.out = dir + "/a.json";
  m.inputs.push_back({"/x/ckpt.tdp", Sha256Hex("w")});
  DigestOutputs(m, {dir + "/a.json", dir + "/a.txt"});
  m.unhashed = {"a.timing.json"};
  ASSERT_EQ(m.outputs.size(), 2u);
  EXPECT_EQ(m.outputs[0].path, "a.json");
  EXPECT_EQ(m.outputs[1].sha256, Sha256Hex("table"));

  WriteManifest(ManifestPathFor(m.out), m);
  EXPECT_EQ(ManifestPathFor(m.out), dir + "/a.json.manifest.json");
  const RunManifest back = ReadManifest(ManifestPathFor(m.out));
  EXPECT_EQ(ManifestToJson(back), ManifestToJson(m));
  EXPECT_EQ(back.tool_version, kToolVersion);

  EXPECT_TRUE(CompareOutputs(m, dir).empty());
  std::ofstream(dir + "/a.txt") << "changed";
  const std::vector<DigestMismatch> diff = CompareOutputs(m, dir);
  ASSERT_EQ(diff.size(), 1u);
  EXPECT_EQ(diff[0].file, "a.txt");
  fs::remove(dir + "/a.json");
  EXPECT_EQ(CompareOutputs(m, dir).size(), 2u);
  fs::remove_all(dir);
}

TEST(ConfigTest, SeedPrecedence) {
  unsetenv("TDP_SEED");
  EXPECT_EQ(ResolveSeed(std::nullopt, std::nullopt), 0u);
  EXPECT_EQ(ResolveSeed(std::nullopt, 4), 4u);
  setenv("TDP_SEED", "9", 1);
  EXPECT_EQ(ResolveSeed(std::nullopt, 4), 9u);
  EXPECT_EQ(ResolveSeed(2, 4), 2u);
  unsetenv("TDP_SEED");
}

TEST(ConfigTest, ShippedConfigsLoad) {
  for (const char* name : {"point-mass", "point-mass-damped", "planar-push"}) {
    const RunConfig c = LoadRunConfig(std::string(TDP_SOURCE_DIR) + "/configs/" + name + ".json");
    EXPECT_EQ(c.env, name);
    EXPECT_TRUE(c.seed.has_value());
    EXPECT_EQ(c.controller.action_horizon, c.hyper.action_horizon) << name;
    EXPECT_EQ(c.eval_episodes, 50);
  }
  EXPECT_THROW(RunConfigFromJson({{"hyper", {{"no_such_key", 1}}}}), std::exception);
}

TEST(CanonicalArgsTest, PinsSeedAndAbsolutizesInputs) {
  const std::vector<std::string> args = {"train", "--demos=d.jsonl", "--seed", "5", "--out",
                                         "o.tdp", "--config", "./c/../c.json"};
  const std::vector<std::string> c = CanonicalArgs(args, 5);
  const std::string cwd = fs::current_path().string();
  const std::vector<std::string> expected = {"train", "--demos", cwd + "/d.jsonl",
                                             "--out", "o.tdp", "--config", cwd + "/c.json",
                                             "--seed", "5"};
  EXPECT_EQ(c, expected);
  EXPECT_EQ(CanonicalArgs({"demo-gen"}, 0).back(), "0");
}

TEST(ExitCodeTest, UsageErrorsReturnOne) {
  EXPECT_EQ(RunCli({}), kExitUsage);
  EXPECT_EQ(RunCli({"frobnicate"}), kExitUsage);
  EXPECT_EQ(RunCli({"train", "--bogus-flag", "1"}), kExitUsage);
  EXPECT_EQ(RunCli({"--version"}), kExitOk);
  EXPECT_EQ(RunCli({"demo-gen", "--help"}), kExitOk);
  EXPECT_EQ(RunCli({"eval", "--checkpoint", "/nonexistent/ckpt.tdp", "--out", "/tmp/x.json"}),
            kExitRuntimeFault);
}

// runs the whole pipeline at toy scale once for all pipeline tests
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::string(testing_util::MakeTempDir("pipeline"));
    const json config = {
        {"env", "point-mass"},
        {"seed", 1},
        {"demos", {{"n", 1}}},
        {"hyper",
         {{"pred_horizon", 8}, {"obs_horizon", 1}, {"action_horizon", 4}, {"batch_size", 8},
          {"steps", 12}, {"log_every", 4}, {"width", 16}, {"depth", 2}, {"obs_features", 8},
          {"time_features", 4}, {"lambda_flow", 8.0}, {"pad_before", 8}}},
        {"controller", {{"ddim_steps", 2}, {"action_horizon", 4}, {"mode", "tube"}}},
        {"eval", {{"episodes", 2}, {"disturbance", "midpoint:-0.5"}}}};
    WriteJson(Path("cfg.json"), config);
    ASSERT_EQ(RunCli({"demo-gen", "--env", "point-mass", "--n", "1", "--config",
                      Path("cfg.json"), "--out", Path("demos.jsonl")}),
              kExitOk);
    ASSERT_EQ(RunCli({"train", "--demos", Path("demos.jsonl"), "--config", Path("cfg.json"),
                      "--out", Path("ckpt.tdp")}),
              kExitOk);
    ASSERT_EQ(RunCli({"eval", "--checkpoint", Path("ckpt.tdp"), "--config", Path("cfg.json"),
                      "--mode", "all", "--out", Path("eval.json"), "--emit-plot-data"}),
              kExitOk);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static std::string Path(const std::string& name) { return *dir_ + "/" + name; }

  static std::string* dir_;
};

std::string* PipelineTest::dir_ = nullptr;

TEST_F(PipelineTest, OutputsAndManifestsAreWritten) {
  for (const char* f : {"demos.jsonl", "demos.norm.json", "ckpt.tdp", "ckpt.log.jsonl",
                        "ckpt.timing.jsonl", "eval.json", "eval.txt", "eval.rollouts.jsonl",
                        "eval.timing.json", "eval.trajectories.csv"}) {
    EXPECT_TRUE(fs::exists(Path(f))) << f;
  }
  const RunManifest m = ReadManifest(ManifestPathFor(Path("eval.json")));
  EXPECT_EQ(m.command, "eval");
  EXPECT_EQ(m.seed, 1u);
  EXPECT_EQ(m.args.back(), "1");
  ASSERT_EQ(m.inputs.size(), 2u);
  EXPECT_EQ(m.inputs[0].sha256, Sha256File(Path("ckpt.tdp")));
  EXPECT_EQ(m.unhashed, (std::vector<std::string>{"eval.timing.json"}));
  const json results = ReadJson(Path("eval.json"));
  EXPECT_EQ(results["env"], "point-mass");
  std::vector<std::string> modes;
  for (const json& row : results["metrics"]) modes.push_back(row["mode"]);
  EXPECT_EQ(modes, (std::vector<std::string>{"tube", "chunk_only", "streaming_only"}));
  EXPECT_EQ(testing_util::ReadFile(Path("eval.txt")).find("latency"), std::string::npos);
}

TEST_F(PipelineTest, RerunReproducesEveryCommand) {
  for (const char* out : {"demos.jsonl", "ckpt.tdp", "eval.json"}) {
    const std::string into = Path(std::string("rerun_") + out);
    EXPECT_EQ(RunCli({"rerun", "--manifest", ManifestPathFor(Path(out)), "--into", into}),
              kExitOk)
        << out;
  }
}

TEST_F(PipelineTest, RerunDetectsChangedInputsAndOutputs) {
  const std::string manifest = ManifestPathFor(Path("eval.json"));
  json j = ReadJson(manifest);
  j["outputs"][0]["sha256"] = Sha256Hex("forged");
  WriteJson(Path("forged.manifest.json"), j);
  EXPECT_EQ(RunCli({"rerun", "--manifest", Path("forged.manifest.json"), "--into",
                    Path("rerun_forged")}),
            kExitVerificationFailed);

  j = ReadJson(manifest);
  j["inputs"][0]["sha256"] = Sha256Hex("other checkpoint");
  WriteJson(Path("stale.manifest.json"), j);
  EXPECT_EQ(RunCli({"rerun", "--manifest", Path("stale.manifest.json"), "--into",
                    Path("rerun_stale")}),
            kExitVerificationFailed);
}

TEST_F(PipelineTest, BadFlagValuesAreUsageErrors) {
  EXPECT_EQ(RunCli({"eval", "--checkpoint", Path("ckpt.tdp"), "--mode", "hybrid", "--out",
                    Path("bad.json")}),
            kExitUsage);
  EXPECT_EQ(RunCli({"eval", "--checkpoint", Path("ckpt.tdp"), "--disturb", "wind:3", "--out",
                    Path("bad.json")}),
            kExitUsage);
  EXPECT_EQ(RunCli({"eval", "--checkpoint", Path("ckpt.tdp"), "--action-horizon", "99",
                    "--out", Path("bad.json")}),
            kExitUsage);
}

TEST_F(PipelineTest, SeedFlagChangesRolloutsAndIsRecorded) {
  ASSERT_EQ(RunCli({"eval", "--checkpoint", Path("ckpt.tdp"), "--config", Path("cfg.json"),
                    "--mode", "tube", "--seed", "77", "--out", Path("eval77.json")}),
            kExitOk);
  EXPECT_EQ(ReadManifest(ManifestPathFor(Path("eval77.json"))).seed, 77u);
  EXPECT_NE(testing_util::ReadFile(Path("eval77.rollouts.jsonl")),
            testing_util::ReadFile(Path("eval.rollouts.jsonl")));
}

TEST_F(PipelineTest, AblationWritesOneRowPerSettingAndMode) {
  ASSERT_EQ(RunCli({"ablate-ddim", "--checkpoint", Path("ckpt.tdp"), "--config",
                    Path("cfg.json"), "--ddim-list", "1,2", "--trials", "2", "--episodes", "1",
                    "--out", Path("ablate.json")}),
            kExitOk);
  const json j = ReadJson(Path("ablate.json"));
  ASSERT_EQ(j["rows"].size(), 4u);
  for (const json& row : j["rows"]) {
    EXPECT_EQ(row["trial_scores"].size(), 2u);
    double mean = 0.0;
    for (const json& s : row["trial_scores"]) mean += s.get<double>() / 2.0;
    EXPECT_NEAR(row["mean_score"].get<double>(), mean, 1e-12);
  }
  EXPECT_TRUE(fs::exists(Path("ablate.csv")));
  EXPECT_TRUE(fs::exists(Path("ablate.timing.json")));
}

TEST(VerifyStabilityCliTest, AnalyticSuitesPassAndFaultsFail) {
  const std::string dir = testing_util::MakeTempDir("verify");
  EXPECT_EQ(RunCli({"verify-stability", "--suite", "a,c,d", "--draws", "2000", "--out",
                    dir + "/v.json"}),
            kExitOk);
  const json j = ReadJson(dir + "/v.json");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(RunCli({"verify-stability", "--suite", "c", "--declare-lx", "0.5", "--out",
                    dir + "/bad.json"}),
            kExitVerificationFailed);
  EXPECT_EQ(RunCli({"verify-stability", "--suite", "z", "--out", dir + "/z.json"}), kExitUsage);
  fs::remove_all(dir);
}

TEST(VerifyStabilityCliTest, MisdeclaredLipschitzOnTrainedRolloutsNamesFirstStep) {
  const std::string dir = testing_util::MakeTempDir("verify_b");
  const json config = {
      {"env", "point-mass-damped"},
      {"seed", 2},
      {"hyper",
       {{"pred_horizon", 8}, {"obs_horizon", 1}, {"action_horizon", 4}, {"batch_size", 8},
        {"steps", 8}, {"log_every", 4}, {"width", 16}, {"depth", 2}, {"obs_features", 8},
        {"time_features", 4}, {"lambda_flow", 8.0}}},
      {"controller", {{"ddim_steps", 2}, {"action_horizon", 4}}}};
  WriteJson(dir + "/cfg.json", config);
  ASSERT_EQ(RunCli({"demo-gen", "--env", "point-mass-damped", "--n", "1", "--out",
                    dir + "/demos.jsonl"}),
            kExitOk);
  ASSERT_EQ(RunCli({"train", "--demos", dir + "/demos.jsonl", "--config", dir + "/cfg.json",
                    "--out", dir + "/ckpt.tdp"}),
            kExitOk);
  const std::vector<std::string> common = {"verify-stability", "--checkpoint",
                                           dir + "/ckpt.tdp", "--demos", dir + "/demos.jsonl",
                                           "--config", dir + "/cfg.json", "--suite", "b",
                                           "--episodes", "3", "--disturb", "midpoint:0.3"};
  std::vector<std::string> honest = common;
  honest.insert(honest.end(), {"--out", dir + "/ok.json"});
  EXPECT_EQ(RunCli(honest), kExitOk);
  EXPECT_EQ(ReadJson(dir + "/ok.json")["suites"]["b"]["violations"], 0);

  std::vector<std::string> faulty = common;
  faulty.insert(faulty.end(), {"--declare-lx", "0.5", "--out", dir + "/bad.json"});
  EXPECT_EQ(RunCli(faulty), kExitVerificationFailed);
  const json b = ReadJson(dir + "/bad.json")["suites"]["b"];
  EXPECT_GT(b["violations"].get<int>(), 0);
  EXPECT_FALSE(b["first_violation"].is_null());
  const json report = ReadJson(dir + "/bad.json");
  for (const char* key : {"alpha", "beta", "limit"}) EXPECT_TRUE(report.contains(key)) << key;
  fs::remove_all(dir);
}

}  // namespace
}  // namespace tdp
