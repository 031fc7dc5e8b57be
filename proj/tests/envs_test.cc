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

#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "tdp/envs/demos.h"
#include "tdp/envs/disturbance.h"
#include "tdp/envs/environment.h"
#include "tdp/envs/planar_push.h"
#include "tdp/envs/point_mass.h"
#include "tdp/envs/rng.h"
#include "test_util.h"

namespace tdp {
namespace {

TEST(RngTest, SaveAndLoadResumesTheStream) {
  Rng rng(17);
  rng.Normal();  // leaves a cached second normal in the distribution
  const std::string state = rng.SaveState();
  std::vector<double> first;
  for (int i = 0; i < 6; ++i) first.push_back(i % 2 ? rng.Normal() : rng.Uniform01());
  Rng other(999);
  other.LoadState(state);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(i % 2 ? other.Normal() : other.Uniform01(), first[i]) << i;
  }
  EXPECT_NE(DeriveSeed(1, RngStream::kDenoise), DeriveSeed(1, RngStream::kEnvironment));
  EXPECT_EQ(DeriveSeed(5, 3), DeriveSeed(5, 3));
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t k = rng.UniformInt(-2, 3);
    EXPECT_GE(k, -2);
    EXPECT_LE(k, 3);
  }
}

TEST(PointMassTest, DynamicsMatchLinearMap) {
  PointMassConfig c;
  c.damping = 0.1;
  c.action_limit = 2.0;
  PointMass env(c);
  Rng rng(0);
  env.Reset(rng);
  EXPECT_EQ(env.id(), "point-mass-damped");
  env.SetState({0.4});
  env.Step({1.5});
  EXPECT_NEAR(env.x(), 0.9 * 0.4 + 1.5 * 0.1, 1e-15);
  EXPECT_EQ(env.t(), 1);
  env.Perturb({-0.2});
  EXPECT_NEAR(env.x(), 0.9 * 0.4 + 0.15 - 0.2, 1e-15);
  EXPECT_EQ(env.t(), 1);
  EXPECT_THROW(env.Step({2.5}), EnvError);
  EXPECT_THROW(env.Step({std::nan("")}), EnvError);
  EXPECT_THROW(env.Step({0.1, 0.1}), EnvError);
  EXPECT_DOUBLE_EQ(env.lipschitz_x(), 0.9);
  EXPECT_DOUBLE_EQ(env.lipschitz_u(), 0.1);
  EXPECT_EQ(env.ClampAction({7.0}), (std::vector<double>{2.0}));
  EXPECT_THROW(PointMass(PointMassConfig{.damping = 1.0}), EnvError);
}

TEST(PointMassTest, ExpertHoldsTheGoalAndScoreIsTolerance) {
  for (const char* id : {"point-mass", "point-mass-damped"}) {
    auto env = MakeEnvironment(id);
    Rng rng(0);
    env->Reset(rng);
    for (int t = 0; t < env->max_steps(); ++t) env->Step(env->ExpertAction());
    EXPECT_TRUE(env->Success()) << id;
    EXPECT_DOUBLE_EQ(env->Score(), 1.0);
    env->SetState({1.0});
    env->Step(env->ExpertAction());
    EXPECT_NEAR(env->Observe()[0], 1.0, 1e-12) << id;
    env->SetState({0.5});
    EXPECT_NEAR(env->Score(), 0.05 / 0.5, 1e-15);
    EXPECT_FALSE(env->Success());
  }
}

TEST(PlanarPushTest, HeadOnPushTranslatesWithoutRotation) {
  PlanarPush env;
  env.SetState({-0.1, 0.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(env.Query().distance, 0.04, 1e-15);
  for (int i = 0; i < 10; ++i) env.Step({0.0, 0.0});
  // pusher speed 0.2 * dt 0.05 = 0.01 per step; contact begins after two steps
  EXPECT_NEAR(env.pusher()[0], 0.0, 1e-12);
  EXPECT_NEAR(env.block()[0], 0.0 + 0.06 + 0.02, 1e-12);
  EXPECT_NEAR(env.block()[1], 0.0, 1e-15);
  EXPECT_NEAR(env.block()[2], 0.0, 1e-15);
  EXPECT_FALSE(env.Success());
}

TEST(PlanarPushTest, OffCenterPushRotatesAndResolvesPenetration) {
  PlanarPush env;
  env.SetState({-0.085, 0.03, 0.0, 0.0, 0.0});
  for (int i = 0; i < 5; ++i) env.Step({0.5, 0.03});
  EXPECT_LT(env.block()[2], 0.0);
  EXPECT_GT(env.block()[0], 0.0);
  EXPECT_GE(env.Query().distance, env.config().pusher_radius - 1e-6);
  // moving away never drags the block
  const std::array<double, 3> before = env.block();
  env.Step({-0.5, 0.03});
  EXPECT_EQ(env.block(), before);
}

TEST(PlanarPushTest, StateApiAndScore) {
  PlanarPush env;
  EXPECT_THROW(env.SetState({0, 0, 0}), EnvError);
  env.SetState({0.5, 0.5, 0.0, 0.0, 2 * M_PI + 0.01});
  EXPECT_NEAR(env.block()[2], 0.01, 1e-12);
  EXPECT_TRUE(env.Success());
  EXPECT_DOUBLE_EQ(env.Score(), 1.0);
  env.SetState({0.5, 0.5, 0.1, 0.0, 0.2});
  EXPECT_NEAR(env.Score(), (0.05 / 0.1) * (0.1 / 0.2), 1e-15);
  env.SetState({1.5, 0.0, 0.0, 0.0, 0.0});
  EXPECT_TRUE(env.OutOfWorkspace());
  EXPECT_NEAR(WrapAngle(3 * M_PI / 2), -M_PI / 2, 1e-15);
}

TEST(PlanarPushTest, ScriptedExpertSucceedsOnNinetyFivePercent) {
  int successes = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    PlanarPush env;
    Rng rng(DeriveSeed(42, static_cast<std::uint64_t>(i)));
    env.Reset(rng);
    EXPECT_GT(env.Query().distance, env.config().pusher_radius);
    const DemonstrationEpisode e = RecordExpertEpisode(env, i, {});
    successes += e.meta["success"].get<bool>() ? 1 : 0;
  }
  EXPECT_GE(successes, 95);
}

TEST(DisturbanceTest, ParsesKnownKindsAndRejectsMalformed) {
  PointMass pm;
  PlanarPush pp;
  Rng rng(3);
  const DisturbanceScript mid = DisturbanceGenerator::Parse("midpoint:0.5").Make(pm, 40, rng);
  ASSERT_EQ(mid.entries.size(), 1u);
  EXPECT_EQ(mid.entries[0].step, 20);
  EXPECT_EQ(mid.At(20, 1), (std::vector<double>{0.5}));
  EXPECT_EQ(mid.At(19, 1), (std::vector<double>{0.0}));
  const DisturbanceScript step = DisturbanceGenerator::Parse("step:7:0.1,0,0,0,0.2").Make(pp, 300, rng);
  EXPECT_EQ(step.entries[0].step, 7);
  const DisturbanceGenerator shift = DisturbanceGenerator::Parse("block-shift:25:0.05");
  const DisturbanceScript s = shift.Make(pp, 300, rng);
  EXPECT_EQ(s.entries[0].step, 25);
  EXPECT_NEAR(std::abs(s.entries[0].vector[3]), 0.05, 1e-15);
  EXPECT_EQ(s.entries[0].vector[2], 0.0);
  EXPECT_DOUBLE_EQ(shift.MaxNorm(), 0.05);
  EXPECT_TRUE(DisturbanceGenerator::Parse("none").Make(pm, 40, rng).empty());
  EXPECT_TRUE(DisturbanceGenerator::Parse("").Make(pm, 40, rng).empty());
  for (const char* bad : {"none:1", "midpoint", "step:x:1", "block-shift:3", "wind:1",
                          "midpoint:abc"}) {
    EXPECT_THROW(DisturbanceGenerator::Parse(bad), DisturbanceError) << bad;
  }
  EXPECT_THROW(DisturbanceGenerator::Parse("midpoint:1,2").Make(pm, 40, rng), DisturbanceError);
  EXPECT_THROW(shift.Make(pm, 40, rng), DisturbanceError);
  DisturbanceScript bounded = mid;
  bounded.bound = 0.4;
  EXPECT_THROW(bounded.Validate(), DisturbanceError);
  EXPECT_EQ(ApplyDisturbance({1.0}, mid, 20), (std::vector<double>{1.5}));
}

TEST(DisturbanceTest, LiveQueueEnforcesBoundAndCapacity) {
  LivePerturbationQueue q(0.5, 2);
  EXPECT_THROW(q.Push({0.4, 0.4}), DisturbanceError);
  EXPECT_THROW(q.Push({std::nan("")}), DisturbanceError);
  q.Push({0.1});
  q.Push({0.2});
  q.Push({0.3});
  const auto items = q.Drain();
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0], (std::vector<double>{0.2}));
  EXPECT_TRUE(q.Drain().empty());
}

TEST(DemosTest, GenerationRoundTripAndNormalization) {
  const auto demos = GenerateDemos("planar-push", 3, 5);
  ASSERT_EQ(demos.size(), 3u);
  for (const auto& e : demos) {
    EXPECT_EQ(e.obs.size(), e.act.size() + 1);
    EXPECT_TRUE(e.meta["success"].get<bool>());
  }
  EXPECT_EQ(GenerateDemos("planar-push", 3, 5)[2].act, demos[2].act);
  const std::string dir = testing_util::MakeTempDir("demos");
  const std::string path = dir + "/d.jsonl";
  WriteDemos(path, demos);
  const auto back = ReadDemos(path);
  ASSERT_EQ(back.size(), demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) {
    EXPECT_EQ(back[i].obs, demos[i].obs);
    EXPECT_EQ(back[i].act, demos[i].act);
    EXPECT_EQ(back[i].seed, demos[i].seed);
  }
  const NormalizationStats st = ComputeNormalization(demos);
  for (int d = 0; d < 5; ++d) {
    double lo = 1e300, hi = -1e300;
    for (const auto& e : demos) {
      for (const auto& o : e.obs) {
        lo = std::min(lo, o[d]);
        hi = std::max(hi, o[d]);
      }
    }
    EXPECT_EQ(st.obs_min[d], lo);
    EXPECT_EQ(st.obs_max[d], hi);
  }
  WriteNormalization(NormalizationPathFor(path), st);
  EXPECT_EQ(ReadNormalization(NormalizationPathFor(path)).act_max, st.act_max);
  EXPECT_THROW(GenerateDemos("planar-push", 0, 1), EnvError);
  EXPECT_THROW(MakeEnvironment("cartpole"), EnvError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace tdp
