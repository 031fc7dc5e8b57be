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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tdp/envs/demos.h"
#include "tdp/envs/environment.h"
#include "tdp/envs/point_mass.h"
#include "tdp/envs/rng.h"
#include "tdp/inference/controller.h"
#include "tdp/stability/bounds.h"
#include "tdp/stability/verify.h"

namespace tdp {
namespace {

PointMass DampedPointMass() {
  PointMassConfig c;
  c.damping = 0.1;
  c.action_limit = 2.0;
  return PointMass(c);
}

StabilityConstants DampedConstants(double eps_a, double w_bar, double eps_d) {
  StabilityConstants k = PointMassConstants(DampedPointMass(), 8);
  k.eps_a = eps_a;
  k.w_bar = w_bar;
  k.eps_d = eps_d;
  k.lambda_corr = 0.5;
  return k;
}

TEST(BoundsTest, AlphaBetaMatchHandSums) {
  const StabilityConstants k = DampedConstants(0.05, 0.01, 0.01);
  EXPECT_DOUBLE_EQ(k.lipschitz_x, 0.9);
  EXPECT_DOUBLE_EQ(k.lipschitz_u, 0.1);
  const double c = 0.1 * 0.05 + 0.01;
  EXPECT_DOUBLE_EQ(k.c(), c);
  double power = 1.0, geometric = 0.0;
  for (int i = 0; i < 7; ++i) {
    geometric += power;
    power *= 0.9;
  }
  EXPECT_NEAR(k.alpha(), 0.5 * power, 1e-15);
  EXPECT_NEAR(k.beta(), 0.5 * geometric * c + 0.01, 1e-15);
  EXPECT_NEAR(k.UltimateBound(), k.beta() / (1.0 - k.alpha()), 1e-15);
  const StabilityConstants back = StabilityConstantsFromJson(StabilityConstantsToJson(k));
  EXPECT_EQ(back.beta(), k.beta());
}

TEST(BoundsTest, ClosedFormsMatchRecursions) {
  Rng rng(2026);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v0 = rng.Uniform(0.0, 10.0);
    const double lx = rng.Uniform(0.0, 1.2);
    const double c = rng.Uniform(0.0, 1.0);
    const int j = static_cast<int>(rng.UniformInt(0, 60));
    double v = v0;
    for (int s = 0; s < j; ++s) v = lx * v + c;
    worst = std::max(worst, std::abs(StreamingBound(v0, j, lx, c) - v) / std::max(1.0, v));
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_DOUBLE_EQ(StreamingBound(2.0, 3, 1.0, 0.5), 3.5);

  const StabilityConstants k = DampedConstants(0.05, 0.01, 0.01);
  const CycleTrace trace = CycleBound(1.0, 200, k);
  ASSERT_EQ(trace.z.size(), 200u);
  for (int n = 1; n <= 200; ++n) {
    const double an = std::pow(trace.alpha, n);
    const double closed = an * 1.0 + trace.beta * (1.0 - an) / (1.0 - trace.alpha);
    EXPECT_NEAR(trace.z[n - 1], closed, 1e-14) << n;
  }
  EXPECT_NEAR(trace.z.back(), trace.limit, 1e-12);
}

TEST(BoundsTest, MonotoneInEveryErrorSource) {
  const StabilityConstants base = DampedConstants(0.05, 0.01, 0.01);
  for (double scale : {1.5, 2.0, 4.0}) {
    StabilityConstants k = base;
    k.eps_a *= scale;
    EXPECT_GT(k.UltimateBound(), base.UltimateBound());
    k = base;
    k.w_bar *= scale;
    EXPECT_GT(k.UltimateBound(), base.UltimateBound());
    k = base;
    k.eps_d *= scale;
    EXPECT_GT(k.UltimateBound(), base.UltimateBound());
  }
  for (int j = 0; j < 30; ++j) {
    EXPECT_LT(StreamingBound(0.1, j, 0.9, 0.02), StreamingBound(0.2, j, 0.9, 0.02));
    EXPECT_LE(StreamingBound(0.0, j, 0.9, 0.02), StreamingBound(0.0, j + 1, 0.9, 0.02));
  }
}

TEST(BoundsTest, RejectsInvalidConstants) {
  StabilityConstants k = DampedConstants(0.05, 0.01, 0.01);
  k.lipschitz_x = 1.0;
  EXPECT_THROW(k.alpha(), StabilityError);
  EXPECT_NO_THROW(k.Validate(false));
  EXPECT_THROW(k.Validate(true), StabilityError);
  k = DampedConstants(0.05, 0.01, 0.01);
  k.lambda_corr = 1.0;
  EXPECT_THROW(k.Validate(false), StabilityError);
  k = DampedConstants(-0.1, 0.01, 0.01);
  EXPECT_THROW(k.Validate(false), StabilityError);
  EXPECT_THROW(StreamingBound(1.0, -1, 0.5, 0.1), StabilityError);
}

class StreamingVerifyTest : public ::testing::Test {
 protected:
  void SetUp() override {
    PointMass ref_env = DampedPointMass();
    Rng rng(0);
    ref_env.Reset(rng);
    reference_ = RecordExpertEpisode(ref_env, 0, {});
    PointMass env = DampedPointMass();
    env.Reset(rng);
    DisturbanceScript kick;
    kick.entries.push_back({2, {0.3}});
    rollout_ = RunFeedbackLaw(
        env, [](const Environment& e) { return e.ExpertAction(); }, kick, 40, "expert");
  }

  DemonstrationEpisode reference_;
  RolloutRecord rollout_;
};

TEST_F(StreamingVerifyTest, HonestRecordSatisfiesEveryStep) {
  const StreamingReport r = VerifyStreaming(rollout_, reference_, DampedConstants(0, 0, 0));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.steps.size(), 40u);
  EXPECT_NEAR(r.steps[2].next_error, 0.3, 1e-12);
  EXPECT_GT(r.measured_eps_a, 0.0);
}

TEST_F(StreamingVerifyTest, HiddenDisturbanceIsReported) {
  RolloutRecord tampered = rollout_;
  tampered.steps[2].disturbance = {0.0};
  const StreamingReport r = VerifyStreaming(tampered, reference_, DampedConstants(0, 0, 0));
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.first_violation.has_value());
  EXPECT_EQ(*r.first_violation, 2);
  EXPECT_NE(StreamingReportText(r).find("first violating step: t = 2"), std::string::npos);
}

TEST_F(StreamingVerifyTest, UnderstatedLipschitzConstantIsReported) {
  StabilityConstants k = DampedConstants(0, 0, 0);
  k.lipschitz_u = 0.0;
  const StreamingReport r = VerifyStreaming(rollout_, reference_, k);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.violations, 0);
}

TEST_F(StreamingVerifyTest, MismatchedTimeBasesThrow) {
  DemonstrationEpisode shorter = reference_;
  shorter.act.resize(10);
  shorter.obs.resize(11);
  EXPECT_THROW(VerifyStreaming(rollout_, shorter, DampedConstants(0, 0, 0)), StabilityError);
  DemonstrationEpisode other = reference_;
  other.env = "planar-push";
  EXPECT_THROW(VerifyStreaming(rollout_, other, DampedConstants(0, 0, 0)), StabilityError);
}

TEST(CycleVerifyTest, OracleCorrectorStaysWithinUltimateBound) {
  const PointMass env = DampedPointMass();
  const StabilityConstants k = DampedConstants(0.05, 0.01, 0.01);
  for (bool adversarial : {false, true}) {
    OracleCorrectorOptions o;
    o.cycles = 200;
    o.seed = 5;
    o.adversarial = adversarial;
    const CycleReport r = VerifyCycles(env, k, o);
    EXPECT_TRUE(r.pass) << adversarial;
    EXPECT_EQ(r.violations, 0);
    EXPECT_LE(r.tail_max, k.beta() / (1.0 - k.alpha()) + 1e-9);
    for (const CycleCheck& c : r.cycles) {
      EXPECT_LE(c.z_next, k.alpha() * c.z + k.beta() + 1e-9);
    }
  }
}

TEST(CycleVerifyTest, IdealCaseConvergesToZero) {
  const StabilityConstants k = DampedConstants(0.0, 0.0, 0.0);
  OracleCorrectorOptions o;
  o.cycles = 50;
  const CycleReport r = VerifyCycles(DampedPointMass(), k, o);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.final_error, 1e-6);
  EXPECT_DOUBLE_EQ(r.limit, 0.0);
}

TEST(CycleVerifyTest, UnderstatedContractionIsReported) {
  StabilityConstants k = DampedConstants(0.05, 0.01, 0.01);
  k.lipschitz_x = 0.5;
  OracleCorrectorOptions o;
  o.adversarial = true;
  const CycleReport r = VerifyCycles(DampedPointMass(), k, o);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.violations, 0);
}

}  // namespace
}  // namespace tdp
