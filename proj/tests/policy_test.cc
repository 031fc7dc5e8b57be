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

#include "tdp/envs/rng.h"
#include "tdp/policy/ddim.h"
#include "tdp/policy/dual_time_policy.h"
#include "tdp/policy/history.h"
#include "tdp/policy/normalizer.h"
#include "tdp/policy/schedule.h"
#include "tdp/tensornet/autodiff.h"
#include "test_util.h"

namespace tdp {
namespace {

TEST(ScheduleTest, AlphaBarIsCumulativeProduct) {
  const NoiseSchedule s = BuildSchedule(100, 1e-4, 2e-2);
  ASSERT_EQ(s.beta.size(), 100u);
  ASSERT_EQ(s.alpha_bar.size(), 101u);
  EXPECT_DOUBLE_EQ(s.alpha_bar[0], 1.0);
  double product = 1.0;
  for (int t = 1; t <= 100; ++t) {
    const double beta = 1e-4 + (2e-2 - 1e-4) * (t - 1) / 99.0;
    EXPECT_NEAR(s.beta[t - 1], beta, 1e-15);
    product *= 1.0 - beta;
    EXPECT_NEAR(s.alpha_bar[t], product, 1e-14) << t;
  }
  EXPECT_GT(s.alpha_bar[50], s.alpha_bar[100]);
  EXPECT_THROW(BuildSchedule(0, 1e-4, 2e-2), PolicyError);
  EXPECT_THROW(BuildSchedule(10, 0.5, 1.5), PolicyError);
}

TEST(ForwardNoiseTest, MonteCarloMomentsMatchClosedForm) {
  const NoiseSchedule s = BuildSchedule(100, 1e-4, 2e-2);
  const std::vector<double> u0 = {0.7, -1.2};
  const int t1 = 50;
  const int n = 200000;
  Rng rng(11);
  std::vector<double> sum(2, 0.0), sum_sq(2, 0.0);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> eps = {rng.Normal(), rng.Normal()};
    const std::vector<double> u = ForwardNoise(u0, t1, eps, s);
    for (int d = 0; d < 2; ++d) {
      sum[d] += u[d];
      sum_sq[d] += u[d] * u[d];
    }
  }
  const double a = s.alpha_bar[t1];
  for (int d = 0; d < 2; ++d) {
    const double mean = sum[d] / n;
    const double var = sum_sq[d] / n - mean * mean;
    const double expected_mean = std::sqrt(a) * u0[d];
    const double expected_var = 1.0 - a;
    EXPECT_LT(std::abs(mean - expected_mean), 3.0 * std::sqrt(expected_var / n));
    EXPECT_LT(std::abs(var - expected_var) / expected_var, 0.02);
  }
}

TEST(DdimTest, TimestepsAreRoundedUniformGrid) {
  EXPECT_EQ(DdimTimesteps(100, 10),
            (std::vector<int>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100}));
  EXPECT_EQ(DdimTimesteps(100, 3), (std::vector<int>{33, 67, 100}));
  EXPECT_EQ(DdimTimesteps(100, 1), (std::vector<int>{100}));
  EXPECT_THROW(DdimTimesteps(100, 0), PolicyError);
}

TEST(DdimTest, PerfectOracleRecoversCleanSample) {
  const NoiseSchedule s = BuildSchedule(100, 1e-4, 2e-2);
  const std::vector<double> u0 = {0.3, -0.8, 1.5};
  for (int k : {1, 2, 3, 5, 10, 100}) {
    const NoisePredictor oracle = [&](const std::vector<double>& u, int t1) {
      const double a = s.alpha_bar[t1];
      std::vector<double> eps(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) {
        eps[i] = (u[i] - std::sqrt(a) * u0[i]) / std::sqrt(1.0 - a);
      }
      return eps;
    };
    const std::vector<double> out = DdimSample(oracle, {2.0, -1.0, 0.5}, s, k);
    for (std::size_t i = 0; i < u0.size(); ++i) EXPECT_NEAR(out[i], u0[i], 1e-8) << k;
  }
}

TEST(NormalizerTest, MapsRangeToUnitBoxAndBack) {
  NormalizationStats st;
  st.obs_min = {0.0, -2.0};
  st.obs_max = {1.0, 2.0};
  st.act_min = {5.0};
  st.act_max = {5.0};  // degenerate range keeps a finite map
  const Normalizer n(st);
  EXPECT_EQ(n.NormalizeObs({0.0, 2.0}), (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(n.NormalizeObs({0.5, 0.0}), (std::vector<double>{0.0, 0.0}));
  const std::vector<double> back = n.DenormalizeObs(n.NormalizeObs({0.25, 1.5}));
  EXPECT_NEAR(back[0], 0.25, 1e-15);
  EXPECT_NEAR(back[1], 1.5, 1e-15);
  EXPECT_NEAR(n.DenormalizeAct(n.NormalizeAct({5.0}))[0], 5.0, 1e-15);
  EXPECT_TRUE(std::isfinite(n.NormalizeAct({5.0})[0]));
  EXPECT_THROW(n.NormalizeObs({1.0}), PolicyError);
}

TEST(HistoryTest, RepeatsFirstObservationThenSlides) {
  ObservationHistory h(3, 1);
  EXPECT_FALSE(h.warmed_up());
  EXPECT_THROW(h.Flatten(), PolicyError);
  h.Push({1.0});
  EXPECT_EQ(h.Flatten(), (std::vector<double>{1.0, 1.0, 1.0}));
  h.Push({2.0});
  h.Push({3.0});
  h.Push({4.0});
  EXPECT_EQ(h.Flatten(), (std::vector<double>{2.0, 3.0, 4.0}));
  EXPECT_EQ(h.Latest(), (std::vector<double>{4.0}));
  EXPECT_THROW(h.Push({1.0, 2.0}), PolicyError);
}

TEST(DualTimePolicyTest, ZeroFilmHeadsIgnoreConditioning) {
  const PolicyConfig c = testing_util::TinyPolicyConfig();
  const DualTimePolicy p(c, 3);
  const std::vector<double> u = {0.1, -0.2};
  const std::vector<double> h1(c.obs_horizon * c.obs_dim, 0.3);
  const std::vector<double> h2(c.obs_horizon * c.obs_dim, -0.9);
  const std::vector<double> a = p.Predict(u, 5.0, 0.0, h1);
  const std::vector<double> b = p.Predict(u, 80.0, 0.6, h2);
  EXPECT_EQ(a, b);
}

TEST(DualTimePolicyTest, BatchedForwardMatchesSingleEvaluation) {
  const PolicyConfig c = testing_util::TinyPolicyConfig();
  DualTimePolicy p(c, 4);
  testing_util::RandomizeParameters(p, 9, 0.4);
  const DenseArray u = DenseArray::Matrix(2, 2, {0.1, 0.2, -0.5, 0.7});
  const DenseArray hist = DenseArray::Matrix(2, 6, {1, 2, 3, 4, 5, 6, -1, 0, 1, 0, -1, 2});
  const Var out = p.Forward(Constant(u), {10.0, 0.0}, {0.0, 0.4}, Constant(hist));
  const std::vector<double> row0 = p.Predict(u.Row(0), 10.0, 0.0, hist.Row(0));
  const std::vector<double> row1 = p.Predict(u.Row(1), 0.0, 0.4, hist.Row(1));
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(out.value().at(0, j), row0[j], 1e-14);
    EXPECT_NEAR(out.value().at(1, j), row1[j], 1e-14);
  }
  // the conditioning now matters
  EXPECT_NE(p.Predict(u.Row(0), 10.0, 0.0, hist.Row(0)),
            p.Predict(u.Row(0), 60.0, 0.0, hist.Row(0)));
  EXPECT_NE(p.Predict(u.Row(0), 0.0, 0.1, hist.Row(0)),
            p.Predict(u.Row(0), 0.0, 0.9, hist.Row(0)));
}

TEST(DualTimePolicyTest, CheckpointRoundTripPreservesOutputs) {
  const PolicyConfig c = testing_util::TinyPolicyConfig();
  NormalizationStats st;
  st.obs_min = {0, 0, 0};
  st.obs_max = {1, 2, 3};
  st.act_min = {-1, -1};
  st.act_max = {1, 2};
  DualTimePolicy p(c, 5, Normalizer(st));
  testing_util::RandomizeParameters(p, 6, 0.3);
  const std::string dir = testing_util::MakeTempDir("policy_ckpt");
  const std::string path = dir + "/p.tdp";
  p.Save(path, {{"env", "toy"}});
  const DualTimePolicy q = DualTimePolicy::Load(path);
  const std::vector<double> u = {0.2, 0.1};
  const std::vector<double> h = {1, 2, 3, 4, 5, 6};
  EXPECT_EQ(p.Predict(u, 12.0, 0.3, h), q.Predict(u, 12.0, 0.3, h));
  EXPECT_EQ(q.normalizer().stats().obs_max, st.obs_max);
  EXPECT_EQ(q.parameter_count(), p.parameter_count());
  EXPECT_EQ(PolicyConfigToJson(q.config()), PolicyConfigToJson(c));
  std::filesystem::remove_all(dir);
}

TEST(DualTimePolicyTest, FullSizeParameterCount) {
  PolicyConfig c;
  c.obs_dim = 5;
  c.action_dim = 2;
  c.obs_horizon = 1;
  const DualTimePolicy p(c, 0);
  const std::size_t cond = 64 + 32 + 32;
  std::size_t expected = (5 * 1) * 64 + 64;      // observation encoder
  expected += 2 * 256 + 256;                     // first hidden layer
  expected += 2 * (256 * 256 + 256);             // remaining hidden layers
  expected += 3 * (cond * 512 + 512);            // FiLM heads
  expected += 256 * 2 + 2;                       // output head
  EXPECT_EQ(p.parameter_count(), expected);
}

}  // namespace
}  // namespace tdp
