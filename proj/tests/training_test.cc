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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "tdp/envs/rng.h"
#include "tdp/policy/schedule.h"
#include "tdp/tensornet/autodiff.h"
#include "tdp/tensornet/checkpoint.h"
#include "tdp/training/chunks.h"
#include "tdp/training/losses.h"
#include "tdp/training/targets.h"
#include "tdp/training/trainer.h"
#include "test_util.h"

namespace tdp {
namespace {

double NormalCdf(double x, double sigma) {
  return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0)));
}

// Kolmogorov-Smirnov statistic of |samples| against |cdf|
template <typename Cdf>
double KsStatistic(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
  }
  return d;
}

HyperParams TinyHyper() {
  HyperParams h;
  h.pred_horizon = 4;
  h.obs_horizon = 2;
  h.action_horizon = 2;
  h.width = 8;
  h.depth = 2;
  h.obs_features = 6;
  h.time_features = 4;
  h.batch_size = 4;
  h.steps = 20;
  h.log_every = 5;
  h.lr = 1e-3;
  return h;
}

TEST(LossTest, HandComputedValues) {
  const Var eps_hat = Constant(DenseArray::Matrix(1, 1, {0.5}));
  EXPECT_DOUBLE_EQ(DiffusionLossFromPrediction(eps_hat, DenseArray::Matrix(1, 1, {0.0}))
                       .value()
                       .item(),
                   0.25);
  const Var v_hat = Constant(DenseArray::Matrix(1, 1, {0.75}));
  EXPECT_DOUBLE_EQ(StreamingLossFromPrediction(v_hat, DenseArray::Matrix(1, 1, {0.0}))
                       .value()
                       .item(),
                   0.5625);
  // mean over rows of the squared row norm
  const Var two = Constant(DenseArray::Matrix(2, 2, {1.0, 1.0, 0.0, 2.0}));
  EXPECT_DOUBLE_EQ(
      StreamingLossFromPrediction(two, DenseArray::Matrix(2, 2, {0.0, 0.0, 0.0, 0.0}))
          .value()
          .item(),
      (2.0 + 4.0) / 2.0);
}

TEST(TargetsTest, AlignedIndexFloorsAndClamps) {
  EXPECT_EQ(AlignedIndex(0.5, 16), 8);
  EXPECT_EQ(AlignedIndex(0.999, 16), 15);
  EXPECT_EQ(AlignedIndex(1.0, 16), 15);
  EXPECT_EQ(AlignedIndex(0.0, 16), 0);
  EXPECT_EQ(AlignedIndex(0.0624, 16), 0);
  EXPECT_EQ(AlignedIndex(0.0625, 16), 1);
}

TEST(TargetsTest, StabilizingStdAndVariance) {
  EXPECT_NEAR(StabilizingStd(1.0, 1.0, 1.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(std::pow(StabilizingStd(1.0, 1.0, 1.0), 2), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(StabilizingStd(0.0, 0.3, 2.0), 0.3, 1e-15);
  Rng rng(3);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleStabilizing({2.0}, 1.0, 1.0, 1.0, rng)[0] - 2.0;
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  EXPECT_LT(std::abs(var - std::exp(-2.0)) / std::exp(-2.0), 0.02);
  EXPECT_LT(std::abs(mean), 3.0 * std::exp(-1.0) / std::sqrt(static_cast<double>(n)));
}

TEST(TargetsTest, StabilizingSamplesPassKolmogorovSmirnov) {
  Rng rng(17);
  std::vector<double> samples;
  const int n = 20000;
  const double t2 = 0.4, sigma0 = 1.0, k = 0.5;
  for (int i = 0; i < n; ++i) samples.push_back(SampleStabilizing({0.0}, t2, sigma0, k, rng)[0]);
  const double sigma = sigma0 * std::exp(-k * t2);
  const double d = KsStatistic(samples, [&](double x) { return NormalCdf(x, sigma); });
  EXPECT_LT(d, 1.36 / std::sqrt(static_cast<double>(n)));
  // a wrong width is rejected by the same statistic
  const double wrong = KsStatistic(samples, [&](double x) { return NormalCdf(x, 1.2 * sigma); });
  EXPECT_GT(wrong, 1.36 / std::sqrt(static_cast<double>(n)));
}

TEST(TargetsTest, InterpolationHitsKnotsAndMidpoints) {
  const ChunkDataset d = testing_util::RampChunk(8, 1.0, 4.0);
  const ChunkView v = d.View(0);
  for (int i = 0; i < 8; ++i) {
    EXPECT_NEAR(InterpolateAction(v, i / 8.0)[0], 1.0 + 4.0 * i / 8.0, 1e-14);
  }
  EXPECT_NEAR(InterpolateAction(v, 0.5 / 8.0)[0], 1.0 + 4.0 * 0.5 / 8.0, 1e-14);
  // linear extrapolation past the last knot
  EXPECT_NEAR(InterpolateAction(v, 0.95)[0], 1.0 + 4.0 * 0.95, 1e-13);
  for (double t2 : {0.0, 0.3, 0.8, 0.99}) {
    EXPECT_NEAR(ActionDerivative(v, t2)[0], 4.0, 1e-12) << t2;
  }
}

TEST(TargetsTest, EulerOnContractionFieldConvergesAtFirstOrder) {
  const double c = 0.4, d = 1.5, lambda = 5.0, horizon = 0.5;
  const ChunkDataset constant = testing_util::ConstantChunk(16, c);
  const auto exact = [&](double t) { return c + d * std::exp(-lambda * t); };
  std::vector<double> errors;
  for (int steps : {16, 32, 64, 128, 256}) {
    errors.push_back(testing_util::EulerFinalError(constant.View(0), c + d, lambda, horizon, steps, exact));
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double order = std::log2(errors[i] / errors[i + 1]);
    EXPECT_NEAR(order, 1.0, 0.1) << i;
  }
  EXPECT_LT(errors.back(), 5e-3);

  // a moving reference: zeta(t) = a + b t, exact u = a + b t + d e^{-lambda t}
  const double a = -0.2, b = 0.8;
  const ChunkDataset ramp = testing_util::RampChunk(16, a, b);
  const auto exact_ramp = [&](double t) { return a + b * t + d * std::exp(-lambda * t); };
  std::vector<double> ramp_errors;
  for (int steps : {16, 32, 64, 128}) {
    ramp_errors.push_back(
        testing_util::EulerFinalError(ramp.View(0), a + d, lambda, horizon, steps, exact_ramp));
  }
  for (std::size_t i = 0; i + 1 < ramp_errors.size(); ++i) {
    EXPECT_NEAR(std::log2(ramp_errors[i] / ramp_errors[i + 1]), 1.0, 0.1) << i;
  }
}

TEST(ChunkTest, SliceCountsAndReassembly) {
  const int n = 20;
  std::vector<std::vector<double>> obs, act;
  for (int i = 0; i <= n; ++i) obs.push_back({static_cast<double>(i)});
  for (int i = 0; i < n; ++i) act.push_back({100.0 + i});
  const int hp = 4, ho = 2;
  EXPECT_EQ(SliceChunks(obs, act, hp, ho).size(), static_cast<std::size_t>(n - hp - ho + 2));
  SliceOptions strided;
  strided.stride = 3;
  EXPECT_EQ(SliceChunks(obs, act, hp, ho, strided).size(),
            static_cast<std::size_t>((n - hp - ho + 1) / 3 + 1));

  SliceOptions padded;
  padded.pad_before = 3;
  padded.pad_after = 2;
  const std::vector<Chunk> chunks = SliceChunks(obs, act, hp, ho, padded);
  ASSERT_EQ(chunks.size(), static_cast<std::size_t>(n + 3 + 2 - hp - ho + 2));
  for (std::size_t s = 0; s < chunks.size(); ++s) {
    const int shift = static_cast<int>(s) - 3;
    for (int j = 0; j < ho + hp; ++j) {
      const int src = std::clamp(shift + j, 0, n);
      EXPECT_EQ(chunks[s].obs[j][0], static_cast<double>(src));
    }
    for (int j = 0; j < hp; ++j) {
      const int src = std::clamp(shift + ho - 1 + j, 0, n - 1);
      EXPECT_EQ(chunks[s].act[j][0], 100.0 + src);
    }
  }
  // the unpadded chunks reassemble the full action sequence
  const std::vector<Chunk> plain = SliceChunks(obs, act, hp, ho);
  std::vector<double> rebuilt;
  for (const Chunk& c : plain) rebuilt.push_back(c.act[0][0]);
  for (int j = 1; j < hp; ++j) rebuilt.push_back(plain.back().act[j][0]);
  ASSERT_EQ(rebuilt.size(), static_cast<std::size_t>(n - ho + 1));
  for (std::size_t i = 0; i < rebuilt.size(); ++i) EXPECT_EQ(rebuilt[i], 100.0 + ho - 1 + i);

  std::vector<std::vector<double>> short_obs(obs.begin(), obs.begin() + 4);
  std::vector<std::vector<double>> short_act(act.begin(), act.begin() + 3);
  EXPECT_TRUE(SliceChunks(short_obs, short_act, hp, ho).empty());
  EXPECT_THROW(SliceChunks(obs, act, 0, ho), TrainingError);
}

TEST(BatchTest, TargetsMatchIndependentReconstruction) {
  const ChunkDataset data = testing_util::RandomDataset(5, 4, 2, 3, 2, 21);
  const NoiseSchedule schedule = BuildSchedule(100, 1e-4, 2e-2);
  FlowParams flow;
  flow.lambda_flow = 3.0;
  Rng rng(5);
  const TrainBatch b = SampleBatch(data, 64, schedule, flow, rng);
  ASSERT_EQ(b.size, 64);
  for (int i = 0; i < b.size; ++i) {
    const ChunkView v = data.View(b.chunk_index[i]);
    // diffusion half: noised first action of the chunk
    const int t1 = static_cast<int>(b.t1[i]);
    EXPECT_EQ(static_cast<double>(t1), b.t1[i]);
    EXPECT_GE(t1, 0);
    EXPECT_LE(t1, 100);
    const double a = schedule.alpha_bar[t1];
    for (int d = 0; d < 2; ++d) {
      const double expected = std::sqrt(a) * v.act[d] + std::sqrt(1 - a) * b.diff_eps.at(i, d);
      EXPECT_NEAR(b.diff_u.at(i, d), expected, 1e-12);
    }
    for (int j = 0; j < 6; ++j) EXPECT_EQ(b.diff_hist.at(i, j), v.obs[j]);
    // streaming half: same chunk, aligned history, contraction target
    const double t2 = b.t2[i];
    EXPECT_GE(t2, 0.0);
    EXPECT_LT(t2, 1.0);
    const int l = std::min(static_cast<int>(std::floor(t2 * 4)), 3);
    for (int j = 0; j < 6; ++j) EXPECT_EQ(b.stream_hist.at(i, j), v.obs[l * 3 + j]);
    const double x = t2 * 4;
    const int seg = std::min(static_cast<int>(std::floor(x)), 2);
    for (int d = 0; d < 2; ++d) {
      const double a0 = v.act[seg * 2 + d], a1 = v.act[(seg + 1) * 2 + d];
      const double mean = a0 + (x - seg) * (a1 - a0);
      const double h = 0.25;
      const double lo = std::max(t2 - h, 0.0), hi = std::min(t2 + h, 0.75);
      const auto interp = [&](double t) {
        const double y = t * 4;
        const int s = std::min(static_cast<int>(std::floor(y)), 2);
        return v.act[s * 2 + d] + (y - s) * (v.act[(s + 1) * 2 + d] - v.act[s * 2 + d]);
      };
      const double slope = (interp(hi) - interp(lo)) / (hi - lo);
      const double target = slope - 3.0 * (b.stream_u.at(i, d) - mean);
      EXPECT_NEAR(b.stream_target.at(i, d), target, 1e-12);
    }
  }
}

TEST(BatchTest, TimeDrawsAreUniform) {
  const ChunkDataset data = testing_util::RandomDataset(3, 4, 1, 1, 1, 2);
  const NoiseSchedule schedule = BuildSchedule(100, 1e-4, 2e-2);
  Rng rng(8);
  std::vector<double> t2;
  std::vector<int> t1_counts(101, 0);
  for (int k = 0; k < 200; ++k) {
    const TrainBatch b = SampleBatch(data, 64, schedule, FlowParams{}, rng);
    t2.insert(t2.end(), b.t2.begin(), b.t2.end());
    for (double t : b.t1) ++t1_counts[static_cast<int>(t)];
  }
  const double d = KsStatistic(t2, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LT(d, 1.36 / std::sqrt(static_cast<double>(t2.size())));
  EXPECT_GT(t1_counts[0], 0);
  EXPECT_GT(t1_counts[100], 0);
  // chi-square against the uniform law on 101 values (df 100, 0.999 quantile 149.4)
  const double expected = 12800.0 / 101.0;
  double chi2 = 0.0;
  for (int c : t1_counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 149.4);
}

TEST(LossTest, CombinedGradientIsSumOfHalves) {
  const PolicyConfig config = testing_util::TinyPolicyConfig();
  DualTimePolicy policy(config, 1);
  testing_util::RandomizeParameters(policy, 2, 0.5);
  const ChunkDataset data = testing_util::RandomDataset(6, 4, 2, 3, 2, 3);
  Rng rng(4);
  const TrainBatch batch = SampleBatch(data, 8, policy.schedule(), FlowParams{}, rng);
  const std::vector<Var> params = policy.parameter_vars();
  const CombinedLoss combined = ComputeCombinedLoss(policy, batch);
  const std::vector<DenseArray> g_total = Backward(combined.total, params);
  const Var l_diff = DiffusionLoss(policy, batch);
  const std::vector<DenseArray> g_diff = Backward(l_diff, params);
  const Var l_stream = StreamingLoss(policy, batch);
  const std::vector<DenseArray> g_stream = Backward(l_stream, params);
  EXPECT_NEAR(combined.diffusion.value().item(), l_diff.value().item(), 1e-12);
  EXPECT_NEAR(combined.streaming.value().item(), l_stream.value().item(), 1e-12);
  EXPECT_NEAR(combined.total.value().item(), l_diff.value().item() + l_stream.value().item(),
              1e-12);
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < g_total[p].size(); ++i) {
      EXPECT_NEAR(g_total[p][i], g_diff[p][i] + g_stream[p][i],
                  1e-10 * (1.0 + std::abs(g_total[p][i])));
    }
  }
}

TEST(HyperParamsTest, JsonRoundTripAndValidation) {
  HyperParams h = TinyHyper();
  h.flow.k = 0.75;
  h.slicing.pad_before = 3;
  const HyperParams back = HyperParamsFromJson(HyperParamsToJson(h));
  EXPECT_EQ(HyperParamsToJson(back), HyperParamsToJson(h));
  nlohmann::json bad = HyperParamsToJson(h);
  bad["lerning_rate"] = 0.1;
  EXPECT_THROW(HyperParamsFromJson(bad), TrainingError);
  HyperParams wrong = TinyHyper();
  wrong.action_horizon = 9;  // beyond H_p
  EXPECT_THROW(wrong.Validate(), TrainingError);
  wrong = TinyHyper();
  wrong.lr = -1.0;
  EXPECT_THROW(wrong.Validate(), TrainingError);
}

TEST(TrainerTest, LossDecreasesOnToyData) {
  const ChunkDataset data = testing_util::RandomDataset(4, 4, 2, 3, 2, 9);
  HyperParams h = TinyHyper();
  h.steps = 300;
  h.log_every = 50;
  h.lr = 3e-3;
  Trainer trainer(data, h, Normalizer{}, 1);
  const std::vector<TrainLogEntry> log = trainer.Run();
  ASSERT_EQ(log.size(), 6u);
  EXPECT_EQ(log.back().step, 300);
  EXPECT_LT(log.back().loss, log.front().loss);
  for (const TrainLogEntry& e : log) {
    EXPECT_NEAR(e.loss, e.l_diff + e.l_stream, 1e-12);
  }
}

TEST(TrainerTest, ResumeContinuesIdenticalTrajectory) {
  const ChunkDataset data = testing_util::RandomDataset(6, 4, 2, 3, 2, 10);
  HyperParams full = TinyHyper();
  full.steps = 40;
  Trainer straight(data, full, Normalizer{}, 77);
  const std::vector<TrainLogEntry> straight_log = straight.Run();

  HyperParams half = full;
  half.steps = 20;
  Trainer first(data, half, Normalizer{}, 77);
  first.Run();
  const std::string bytes = SerializeCheckpoint(first.ToCheckpoint());

  Trainer resumed(data, full, Normalizer{}, 77);
  resumed.Resume(DeserializeCheckpoint(bytes));
  EXPECT_EQ(resumed.step(), 20);
  const std::vector<TrainLogEntry> resumed_log = resumed.Run();
  ASSERT_EQ(resumed_log.size(), 4u);
  for (std::size_t i = 0; i < resumed_log.size(); ++i) {
    EXPECT_EQ(resumed_log[i].step, straight_log[i + 4].step);
    EXPECT_EQ(resumed_log[i].loss, straight_log[i + 4].loss);
  }
  EXPECT_EQ(SerializeCheckpoint(resumed.ToCheckpoint()),
            SerializeCheckpoint(straight.ToCheckpoint()));

  Trainer other_seed(data, full, Normalizer{}, 78);
  EXPECT_THROW(other_seed.Resume(DeserializeCheckpoint(bytes)), TrainingError);
}

TEST(TrainerTest, NonFiniteLossRaisesDivergence) {
  Chunk c;
  c.obs.assign(6, {0.0, 0.0, 0.0});
  c.act.assign(4, {std::numeric_limits<double>::quiet_NaN(), 0.0});
  const ChunkDataset data({c}, 4, 2);
  Trainer trainer(data, TinyHyper(), Normalizer{}, 0);
  try {
    trainer.Step();
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.step, 1);
  }
  // the last good snapshot is still the finite initial network
  const CheckpointData good = trainer.LastGoodCheckpoint();
  for (const TensorEntry& t : good.tensors) {
    for (double x : t.array.values()) EXPECT_TRUE(std::isfinite(x)) << t.name;
  }
}

TEST(TrainerTest, PlateauPatienceStopsEarly) {
  const ChunkDataset data = testing_util::RandomDataset(2, 4, 2, 3, 2, 12);
  HyperParams h = TinyHyper();
  h.steps = 5000;
  h.log_every = 10;
  h.lr = 1e-9;  // no progress possible
  h.patience = 3;
  Trainer trainer(data, h, Normalizer{}, 2);
  trainer.Run();
  EXPECT_TRUE(trainer.stopped_on_plateau());
  EXPECT_LT(trainer.step(), 5000);
}

}  // namespace
}  // namespace tdp
