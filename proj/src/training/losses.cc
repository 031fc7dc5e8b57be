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

#include "tdp/training/losses.h"

#include <algorithm>

#include "tdp/training/targets.h"

namespace tdp {
namespace {

void SetRow(DenseArray& a, int r, const std::vector<double>& v) {
  std::copy(v.begin(), v.end(), a.data() + static_cast<std::size_t>(r) * a.cols());
}

void SetRow(DenseArray& a, int r, const double* v) {
  std::copy(v, v + a.cols(), a.data() + static_cast<std::size_t>(r) * a.cols());
}

// [top; bottom] for two arrays of equal width
DenseArray StackRows(const DenseArray& top, const DenseArray& bottom) {
  DenseArray out({top.rows() + bottom.rows(), top.cols()});
  std::copy(top.values().begin(), top.values().end(), out.data());
  std::copy(bottom.values().begin(), bottom.values().end(), out.data() + top.size());
  return out;
}

}  // namespace

TrainBatch SampleBatch(const ChunkDataset& data, int batch_size, const NoiseSchedule& schedule,
                       const FlowParams& flow, Rng& rng) {
  if (batch_size < 1) throw TrainingError("batch size must be positive");
  const int n_u = data.act_dim();
  const int hist_dim = data.obs_horizon() * data.obs_dim();
  TrainBatch b;
  b.size = batch_size;
  b.diff_u = DenseArray({batch_size, n_u});
  b.diff_hist = DenseArray({batch_size, hist_dim});
  b.diff_eps = DenseArray({batch_size, n_u});
  b.stream_u = DenseArray({batch_size, n_u});
  b.stream_hist = DenseArray({batch_size, hist_dim});
  b.stream_target = DenseArray({batch_size, n_u});
  for (int r = 0; r < batch_size; ++r) {
    const int idx = static_cast<int>(rng.UniformInt(0, data.size() - 1));
    b.chunk_index.push_back(idx);
    const ChunkView c = data.View(idx);

    const int t1 = static_cast<int>(rng.UniformInt(0, schedule.steps));
    std::vector<double> eps(n_u);
    for (double& e : eps) e = rng.Normal();
    const std::vector<double> u0(c.act, c.act + n_u);
    b.t1.push_back(t1);
    SetRow(b.diff_u, r, ForwardNoise(u0, t1, eps, schedule));
    SetRow(b.diff_hist, r, c.obs);
    SetRow(b.diff_eps, r, eps);

    const double t2 = rng.Uniform01();
    const std::vector<double> u =
        SampleStabilizing(InterpolateAction(c, t2), t2, flow.sigma0, flow.k, rng);
    b.t2.push_back(t2);
    SetRow(b.stream_u, r, u);
    SetRow(b.stream_hist, r, AlignedHistory(c, t2));
    SetRow(b.stream_target, r, TargetVelocity(c, u, t2, flow.lambda_flow));
  }
  return b;
}

Var DiffusionLossFromPrediction(const Var& eps_hat, const DenseArray& eps) {
  return MeanSquaredRowNorm(Sub(eps_hat, Constant(eps)));
}

Var StreamingLossFromPrediction(const Var& v_hat, const DenseArray& target) {
  return MeanSquaredRowNorm(Sub(v_hat, Constant(target)));
}

Var DiffusionLoss(const DualTimePolicy& policy, const TrainBatch& batch) {
  const std::vector<double> t2(batch.size, 0.0);
  const Var pred =
      policy.Forward(Constant(batch.diff_u), batch.t1, t2, Constant(batch.diff_hist));
  return DiffusionLossFromPrediction(pred, batch.diff_eps);
}

Var StreamingLoss(const DualTimePolicy& policy, const TrainBatch& batch) {
  const std::vector<double> t1(batch.size, 0.0);
  const Var pred =
      policy.Forward(Constant(batch.stream_u), t1, batch.t2, Constant(batch.stream_hist));
  return StreamingLossFromPrediction(pred, batch.stream_target);
}

CombinedLoss ComputeCombinedLoss(const DualTimePolicy& policy, const TrainBatch& batch) {
  const int n = batch.size;
  std::vector<double> t1 = batch.t1;
  t1.resize(2 * n, 0.0);
  std::vector<double> t2(n, 0.0);
  t2.insert(t2.end(), batch.t2.begin(), batch.t2.end());
  const Var pred = policy.Forward(Constant(StackRows(batch.diff_u, batch.stream_u)), t1, t2,
                                  Constant(StackRows(batch.diff_hist, batch.stream_hist)));
  CombinedLoss out;
  out.diffusion = DiffusionLossFromPrediction(SliceRows(pred, 0, n), batch.diff_eps);
  out.streaming = StreamingLossFromPrediction(SliceRows(pred, n, 2 * n), batch.stream_target);
  out.total = Add(out.diffusion, out.streaming);
  return out;
}

}  // namespace tdp
