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

#ifndef TDP_TRAINING_LOSSES_H_
#define TDP_TRAINING_LOSSES_H_

#include <vector>

#include "tdp/envs/rng.h"
#include "tdp/policy/dual_time_policy.h"
#include "tdp/policy/schedule.h"
#include "tdp/tensornet/autodiff.h"
#include "tdp/training/chunks.h"

namespace tdp {

struct FlowParams {
  double lambda_flow = 5.0;  // contraction rate toward the demo trajectory
  double k = 2.0;            // decay rate of the sampling std
  double sigma0 = 0.1;       // sampling std at t2 = 0
};

// one diffusion half and one streaming half; row b of both halves comes
// from the same chunk
struct TrainBatch {
  int size = 0;
  std::vector<int> chunk_index;
  // diffusion half
  std::vector<double> t1;
  DenseArray diff_u;     // noised zeta_u(0)
  DenseArray diff_hist;  // zeta_o[0 : H_o]
  DenseArray diff_eps;
  // streaming half
  std::vector<double> t2;
  DenseArray stream_u;
  DenseArray stream_hist;
  DenseArray stream_target;
};

// draws chunk indices, t1 ~ U{0..T}, eps ~ N(0, I), t2 ~ U[0, 1) and
// u ~ N(zeta_u(t2), sigma0^2 e^{-2 k t2}) in a fixed order
TrainBatch SampleBatch(const ChunkDataset& data, int batch_size, const NoiseSchedule& schedule,
                       const FlowParams& flow, Rng& rng);

// mean over rows of the squared row norm of (prediction - target)
Var DiffusionLossFromPrediction(const Var& eps_hat, const DenseArray& eps);
Var StreamingLossFromPrediction(const Var& v_hat, const DenseArray& target);

Var DiffusionLoss(const DualTimePolicy& policy, const TrainBatch& batch);
Var StreamingLoss(const DualTimePolicy& policy, const TrainBatch& batch);

struct CombinedLoss {
  Var total;
  Var diffusion;
  Var streaming;
};

// both halves through a single 2B-row forward pass
CombinedLoss ComputeCombinedLoss(const DualTimePolicy& policy, const TrainBatch& batch);

}  // namespace tdp

#endif  // TDP_TRAINING_LOSSES_H_
