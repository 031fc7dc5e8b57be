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

#ifndef TDP_TRAINING_CHUNKS_H_
#define TDP_TRAINING_CHUNKS_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "tdp/envs/demos.h"
#include "tdp/policy/normalizer.h"

namespace tdp {

class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

// aligned observation and action windows; entry i sits at t2 = i / H_p
struct Chunk {
  std::vector<std::vector<double>> obs;  // H_o + H_p entries
  std::vector<std::vector<double>> act;  // H_p entries
};

struct SliceOptions {
  int stride = 1;
  // copies of the first / last (observation, action) pair added to the ends
  int pad_before = 0;
  int pad_after = 0;
};

// windows starting at s = 0, stride, ...: obs [s, s + H_o + H_p),
// act [s + H_o - 1, s + H_o - 1 + H_p); too-short episodes yield no chunks
std::vector<Chunk> SliceChunks(const std::vector<std::vector<double>>& obs,
                               const std::vector<std::vector<double>>& act, int pred_horizon,
                               int obs_horizon, const SliceOptions& options = {});

// read-only view of one chunk stored row-major
struct ChunkView {
  const double* obs = nullptr;  // (H_o + H_p) x n_o
  const double* act = nullptr;  // H_p x n_u
  int obs_horizon = 0;
  int pred_horizon = 0;
  int obs_dim = 0;
  int act_dim = 0;
};

// all chunks of a normalized demo set in contiguous storage
class ChunkDataset {
 public:
  ChunkDataset(const std::vector<DemonstrationEpisode>& demos, const Normalizer& normalizer,
               int pred_horizon, int obs_horizon, const SliceOptions& options);
  ChunkDataset(const std::vector<Chunk>& chunks, int pred_horizon, int obs_horizon);

  int size() const { return count_; }
  ChunkView View(int i) const;
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  int pred_horizon() const { return pred_horizon_; }
  int obs_horizon() const { return obs_horizon_; }

 private:
  void Append(const Chunk& c);

  int pred_horizon_ = 0;
  int obs_horizon_ = 0;
  int obs_dim_ = 0;
  int act_dim_ = 0;
  int count_ = 0;
  std::vector<double> obs_;
  std::vector<double> act_;
};

}  // namespace tdp

#endif  // TDP_TRAINING_CHUNKS_H_
