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

#ifndef TDP_ENVS_DISTURBANCE_H_
#define TDP_ENVS_DISTURBANCE_H_

#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tdp/envs/environment.h"
#include "tdp/envs/rng.h"

namespace tdp {

class DisturbanceError : public std::runtime_error {
 public:
  explicit DisturbanceError(const std::string& what) : std::runtime_error(what) {}
};

struct ScriptedPerturbation {
  // applied after the action of this step index executes
  int step = 0;
  std::vector<double> vector;
};

// scripted additive perturbations with an optional declared bound w_bar
struct DisturbanceScript {
  std::vector<ScriptedPerturbation> entries;
  std::optional<double> bound;

  // throws DisturbanceError if an entry exceeds the bound
  void Validate() const;
  // sum of the entries scheduled at |step| (zeros if none)
  std::vector<double> At(int step, int dim) const;
  bool empty() const { return entries.empty(); }
};

double EuclideanNorm(const std::vector<double>& v);

// adds the perturbations scheduled at |step| to |state|
std::vector<double> ApplyDisturbance(std::vector<double> state,
                                     const DisturbanceScript& script, int step);

// many-producer single-consumer queue drained only at step boundaries
class LivePerturbationQueue {
 public:
  explicit LivePerturbationQueue(std::optional<double> bound = std::nullopt,
                                 std::size_t capacity = 64);
  // rejects vectors above the bound with DisturbanceError
  void Push(std::vector<double> w);
  std::vector<std::vector<double>> Drain();
  std::optional<double> bound() const { return bound_; }

 private:
  std::optional<double> bound_;
  std::size_t capacity_;
  std::mutex mu_;
  std::deque<std::vector<double>> items_;
};

// per-episode script generator parsed from a text spec:
//   none
//   midpoint:v1[,v2,...]      at step eval_steps/2
//   step:K:v1[,v2,...]        at step K
//   block-shift:K:M           planar push block moved M along +-y (random sign)
class DisturbanceGenerator {
 public:
  static DisturbanceGenerator Parse(const std::string& spec);

  DisturbanceScript Make(const Environment& env, int horizon, Rng& rng) const;
  const std::string& spec() const { return spec_; }
  // largest perturbation norm this generator can produce
  double MaxNorm() const;

 private:
  std::string spec_ = "none";
  std::string kind_ = "none";
  int step_ = 0;
  std::vector<double> vector_;
  double magnitude_ = 0.0;
};

}  // namespace tdp

#endif  // TDP_ENVS_DISTURBANCE_H_
