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

#ifndef TDP_ENVS_RNG_H_
#define TDP_ENVS_RNG_H_

#include <cstdint>
#include <random>
#include <string>

namespace tdp {

// fixed stream identifiers split from a master seed
enum class RngStream : std::uint64_t {
  kDenoise = 1,
  kEnvironment = 2,
  kTraining = 3,
  kInit = 4,
  kDemo = 5,
};

// splitmix64 mix of (master, stream); stable across platforms
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream);
std::uint64_t DeriveSeed(std::uint64_t master, RngStream stream);

// seeded generator with the draws used across the project
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double Uniform(double lo, double hi);
  double Uniform01() { return Uniform(0.0, 1.0); }
  double Normal();
  // uniform integer in [lo, hi]
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);
  std::mt19937_64& engine() { return engine_; }

  // textual engine and distribution state for exact resumption
  std::string SaveState() const;
  void LoadState(const std::string& state);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tdp

#endif  // TDP_ENVS_RNG_H_
