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

#ifndef TDP_TENSORNET_LAYERS_H_
#define TDP_TENSORNET_LAYERS_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tdp/tensornet/autodiff.h"

namespace tdp {

enum class Activation { kIdentity, kMish };

std::string ActivationName(Activation a);
Activation ActivationFromName(const std::string& name);

// affine map y = x W + b with W stored [in, out]
struct Linear {
  Var weight;
  Var bias;

  int in() const { return weight.value().dim(0); }
  int out() const { return weight.value().dim(1); }
  Var Forward(const Var& x) const;
};

// uniform(-1/sqrt(in), 1/sqrt(in)) initialization of weight and bias
Linear MakeLinear(int in, int out, std::mt19937_64& rng);
Linear MakeZeroLinear(int in, int out);

// stack of linear layers with one activation per layer
struct MlpParams {
  std::vector<Linear> layers;
  std::vector<Activation> activations;
};

MlpParams MakeMlp(const std::vector<int>& dims,
                  const std::vector<Activation>& activations,
                  std::mt19937_64& rng);

// layer stack evaluation; checks dimensions and finiteness of the output
Var Forward(const MlpParams& params, const Var& input);

// features * (1 + scale) + shift where cond_params = [scale | shift]
Var FilmModulate(const Var& features, const Var& cond_params);

// named parameter list shared by the optimizer and checkpointing
using NamedParameters = std::vector<std::pair<std::string, Var>>;

void AppendLinear(const std::string& prefix, const Linear& layer,
                  NamedParameters* out);

std::vector<Var> ParameterVars(const NamedParameters& named);

}  // namespace tdp

#endif  // TDP_TENSORNET_LAYERS_H_
