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

#include "tdp/tensornet/layers.h"

#include <cmath>

namespace tdp {

std::string ActivationName(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kMish:
      return "mish";
  }
  return "identity";
}

Activation ActivationFromName(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "mish") return Activation::kMish;
  throw TensorError("unknown activation " + name);
}

Var Linear::Forward(const Var& x) const {
  if (x.value().cols() != in()) {
    throw TensorError("Linear: input " + x.value().ShapeString() +
                      " does not match in-dimension " + std::to_string(in()));
  }
  return AddRowVector(MatMul(x, weight), bias);
}

Linear MakeLinear(int in, int out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  DenseArray w({in, out});
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = dist(rng);
  DenseArray b({out});
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = dist(rng);
  return Linear{Parameter(std::move(w)), Parameter(std::move(b))};
}

Linear MakeZeroLinear(int in, int out) {
  return Linear{Parameter(DenseArray({in, out})), Parameter(DenseArray({out}))};
}

MlpParams MakeMlp(const std::vector<int>& dims,
                  const std::vector<Activation>& activations,
                  std::mt19937_64& rng) {
  if (dims.size() < 2 || activations.size() != dims.size() - 1) {
    throw TensorError("MakeMlp: need one activation per layer");
  }
  MlpParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    p.layers.push_back(MakeLinear(dims[i], dims[i + 1], rng));
  }
  p.activations = activations;
  return p;
}

Var Forward(const MlpParams& params, const Var& input) {
  if (params.layers.size() != params.activations.size()) {
    throw TensorError("Forward: activation count does not match layer count");
  }
  for (std::size_t i = 1; i < params.layers.size(); ++i) {
    if (params.layers[i - 1].out() != params.layers[i].in()) {
      throw TensorError("Forward: layer " + std::to_string(i) +
                        " in-dimension does not compose");
    }
  }
  Var z = input;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    z = params.layers[i].Forward(z);
    if (params.activations[i] == Activation::kMish) z = Mish(z);
  }
  z.value().CheckFinite("mlp forward output");
  return z;
}

Var FilmModulate(const Var& features, const Var& cond_params) {
  const int c = features.value().cols();
  if (cond_params.value().cols() != 2 * c ||
      cond_params.value().rows() != features.value().rows()) {
    throw TensorError("FilmModulate: conditioning " +
                      cond_params.value().ShapeString() + " does not match " +
                      std::to_string(c) + " channels");
  }
  Var scale = SliceCols(cond_params, 0, c);
  Var shift = SliceCols(cond_params, c, 2 * c);
  return Add(Add(features, Mul(features, scale)), shift);
}

void AppendLinear(const std::string& prefix, const Linear& layer,
                  NamedParameters* out) {
  out->emplace_back(prefix + ".weight", layer.weight);
  out->emplace_back(prefix + ".bias", layer.bias);
}

std::vector<Var> ParameterVars(const NamedParameters& named) {
  std::vector<Var> vars;
  vars.reserve(named.size());
  for (const auto& [name, v] : named) vars.push_back(v);
  return vars;
}

}  // namespace tdp
