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

#include "tdp/tensornet/adam.h"

#include <cmath>
#include <string>

namespace tdp {

AdamState MakeAdamState(const std::vector<Var>& params) {
  AdamState s;
  for (const Var& p : params) {
    s.m.push_back(DenseArray::ZerosLike(p.value()));
    s.v.push_back(DenseArray::ZerosLike(p.value()));
  }
  return s;
}

void AdamStep(std::vector<Var>& params, const std::vector<DenseArray>& grads,
              AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw TensorError("AdamStep: parameter, gradient and moment counts differ");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    DenseArray& p = params[k].mutable_value();
    const DenseArray& g = grads[k];
    DenseArray& m = state.m[k];
    DenseArray& v = state.v[k];
    if (!g.SameShape(p) || !m.SameShape(p) || !v.SameShape(p)) {
      throw TensorError("AdamStep: shape mismatch for parameter " +
                        std::to_string(k) + " " + p.ShapeString());
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

}  // namespace tdp
