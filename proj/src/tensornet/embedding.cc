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

#include "tdp/tensornet/embedding.h"

#include <cmath>
#include <string>

namespace tdp {
namespace {

void CheckArgs(int dim, double scale) {
  if (dim <= 0 || dim % 2 != 0) {
    throw TensorError("sinusoidal embedding dimension must be even and positive, got " +
                      std::to_string(dim));
  }
  if (!(scale > 0.0)) throw TensorError("sinusoidal embedding scale must be positive");
}

void FillRow(double t, int dim, double scale, double* out) {
  const int half = dim / 2;
  for (int j = 0; j < half; ++j) {
    const double freq = std::pow(kEmbeddingBase, -static_cast<double>(j) / half);
    const double a = t * scale * freq;
    out[2 * j] = std::sin(a);
    out[2 * j + 1] = std::cos(a);
  }
}

}  // namespace

DenseArray SinusoidalEmbed(double t, int dim, double scale) {
  CheckArgs(dim, scale);
  DenseArray out({dim});
  FillRow(t, dim, scale, out.data());
  return out;
}

DenseArray SinusoidalEmbedBatch(const std::vector<double>& t, int dim,
                                double scale) {
  CheckArgs(dim, scale);
  DenseArray out({static_cast<int>(t.size()), dim});
  for (std::size_t i = 0; i < t.size(); ++i) {
    FillRow(t[i], dim, scale, out.data() + i * dim);
  }
  return out;
}

}  // namespace tdp
