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

#ifndef TDP_TENSORNET_EMBEDDING_H_
#define TDP_TENSORNET_EMBEDDING_H_

#include <vector>

#include "tdp/tensornet/dense_array.h"

namespace tdp {

inline constexpr double kEmbeddingBase = 10000.0;

// interleaved [sin, cos] pairs of t*scale at frequencies base^(-j/(dim/2)),
// j = 0..dim/2-1
DenseArray SinusoidalEmbed(double t, int dim, double scale);

// one embedding row per entry of |t|, shape [t.size(), dim]
DenseArray SinusoidalEmbedBatch(const std::vector<double>& t, int dim,
                                double scale);

}  // namespace tdp

#endif  // TDP_TENSORNET_EMBEDDING_H_
