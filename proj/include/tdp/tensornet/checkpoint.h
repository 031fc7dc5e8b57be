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

#ifndef TDP_TENSORNET_CHECKPOINT_H_
#define TDP_TENSORNET_CHECKPOINT_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "tdp/tensornet/dense_array.h"

namespace tdp {

// binary container layout:
//   4 bytes  "TDP1"
//   8 bytes  little-endian manifest length n
//   n bytes  UTF-8 JSON manifest {"tensors": [{name, shape, dtype}], "meta": {...}}
//   payload  little-endian float64 arrays in manifest order
struct TensorEntry {
  std::string name;
  DenseArray array;
};

struct CheckpointData {
  nlohmann::json meta;
  std::vector<TensorEntry> tensors;

  // lookup by name; throws if missing
  const DenseArray& Get(const std::string& name) const;
};

void WriteCheckpoint(const std::string& path, const CheckpointData& data);
CheckpointData ReadCheckpoint(const std::string& path);

// in-memory forms used by tests and the writer
std::string SerializeCheckpoint(const CheckpointData& data);
CheckpointData DeserializeCheckpoint(const std::string& bytes);

}  // namespace tdp

#endif  // TDP_TENSORNET_CHECKPOINT_H_
