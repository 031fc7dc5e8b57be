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

#include "tdp/tensornet/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tdp {
namespace {

constexpr char kMagic[4] = {'T', 'D', 'P', '1'};

void PutU64(std::string* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t GetU64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

void PutF64(std::string* out, double d) { PutU64(out, std::bit_cast<std::uint64_t>(d)); }

}  // namespace

const DenseArray& CheckpointData::Get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.array;
  }
  throw TensorError("checkpoint has no tensor named " + name);
}

std::string SerializeCheckpoint(const CheckpointData& data) {
  nlohmann::json manifest;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& t : data.tensors) {
    manifest["tensors"].push_back(
        {{"name", t.name}, {"shape", t.array.shape()}, {"dtype", "f64"}});
  }
  manifest["meta"] = data.meta.is_null() ? nlohmann::json::object() : data.meta;
  const std::string text = manifest.dump();

  std::string out(kMagic, 4);
  PutU64(&out, text.size());
  out += text;
  for (const auto& t : data.tensors) {
    t.array.CheckFinite("checkpoint tensor " + t.name);
    for (double v : t.array.values()) PutF64(&out, v);
  }
  return out;
}

CheckpointData DeserializeCheckpoint(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw TensorError("not a TDP1 checkpoint (bad magic)");
  }
  const std::uint64_t n = GetU64(bytes, 4);
  if (12 + n > bytes.size()) throw TensorError("truncated checkpoint manifest");
  nlohmann::json manifest = nlohmann::json::parse(bytes.substr(12, n));
  CheckpointData data;
  data.meta = manifest.value("meta", nlohmann::json::object());
  std::size_t pos = 12 + n;
  for (const auto& entry : manifest.at("tensors")) {
    if (entry.at("dtype") != "f64") throw TensorError("unsupported dtype");
    std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    const std::size_t count = ShapeSize(shape);
    if (pos + 8 * count > bytes.size()) throw TensorError("truncated checkpoint payload");
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = std::bit_cast<double>(GetU64(bytes, pos));
      pos += 8;
    }
    data.tensors.push_back({entry.at("name").get<std::string>(),
                            DenseArray(std::move(shape), std::move(values))});
  }
  if (pos != bytes.size()) throw TensorError("trailing bytes after checkpoint payload");
  return data;
}

void WriteCheckpoint(const std::string& path, const CheckpointData& data) {
  const std::string bytes = SerializeCheckpoint(data);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw TensorError("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw TensorError("failed writing " + path);
}

CheckpointData ReadCheckpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw TensorError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace tdp
