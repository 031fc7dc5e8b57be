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

#ifndef TDP_CLI_MANIFEST_H_
#define TDP_CLI_MANIFEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace tdp {

inline constexpr char kToolVersion[] = "tdp 0.1.0";

std::string Sha256Hex(const std::string& bytes);
std::string Sha256File(const std::string& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

// record written beside every command's outputs; |args| replays the command
// with the output path substituted
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::string out;  // value of --out
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;  // hashed, relative to the --out directory
  std::vector<std::string> unhashed;  // wall-clock side files
};

nlohmann::json ManifestToJson(const RunManifest& m);
RunManifest ManifestFromJson(const nlohmann::json& j);
void WriteManifest(const std::string& path, const RunManifest& m);
RunManifest ReadManifest(const std::string& path);

// <out>.manifest.json
std::string ManifestPathFor(const std::string& out);

// fills |outputs| with the digests of the given files
void DigestOutputs(RunManifest& m, const std::vector<std::string>& files);

struct DigestMismatch {
  std::string file;
  std::string expected;
  std::string actual;
};

// compares the recorded output digests against files of the same names in
// |dir|
std::vector<DigestMismatch> CompareOutputs(const RunManifest& m, const std::string& dir);

}  // namespace tdp

#endif  // TDP_CLI_MANIFEST_H_
