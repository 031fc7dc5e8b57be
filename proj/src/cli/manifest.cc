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

#include "tdp/cli/manifest.h"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace tdp {
namespace {

std::string ToHex(const unsigned char* data, unsigned int n) {
  std::ostringstream out;
  for (unsigned int i = 0; i < n; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(data[i]);
  }
  return out.str();
}

using DigestContext = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

DigestContext NewContext() {
  DigestContext ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialization failed");
  }
  return ctx;
}

std::string Finish(EVP_MD_CTX* ctx) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_DigestFinal_ex(ctx, digest, &n) != 1) throw std::runtime_error("SHA-256 failed");
  return ToHex(digest, n);
}

std::vector<FileDigest> DigestsFromJson(const nlohmann::json& j) {
  std::vector<FileDigest> out;
  for (const auto& e : j) out.push_back({e.at("path"), e.at("sha256")});
  return out;
}

nlohmann::json DigestsToJson(const std::vector<FileDigest>& d) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : d) j.push_back({{"path", e.path}, {"sha256", e.sha256}});
  return j;
}

}  // namespace

std::string Sha256Hex(const std::string& bytes) {
  DigestContext ctx = NewContext();
  EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  return Finish(ctx.get());
}

std::string Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  DigestContext ctx = NewContext();
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  return Finish(ctx.get());
}

nlohmann::json ManifestToJson(const RunManifest& m) {
  return {{"tool_version", m.tool_version}, {"command", m.command},
          {"args", m.args},                 {"seed", m.seed},
          {"config", m.config},             {"out", m.out},
          {"inputs", DigestsToJson(m.inputs)}, {"outputs", DigestsToJson(m.outputs)},
          {"unhashed", m.unhashed}};
}

RunManifest ManifestFromJson(const nlohmann::json& j) {
  RunManifest m;
  m.tool_version = j.at("tool_version");
  m.command = j.at("command");
  m.args = j.at("args").get<std::vector<std::string>>();
  m.seed = j.at("seed");
  m.config = j.value("config", nlohmann::json::object());
  m.out = j.at("out");
  m.inputs = DigestsFromJson(j.value("inputs", nlohmann::json::array()));
  m.outputs = DigestsFromJson(j.at("outputs"));
  m.unhashed = j.value("unhashed", std::vector<std::string>{});
  return m;
}

void WriteManifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ManifestToJson(m).dump(2) << '\n';
}

RunManifest ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  return ManifestFromJson(nlohmann::json::parse(in));
}

std::string ManifestPathFor(const std::string& out) { return out + ".manifest.json"; }

void DigestOutputs(RunManifest& m, const std::vector<std::string>& files) {
  m.outputs.clear();
  for (const std::string& f : files) {
    m.outputs.push_back({std::filesystem::path(f).filename().string(), Sha256File(f)});
  }
}

std::vector<DigestMismatch> CompareOutputs(const RunManifest& m, const std::string& dir) {
  std::vector<DigestMismatch> out;
  for (const FileDigest& d : m.outputs) {
    const std::string path = (std::filesystem::path(dir) / d.path).string();
    std::string actual = "missing";
    if (std::filesystem::exists(path)) actual = Sha256File(path);
    if (actual != d.sha256) out.push_back({d.path, d.sha256, actual});
  }
  return out;
}

}  // namespace tdp
