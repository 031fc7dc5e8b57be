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

#include "tdp/cli/protocol.h"

#include <cmath>

namespace tdp {

std::string FormatFrame(const FrameMessage& f) {
  return nlohmann::json{{"type", "frame"},   {"t", f.t},         {"episode", f.episode},
                        {"state", f.state},  {"action", f.action}, {"phase", f.phase},
                        {"t2", f.t2},        {"mode", f.mode},   {"disturbance", f.disturbance}}
      .dump();
}

std::string FormatEpisodeEnd(int episode, const nlohmann::json& metrics) {
  return nlohmann::json{{"type", "episode_end"}, {"episode", episode}, {"metrics", metrics}}
      .dump();
}

std::string FormatHello(const HelloMessage& h) {
  return nlohmann::json{{"type", "hello"},
                        {"env", h.env},
                        {"mode", h.mode},
                        {"action_horizon", h.action_horizon},
                        {"w_bar", h.w_bar ? nlohmann::json(*h.w_bar) : nlohmann::json(nullptr)},
                        {"rate_hz", h.rate_hz}}
      .dump();
}

std::string FormatError(const std::string& what) {
  return nlohmann::json{{"type", "error"}, {"message", what}}.dump();
}

ClientMessage ParseClientMessage(const std::string& text) {
  ClientMessage m;
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    m.error = "not a JSON object";
    return m;
  }
  if (!j.contains("type") || !j.at("type").is_string()) {
    m.error = "missing string field 'type'";
    return m;
  }
  m.type_name = j.at("type").get<std::string>();
  if (m.type_name == "perturb") {
    if (!j.contains("vector") || !j.at("vector").is_array() || j.at("vector").empty()) {
      m.error = "perturb requires a nonempty numeric 'vector'";
      return m;
    }
    for (const auto& x : j.at("vector")) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        m.error = "perturb vector entries must be finite numbers";
        return m;
      }
      m.vector.push_back(x.get<double>());
    }
    m.type = ClientMessageType::kPerturb;
  } else if (m.type_name == "set_mode") {
    if (!j.contains("mode") || !j.at("mode").is_string()) {
      m.error = "set_mode requires a string 'mode'";
      return m;
    }
    m.mode = j.at("mode").get<std::string>();
    m.type = ClientMessageType::kSetMode;
  } else if (m.type_name == "reset") {
    if (j.contains("seed") && !j.at("seed").is_null()) {
      if (!j.at("seed").is_number_unsigned()) {
        m.error = "reset 'seed' must be a nonnegative integer";
        return m;
      }
      m.seed = j.at("seed").get<std::uint64_t>();
    }
    m.type = ClientMessageType::kReset;
  } else {
    m.type = ClientMessageType::kUnknown;
  }
  return m;
}

}  // namespace tdp
