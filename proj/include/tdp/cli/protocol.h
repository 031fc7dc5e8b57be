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

#ifndef TDP_CLI_PROTOCOL_H_
#define TDP_CLI_PROTOCOL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tdp {

// server -> client
struct FrameMessage {
  int t = 0;
  int episode = 0;
  std::vector<double> state;
  std::vector<double> action;
  std::string phase;
  double t2 = 0.0;
  std::string mode;
  std::vector<double> disturbance;
};

struct HelloMessage {
  std::string env;
  std::string mode;
  int action_horizon = 0;
  std::optional<double> w_bar;
  double rate_hz = 0.0;
};

std::string FormatFrame(const FrameMessage& f);
std::string FormatEpisodeEnd(int episode, const nlohmann::json& metrics);
std::string FormatHello(const HelloMessage& h);
std::string FormatError(const std::string& what);

// client -> server
enum class ClientMessageType { kPerturb, kSetMode, kReset, kUnknown, kMalformed };

struct ClientMessage {
  ClientMessageType type = ClientMessageType::kMalformed;
  std::vector<double> vector;         // perturb
  std::string mode;                   // set_mode
  std::optional<std::uint64_t> seed;  // reset
  std::string type_name;
  std::string error;  // reason for kMalformed
};

// never throws; unknown fields are ignored
ClientMessage ParseClientMessage(const std::string& text);

}  // namespace tdp

#endif  // TDP_CLI_PROTOCOL_H_
