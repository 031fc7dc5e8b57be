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

#ifndef TDP_CLI_SERVE_H_
#define TDP_CLI_SERVE_H_

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tdp/cli/protocol.h"
#include "tdp/envs/disturbance.h"
#include "tdp/inference/controller.h"

namespace tdp {

struct ServeOptions {
  std::string env = "point-mass";
  std::string host = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  double rate_hz = 60.0;
  std::optional<double> w_bar;  // bound on live perturbations
  ControllerConfig controller;
  std::uint64_t seed = 0;
  // stop cleanly on SIGINT / SIGTERM
  bool handle_signals = false;
};

// single-writer simulation state: Tick() advances one environment step;
// HandleMessage() may be called from any thread and only enqueues work that
// Tick() applies at the next step boundary
class LiveSimulation {
 public:
  LiveSimulation(const DualTimePolicy& policy, const ServeOptions& options);

  // messages to broadcast for this step (a frame, plus episode_end when the
  // episode finishes)
  std::vector<std::string> Tick();

  // returns an error reply for rejected messages; unknown types are logged
  // and dropped
  std::optional<std::string> HandleMessage(const std::string& text);

  HelloMessage Hello() const;
  int episode() const { return episode_; }

 private:
  void StartEpisode();
  void ApplyPendingControl();

  const DualTimePolicy& policy_;
  ServeOptions options_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<Rng> denoise_rng_;
  std::unique_ptr<ControllerSession> session_;
  std::uint64_t base_seed_ = 0;
  int episode_ = -1;
  int state_dim_ = 0;

  LivePerturbationQueue queue_;
  mutable std::mutex control_mu_;
  std::optional<ControlMode> pending_mode_;
  std::optional<std::uint64_t> pending_reset_;
  bool reset_requested_ = false;
};

// websocket endpoint: one simulation thread ticking at rate_hz and one I/O
// thread serving every client; frames are broadcast identically to all
class ServeEndpoint {
 public:
  ServeEndpoint(const DualTimePolicy& policy, const ServeOptions& options);
  ~ServeEndpoint();
  ServeEndpoint(const ServeEndpoint&) = delete;
  ServeEndpoint& operator=(const ServeEndpoint&) = delete;

  // binds the port (throws std::runtime_error when busy) and starts threads
  void Start();
  void Stop();
  // blocks until Stop() is called from another thread or a signal arrives
  void Wait();
  unsigned short port() const { return bound_port_; }
  std::size_t client_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  unsigned short bound_port_ = 0;
};

}  // namespace tdp

#endif  // TDP_CLI_SERVE_H_
