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

#include "tdp/cli/serve.h"

#include <spdlog/spdlog.h>

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <set>
#include <thread>

#include "tdp/inference/evaluate.h"

namespace tdp {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

LiveSimulation::LiveSimulation(const DualTimePolicy& policy, const ServeOptions& options)
    : policy_(policy), options_(options), base_seed_(options.seed), queue_(options.w_bar) {
  env_ = MakeEnvironment(options_.env);
  state_dim_ = env_->state_dim();
  options_.controller.Validate(policy_.config());
  StartEpisode();
}

void LiveSimulation::StartEpisode() {
  ++episode_;
  Rng env_rng(EpisodeSeed(base_seed_, RngStream::kEnvironment, episode_));
  env_->Reset(env_rng);
  denoise_rng_ =
      std::make_unique<Rng>(EpisodeSeed(base_seed_, RngStream::kDenoise, episode_));
  session_ = std::make_unique<ControllerSession>(policy_, options_.controller, *denoise_rng_);
  session_->Start(*env_);
}

void LiveSimulation::ApplyPendingControl() {
  std::optional<ControlMode> mode;
  bool reset = false;
  {
    std::lock_guard<std::mutex> lock(control_mu_);
    mode = pending_mode_;
    pending_mode_.reset();
    reset = reset_requested_;
    if (reset && pending_reset_) base_seed_ = *pending_reset_;
    reset_requested_ = false;
    pending_reset_.reset();
  }
  if (mode) {
    {
      std::lock_guard<std::mutex> lock(control_mu_);
      options_.controller.mode = *mode;
    }
    session_ = std::make_unique<ControllerSession>(policy_, options_.controller, *denoise_rng_);
    session_->Start(*env_);
  }
  if (reset) {
    episode_ = -1;
    StartEpisode();
  }
}

std::vector<std::string> LiveSimulation::Tick() {
  ApplyPendingControl();
  std::vector<std::string> out;
  const ControlDecision d = session_->Act(*env_);
  env_->Step(d.action);
  std::vector<double> w(state_dim_, 0.0);
  const std::vector<std::vector<double>> pending = queue_.Drain();
  if (!pending.empty()) {
    // last perturbation wins at the step boundary
    w = pending.back();
    env_->Perturb(w);
  }
  session_->Observe(*env_);

  FrameMessage f;
  f.t = env_->t();
  f.episode = episode_;
  f.state = env_->Observe();
  f.action = d.action;
  f.phase = PhaseName(d.phase);
  f.t2 = d.t2;
  f.mode = ControlModeName(options_.controller.mode);
  f.disturbance = w;
  out.push_back(FormatFrame(f));

  const int horizon =
      options_.controller.max_steps > 0 ? options_.controller.max_steps : env_->eval_steps();
  const bool done = (env_->ends_on_success() && env_->Success()) || env_->OutOfWorkspace() ||
                    env_->t() >= horizon;
  if (done) {
    const nlohmann::json metrics = {{"success", env_->Success()},
                                    {"score", env_->Score()},
                                    {"steps", env_->t()},
                                    {"mode", ControlModeName(options_.controller.mode)}};
    out.push_back(FormatEpisodeEnd(episode_, metrics));
    StartEpisode();
  }
  return out;
}

std::optional<std::string> LiveSimulation::HandleMessage(const std::string& text) {
  const ClientMessage m = ParseClientMessage(text);
  switch (m.type) {
    case ClientMessageType::kMalformed:
      spdlog::warn("dropping malformed message: {}", m.error);
      return FormatError(m.error);
    case ClientMessageType::kUnknown:
      spdlog::info("dropping message of unknown type '{}'", m.type_name);
      return std::nullopt;
    case ClientMessageType::kPerturb:
      if (static_cast<int>(m.vector.size()) != state_dim_) {
        const std::string why = "perturbation must have " + std::to_string(state_dim_) +
                                " entries, got " + std::to_string(m.vector.size());
        spdlog::warn("{}", why);
        return FormatError(why);
      }
      try {
        queue_.Push(m.vector);
      } catch (const DisturbanceError& e) {
        spdlog::warn("rejected perturbation: {}", e.what());
        return FormatError(e.what());
      }
      return std::nullopt;
    case ClientMessageType::kSetMode:
      try {
        const ControlMode mode = ParseControlMode(m.mode);
        std::lock_guard<std::mutex> lock(control_mu_);
        pending_mode_ = mode;
      } catch (const InferenceError& e) {
        spdlog::warn("{}", e.what());
        return FormatError(e.what());
      }
      return std::nullopt;
    case ClientMessageType::kReset: {
      std::lock_guard<std::mutex> lock(control_mu_);
      reset_requested_ = true;
      pending_reset_ = m.seed;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

HelloMessage LiveSimulation::Hello() const {
  std::lock_guard<std::mutex> lock(control_mu_);
  HelloMessage h;
  h.env = options_.env;
  h.mode = ControlModeName(options_.controller.mode);
  h.action_horizon = options_.controller.action_horizon;
  h.w_bar = options_.w_bar;
  h.rate_hz = options_.rate_hz;
  return h;
}

namespace {

constexpr std::size_t kMaxQueuedFrames = 1024;

class ClientSession;

// I/O-thread-only registry of connected clients
class Broadcaster {
 public:
  virtual ~Broadcaster() = default;
  virtual void Join(const std::shared_ptr<ClientSession>& s) = 0;
  virtual void Leave(ClientSession* s) = 0;
  virtual std::optional<std::string> OnMessage(const std::string& text) = 0;
  virtual std::string HelloText() = 0;
};

class ClientSession : public std::enable_shared_from_this<ClientSession> {
 public:
  ClientSession(tcp::socket socket, Broadcaster& hub) : ws_(std::move(socket)), hub_(hub) {}

  void Run() {
    ws_.text(true);
    ws_.async_accept(
        beast::bind_front_handler(&ClientSession::OnAccept, shared_from_this()));
  }

  void Send(const std::shared_ptr<const std::string>& message) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueuedFrames) {
      spdlog::warn("client too slow; dropping a frame");
      return;
    }
    queue_.push_back(message);
    if (queue_.size() > 1) return;
    DoWrite();
  }

  void Close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
  }

 private:
  void OnAccept(beast::error_code ec) {
    if (ec) {
      spdlog::warn("websocket handshake failed: {}", ec.message());
      return;
    }
    hub_.Join(shared_from_this());
    Send(std::make_shared<const std::string>(hub_.HelloText()));
    DoRead();
  }

  void DoRead() {
    ws_.async_read(buffer_,
                   beast::bind_front_handler(&ClientSession::OnRead, shared_from_this()));
  }

  void OnRead(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      hub_.Leave(this);
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (auto reply = hub_.OnMessage(text)) Send(std::make_shared<const std::string>(*reply));
    DoRead();
  }

  void DoWrite() {
    ws_.async_write(net::buffer(*queue_.front()),
                    beast::bind_front_handler(&ClientSession::OnWrite, shared_from_this()));
  }

  void OnWrite(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      hub_.Leave(this);
      return;
    }
    queue_.pop_front();
    if (!queue_.empty() && !closed_) DoWrite();
  }

  websocket::stream<tcp::socket> ws_;
  Broadcaster& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool closed_ = false;
};

}  // namespace

struct ServeEndpoint::Impl : public Broadcaster {
  Impl(const DualTimePolicy& policy, const ServeOptions& options)
      : options(options), sim(policy, options), acceptor(ioc) {}

  void Join(const std::shared_ptr<ClientSession>& s) override {
    sessions.insert(s);
    clients.store(sessions.size());
  }

  void Leave(ClientSession* s) override {
    for (auto it = sessions.begin(); it != sessions.end(); ++it) {
      if (it->get() == s) {
        sessions.erase(it);
        break;
      }
    }
    clients.store(sessions.size());
  }

  std::optional<std::string> OnMessage(const std::string& text) override {
    return sim.HandleMessage(text);
  }

  std::string HelloText() override { return FormatHello(sim.Hello()); }

  void DoAccept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket s) {
      if (ec) {
        if (!stopping.load()) spdlog::warn("accept failed: {}", ec.message());
        return;
      }
      std::make_shared<ClientSession>(std::move(s), *this)->Run();
      DoAccept();
    });
  }

  void Broadcast(std::vector<std::string> messages) {
    net::post(ioc, [this, messages = std::move(messages)]() {
      for (const std::string& m : messages) {
        auto shared = std::make_shared<const std::string>(m);
        for (const auto& s : sessions) s->Send(shared);
      }
    });
  }

  void SimulationLoop() {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / options.rate_hz));
    auto next = std::chrono::steady_clock::now();
    while (!stopping.load()) {
      try {
        Broadcast(sim.Tick());
      } catch (const std::exception& e) {
        spdlog::error("simulation step failed: {}", e.what());
      }
      next += period;
      std::unique_lock<std::mutex> lock(stop_mu);
      stop_cv.wait_until(lock, next, [this] { return stopping.load(); });
    }
  }

  void RequestStop() {
    {
      std::lock_guard<std::mutex> lock(stop_mu);
      stopping.store(true);
    }
    stop_cv.notify_all();
    net::post(ioc, [this]() {
      beast::error_code ec;
      acceptor.close(ec);
      for (const auto& s : sessions) s->Close();
      sessions.clear();
      clients.store(0);
      if (signals) signals->cancel();
      ioc.stop();
    });
  }

  ServeOptions options;
  LiveSimulation sim;
  net::io_context ioc{1};
  tcp::acceptor acceptor;
  std::unique_ptr<net::signal_set> signals;
  std::set<std::shared_ptr<ClientSession>> sessions;
  std::atomic<std::size_t> clients{0};
  std::atomic<bool> stopping{false};
  std::mutex stop_mu;
  std::condition_variable stop_cv;
  std::thread io_thread;
  std::thread sim_thread;
  std::mutex done_mu;
  std::condition_variable done_cv;
  bool done = false;
};

ServeEndpoint::ServeEndpoint(const DualTimePolicy& policy, const ServeOptions& options)
    : impl_(std::make_unique<Impl>(policy, options)) {
  if (!(options.rate_hz > 0.0)) throw std::invalid_argument("rate must be positive");
}

ServeEndpoint::~ServeEndpoint() { Stop(); }

void ServeEndpoint::Start() {
  Impl& s = *impl_;
  const tcp::endpoint endpoint(net::ip::make_address(s.options.host), s.options.port);
  beast::error_code ec;
  s.acceptor.open(endpoint.protocol(), ec);
  if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor.bind(endpoint, ec);
  if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw std::runtime_error("cannot listen on " + s.options.host + ":" +
                             std::to_string(s.options.port) + ": " + ec.message());
  }
  bound_port_ = s.acceptor.local_endpoint().port();
  if (s.options.handle_signals) {
    s.signals = std::make_unique<net::signal_set>(s.ioc, SIGINT, SIGTERM);
    s.signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) impl_->RequestStop();
    });
  }
  s.DoAccept();
  s.io_thread = std::thread([&s]() {
    s.ioc.run();
    std::lock_guard<std::mutex> lock(s.done_mu);
    s.done = true;
    s.done_cv.notify_all();
  });
  s.sim_thread = std::thread([&s]() { s.SimulationLoop(); });
  spdlog::info("serving {} on ws://{}:{}", s.options.env, s.options.host, bound_port_);
}

void ServeEndpoint::Wait() {
  Impl& s = *impl_;
  std::unique_lock<std::mutex> lock(s.done_mu);
  s.done_cv.wait(lock, [&s] { return s.done; });
}

void ServeEndpoint::Stop() {
  if (!impl_) return;
  Impl& s = *impl_;
  if (!s.io_thread.joinable() && !s.sim_thread.joinable()) return;
  s.RequestStop();
  if (s.sim_thread.joinable()) s.sim_thread.join();
  if (s.io_thread.joinable()) s.io_thread.join();
}

std::size_t ServeEndpoint::client_count() const { return impl_->clients.load(); }

}  // namespace tdp
