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

#include "tdp/envs/disturbance.h"

#include <cmath>
#include <sstream>

namespace tdp {
namespace {

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<double> ParseVector(const std::string& s) {
  std::vector<double> v;
  for (const auto& part : Split(s, ',')) {
    try {
      v.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw DisturbanceError("bad number '" + part + "' in disturbance spec");
    }
  }
  if (v.empty()) throw DisturbanceError("empty disturbance vector");
  return v;
}

int ParseStep(const std::string& s) {
  try {
    const int k = std::stoi(s);
    if (k < 0) throw DisturbanceError("negative disturbance step");
    return k;
  } catch (const std::invalid_argument&) {
    throw DisturbanceError("bad step '" + s + "' in disturbance spec");
  }
}

}  // namespace

double EuclideanNorm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void DisturbanceScript::Validate() const {
  if (!bound) return;
  for (const auto& e : entries) {
    const double n = EuclideanNorm(e.vector);
    if (n > *bound) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "perturbation at step " << e.step << " has norm " << n
          << " above the declared bound " << *bound;
      throw DisturbanceError(msg.str());
    }
  }
}

std::vector<double> DisturbanceScript::At(int step, int dim) const {
  std::vector<double> w(dim, 0.0);
  for (const auto& e : entries) {
    if (e.step != step) continue;
    if (static_cast<int>(e.vector.size()) != dim) {
      throw DisturbanceError("perturbation dimension " + std::to_string(e.vector.size()) +
                             " does not match state dimension " + std::to_string(dim));
    }
    for (int i = 0; i < dim; ++i) w[i] += e.vector[i];
  }
  return w;
}

std::vector<double> ApplyDisturbance(std::vector<double> state,
                                     const DisturbanceScript& script, int step) {
  script.Validate();
  const std::vector<double> w = script.At(step, static_cast<int>(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) state[i] += w[i];
  return state;
}

LivePerturbationQueue::LivePerturbationQueue(std::optional<double> bound,
                                             std::size_t capacity)
    : bound_(bound), capacity_(capacity) {}

void LivePerturbationQueue::Push(std::vector<double> w) {
  for (double x : w) {
    if (!std::isfinite(x)) throw DisturbanceError("non-finite live perturbation");
  }
  if (bound_ && EuclideanNorm(w) > *bound_) {
    throw DisturbanceError("live perturbation exceeds the declared bound");
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (items_.size() >= capacity_) items_.pop_front();
  items_.push_back(std::move(w));
}

std::vector<std::vector<double>> LivePerturbationQueue::Drain() {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::vector<double>> out(items_.begin(), items_.end());
  items_.clear();
  return out;
}

DisturbanceGenerator DisturbanceGenerator::Parse(const std::string& spec) {
  DisturbanceGenerator g;
  g.spec_ = spec.empty() ? "none" : spec;
  const auto parts = Split(g.spec_, ':');
  g.kind_ = parts.at(0);
  if (g.kind_ == "none") {
    if (parts.size() != 1) throw DisturbanceError("'none' takes no arguments");
  } else if (g.kind_ == "midpoint") {
    if (parts.size() != 2) throw DisturbanceError("expected midpoint:v1[,v2...]");
    g.vector_ = ParseVector(parts[1]);
  } else if (g.kind_ == "step") {
    if (parts.size() != 3) throw DisturbanceError("expected step:K:v1[,v2...]");
    g.step_ = ParseStep(parts[1]);
    g.vector_ = ParseVector(parts[2]);
  } else if (g.kind_ == "block-shift") {
    if (parts.size() != 3) throw DisturbanceError("expected block-shift:K:M");
    g.step_ = ParseStep(parts[1]);
    g.magnitude_ = ParseVector(parts[2]).at(0);
  } else {
    throw DisturbanceError("unknown disturbance kind '" + g.kind_ + "'");
  }
  return g;
}

DisturbanceScript DisturbanceGenerator::Make(const Environment& env, int horizon,
                                             Rng& rng) const {
  DisturbanceScript script;
  if (kind_ == "none") return script;
  if (kind_ == "midpoint" || kind_ == "step") {
    if (static_cast<int>(vector_.size()) != env.state_dim()) {
      throw DisturbanceError("disturbance vector has " + std::to_string(vector_.size()) +
                             " entries but " + env.id() + " state has " +
                             std::to_string(env.state_dim()));
    }
    const int step = kind_ == "midpoint" ? horizon / 2 : step_;
    script.entries.push_back({step, vector_});
    return script;
  }
  // block-shift
  if (env.id() != "planar-push") {
    throw DisturbanceError("block-shift applies to planar-push only");
  }
  const double sign = rng.Uniform01() < 0.5 ? -1.0 : 1.0;
  script.entries.push_back({step_, {0.0, 0.0, 0.0, sign * magnitude_, 0.0}});
  return script;
}

double DisturbanceGenerator::MaxNorm() const {
  if (kind_ == "block-shift") return std::abs(magnitude_);
  return EuclideanNorm(vector_);
}

}  // namespace tdp
