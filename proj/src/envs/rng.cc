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

#include "tdp/envs/rng.h"

#include <sstream>
#include <stdexcept>

namespace tdp {

std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t master, RngStream stream) {
  return DeriveSeed(master, static_cast<std::uint64_t>(stream));
}

double Rng::Uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(engine_);
}

double Rng::Normal() { return normal_(engine_); }

std::int64_t Rng::UniformInt(std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<std::int64_t> d(lo, hi);
  return d(engine_);
}

std::string Rng::SaveState() const {
  std::ostringstream out;
  out << engine_ << '|' << normal_;
  return out.str();
}

void Rng::LoadState(const std::string& state) {
  const std::size_t bar = state.find('|');
  if (bar == std::string::npos) throw std::invalid_argument("malformed rng state");
  std::istringstream engine_in(state.substr(0, bar));
  std::istringstream normal_in(state.substr(bar + 1));
  engine_in >> engine_;
  normal_in >> normal_;
  if (engine_in.fail() || normal_in.fail()) throw std::invalid_argument("malformed rng state");
}

}  // namespace tdp
