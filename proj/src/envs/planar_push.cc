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

#include "tdp/envs/planar_push.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tdp {
namespace {

using Vec2 = std::array<double, 2>;

Vec2 Rotate(double angle, const Vec2& v) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

double Norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

// contact resolution iterations per step
constexpr int kResolveIterations = 20;

}  // namespace

double WrapAngle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

PlanarPush::PlanarPush(PlanarPushConfig config) : config_(config) {}

void PlanarPush::Reset(Rng& rng) {
  const double a = config_.block_half, r = config_.pusher_radius;
  while (true) {
    block_ = {rng.Uniform(-0.5, -0.4), rng.Uniform(-0.08, 0.08), rng.Uniform(-0.3, 0.3)};
    const Vec2 q = {rng.Uniform(-a - r - 0.15, -a - r - 0.005), rng.Uniform(-0.12, 0.12)};
    const Vec2 w = Rotate(block_[2], q);
    pusher_ = {block_[0] + w[0], block_[1] + w[1]};
    if (Query().distance > r + 1e-6) break;
  }
  t_ = 0;
}

std::vector<double> PlanarPush::Observe() const {
  return {pusher_[0], pusher_[1], block_[0], block_[1], block_[2]};
}

void PlanarPush::SetState(const std::vector<double>& state) {
  if (state.size() != 5) throw EnvError("planar push state has 5 entries");
  for (double v : state) {
    if (!std::isfinite(v)) throw EnvError("planar push state must be finite");
  }
  pusher_ = {state[0], state[1]};
  block_ = {state[2], state[3], WrapAngle(state[4])};
}

void PlanarPush::Perturb(const std::vector<double>& w) {
  if (w.size() != 5) throw EnvError("planar push perturbation has 5 entries");
  pusher_[0] += w[0];
  pusher_[1] += w[1];
  block_[0] += w[2];
  block_[1] += w[3];
  block_[2] = WrapAngle(block_[2] + w[4]);
  Resolve();
}

ContactQuery PlanarPush::Query() const {
  const double a = config_.block_half;
  const Vec2 rel = {pusher_[0] - block_[0], pusher_[1] - block_[1]};
  const Vec2 q = Rotate(-block_[2], rel);
  ContactQuery out;
  if (std::abs(q[0]) < a && std::abs(q[1]) < a) {
    // pusher center inside the block: exit through the nearest face
    const double exits[4] = {a - q[0], a + q[0], a - q[1], a + q[1]};
    const int k = static_cast<int>(std::min_element(exits, exits + 4) - exits);
    static const Vec2 normals[4] = {{-1.0, 0.0}, {1.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}};
    out.distance = -exits[k];
    out.normal = normals[k];
    out.point = q;
    if (k == 0) out.point[0] = a;
    if (k == 1) out.point[0] = -a;
    if (k == 2) out.point[1] = a;
    if (k == 3) out.point[1] = -a;
    return out;
  }
  const Vec2 cp = {std::clamp(q[0], -a, a), std::clamp(q[1], -a, a)};
  const Vec2 diff = {cp[0] - q[0], cp[1] - q[1]};
  out.distance = Norm(diff);
  out.normal = {diff[0] / out.distance, diff[1] / out.distance};
  out.point = cp;
  return out;
}

void PlanarPush::Resolve() {
  const double rho = config_.block_half * std::sqrt(2.0 / 3.0);
  for (int i = 0; i < kResolveIterations; ++i) {
    const ContactQuery c = Query();
    const double pen = config_.pusher_radius - c.distance;
    if (pen <= 1e-12) return;
    // normal push split between translation and rotation by the
    // ellipsoidal limit surface of a uniform square
    const double m = c.point[0] * c.normal[1] - c.point[1] * c.normal[0];
    const double sc = pen / (1.0 + m * m / (rho * rho));
    const Vec2 dw = Rotate(block_[2], {sc * c.normal[0], sc * c.normal[1]});
    block_[0] += dw[0];
    block_[1] += dw[1];
    block_[2] = WrapAngle(block_[2] + sc * m / (rho * rho));
  }
}

void PlanarPush::Advance(const std::vector<double>& action) {
  Vec2 d = {action[0] - pusher_[0], action[1] - pusher_[1]};
  const double n = Norm(d);
  const double step = config_.max_speed * config_.dt;
  if (n > step) d = {d[0] * step / n, d[1] * step / n};
  pusher_ = {pusher_[0] + d[0], pusher_[1] + d[1]};
  Resolve();
}

bool PlanarPush::Success() const {
  return std::hypot(block_[0], block_[1]) < config_.pos_tol &&
         std::abs(WrapAngle(block_[2])) < config_.rot_tol;
}

double PlanarPush::Score() const {
  if (Success()) return 1.0;
  const double dp = std::hypot(block_[0], block_[1]);
  const double dr = std::abs(WrapAngle(block_[2]));
  const double sp = dp < config_.pos_tol ? 1.0 : config_.pos_tol / dp;
  const double sr = dr < config_.rot_tol ? 1.0 : config_.rot_tol / dr;
  return std::min(sp * sr, 1.0 - 1e-12);
}

bool PlanarPush::OutOfWorkspace() const {
  const double w = config_.workspace;
  return std::abs(pusher_[0]) > w || std::abs(pusher_[1]) > w ||
         std::abs(block_[0]) > w || std::abs(block_[1]) > w;
}

std::vector<double> PlanarPush::ExpertAction() const {
  const double a = config_.block_half, r = config_.pusher_radius;
  const double bx = block_[0], by = block_[1], th = block_[2];
  // heading that steers the block back onto the goal line, faded out on
  // the final approach
  const double th_des = std::clamp(-config_.expert_cross_gain * by, -0.4, 0.4) *
                        std::clamp(-bx / config_.expert_heading_window, 0.0, 1.0);
  // off-center contact turns the block toward the desired heading
  const double slat = std::clamp(config_.expert_heading_gain * WrapAngle(th - th_des),
                                 -0.7 * a, 0.7 * a);
  const Vec2 q = Rotate(-th, {pusher_[0] - bx, pusher_[1] - by});
  const double aligned = std::clamp(1.0 - std::abs(q[1] - slat) / 0.015, 0.0, 1.0);
  const double lead = 0.02 * aligned * std::clamp(-bx / 0.03, 0.0, 1.0);
  Vec2 target = {-a - r + lead, slat};
  if (q[0] > -a - 0.5 * r) {
    // beside or past the rear face: back off before re-approaching
    target = {-a - r - 0.03, q[1]};
  }
  const Vec2 tw = Rotate(th, target);
  Vec2 d = {bx + tw[0] - pusher_[0], by + tw[1] - pusher_[1]};
  const double n = Norm(d);
  if (n > 0.02) d = {d[0] * 0.02 / n, d[1] * 0.02 / n};
  return ClampAction({pusher_[0] + d[0], pusher_[1] + d[1]});
}

std::vector<double> PlanarPush::ClampAction(const std::vector<double>& a) const {
  const double w = config_.workspace;
  return {std::clamp(a.at(0), -w, w), std::clamp(a.at(1), -w, w)};
}

bool PlanarPush::InActionBox(const std::vector<double>& a) const {
  const double w = config_.workspace + 1e-12;
  return std::abs(a.at(0)) <= w && std::abs(a.at(1)) <= w;
}

std::unique_ptr<Environment> PlanarPush::Clone() const {
  return std::make_unique<PlanarPush>(*this);
}

}  // namespace tdp
