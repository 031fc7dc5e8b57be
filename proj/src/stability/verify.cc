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

#include "tdp/stability/verify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tdp/envs/rng.h"

namespace tdp {
namespace {

double Distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw StabilityError("dimension mismatch between rollout and reference");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double Sign(double x) { return x < 0.0 ? -1.0 : 1.0; }

// residual of magnitude <= bound: uniform, or full magnitude along |direction|
double Residual(double bound, double direction, bool adversarial, Rng& rng) {
  if (bound == 0.0) return 0.0;
  return adversarial ? bound * Sign(direction) : rng.Uniform(-bound, bound);
}

}  // namespace

StabilityConstants PointMassConstants(const PointMass& env, int action_horizon) {
  StabilityConstants k;
  k.lipschitz_x = env.lipschitz_x();
  k.lipschitz_u = env.lipschitz_u();
  k.action_horizon = action_horizon;
  return k;
}

StreamingReport VerifyStreaming(const RolloutRecord& rollout,
                                const DemonstrationEpisode& reference,
                                const StabilityConstants& constants) {
  constants.Validate(false);
  if (rollout.env != reference.env) {
    throw StabilityError("mismatched time bases: rollout on " + rollout.env +
                         ", reference on " + reference.env);
  }
  const std::size_t n = rollout.steps.size();
  if (reference.act.size() < n || reference.obs.size() < n + 1) {
    throw StabilityError("mismatched time bases: reference shorter than the rollout");
  }
  StreamingReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const RolloutStep& s = rollout.steps[i];
    if (s.t != static_cast<int>(i)) throw StabilityError("mismatched time bases: step index gap");
    const std::vector<double>& next_obs = i + 1 < n ? rollout.steps[i + 1].obs : rollout.final_obs;
    StreamingStepCheck c;
    c.t = s.t;
    c.error = Distance(s.obs, reference.obs[i]);
    c.next_error = Distance(next_obs, reference.obs[i + 1]);
    c.action_error = Distance(s.action, reference.act[i]);
    c.disturbance = EuclideanNorm(s.disturbance);
    c.bound = constants.lipschitz_x * c.error + constants.lipschitz_u * c.action_error +
              c.disturbance;
    c.margin = c.bound - c.next_error;
    c.ok = c.next_error <= c.bound + kBoundSlack;
    if (!c.ok && report.violations++ == 0) report.first_violation = c.t;
    report.measured_eps_a = std::max(report.measured_eps_a, c.action_error);
    report.max_error = std::max({report.max_error, c.error, c.next_error});
    report.steps.push_back(c);
  }
  report.pass = report.violations == 0;
  return report;
}

CycleReport VerifyCycles(const PointMass& env, const StabilityConstants& constants,
                         const OracleCorrectorOptions& options) {
  constants.Validate(true);
  if (options.cycles < 1) throw StabilityError("need at least one cycle");
  CycleReport report;
  report.alpha = constants.alpha();
  report.beta = constants.beta();
  report.limit = report.beta / (1.0 - report.alpha);
  const double c = constants.c();

  std::unique_ptr<Environment> ref = env.Clone();
  std::unique_ptr<Environment> act = env.Clone();
  const double x0 = env.config().start;
  ref->SetState({x0});
  act->SetState({x0 + options.initial_error});
  Rng rng(options.seed);

  auto error = [&]() { return act->Observe()[0] - ref->Observe()[0]; };
  for (int k = 0; k < options.cycles; ++k) {
    CycleCheck check;
    check.k = k;
    check.z = std::abs(error());
    check.within_margin = std::numeric_limits<double>::infinity();
    check.max_within = check.z;
    for (int j = 1; j < constants.action_horizon; ++j) {
      const double e = error();
      const std::vector<double> u_ref = ref->ExpertAction();
      const double delta = Residual(constants.eps_a, e, options.adversarial, rng);
      const double w = Residual(constants.w_bar, e, options.adversarial, rng);
      ref->Step(u_ref);
      act->Step(act->ClampAction({u_ref[0] + delta}));
      if (w != 0.0) act->Perturb({w});
      const double ej = std::abs(error());
      const double bound = StreamingBound(check.z, j, constants.lipschitz_x, c);
      check.max_within = std::max(check.max_within, ej);
      check.within_margin = std::min(check.within_margin, bound - ej);
    }
    // correction step: both copies advance on the reference action, then the
    // oracle contracts the error
    if (constants.action_horizon == 1) check.within_margin = 0.0;
    const double e_pre = error();
    ref->Step(ref->ExpertAction());
    const double r = Residual(constants.eps_d, e_pre, options.adversarial, rng);
    act->SetState({ref->Observe()[0] + constants.lambda_corr * e_pre + r});
    act->set_t(ref->t());
    check.z_next = std::abs(error());
    check.z_bound = report.alpha * check.z + report.beta;
    check.ok = check.z_next <= check.z_bound + kBoundSlack &&
               check.within_margin >= -kBoundSlack;
    if (!check.ok) ++report.violations;
    report.cycles.push_back(check);
  }
  for (std::size_t k = report.cycles.size() / 2; k < report.cycles.size(); ++k) {
    report.tail_max = std::max(report.tail_max, report.cycles[k].z_next);
  }
  report.final_error = report.cycles.back().z_next;
  report.pass = report.violations == 0 && report.tail_max <= report.limit + kBoundSlack;
  return report;
}

nlohmann::json StreamingReportToJson(const StreamingReport& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StreamingStepCheck& c : r.steps) {
    steps.push_back({{"t", c.t},
                     {"error", c.error},
                     {"next_error", c.next_error},
                     {"action_error", c.action_error},
                     {"disturbance", c.disturbance},
                     {"bound", c.bound},
                     {"margin", c.margin},
                     {"ok", c.ok}});
  }
  return {{"steps", steps},
          {"violations", r.violations},
          {"measured_eps_a", r.measured_eps_a},
          {"max_error", r.max_error},
          {"first_violation", r.first_violation ? nlohmann::json(*r.first_violation)
                                                : nlohmann::json(nullptr)},
          {"pass", r.pass}};
}

nlohmann::json CycleReportToJson(const CycleReport& r) {
  nlohmann::json cycles = nlohmann::json::array();
  for (const CycleCheck& c : r.cycles) {
    cycles.push_back({{"k", c.k},
                      {"z", c.z},
                      {"z_next", c.z_next},
                      {"z_bound", c.z_bound},
                      {"max_within", c.max_within},
                      {"within_margin", c.within_margin},
                      {"ok", c.ok}});
  }
  return {{"cycles", cycles},         {"alpha", r.alpha},
          {"beta", r.beta},           {"limit", r.limit},
          {"tail_max", r.tail_max},   {"final_error", r.final_error},
          {"violations", r.violations}, {"pass", r.pass}};
}

std::string StreamingReportText(const StreamingReport& r) {
  std::ostringstream out;
  out << "streaming recursion: " << r.steps.size() << " steps, " << r.violations
      << " violations, measured eps_a " << r.measured_eps_a << ", max error " << r.max_error
      << (r.pass ? "  PASS" : "  FAIL") << '\n';
  if (r.first_violation) out << "first violating step: t = " << *r.first_violation << '\n';
  return out.str();
}

std::string CycleReportText(const CycleReport& r) {
  std::ostringstream out;
  out << "cycle contraction: " << r.cycles.size() << " cycles, alpha " << r.alpha << ", beta "
      << r.beta << ", limit " << r.limit << ", tail max " << r.tail_max << ", final error "
      << r.final_error << ", " << r.violations << " violations"
      << (r.pass ? "  PASS" : "  FAIL") << '\n';
  return out.str();
}

}  // namespace tdp
