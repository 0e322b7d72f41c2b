// Copyright 2026 The contactdiff Authors
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

#include "contactdiff/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace contactdiff {

namespace {

constexpr double kPi = M_PI;
constexpr double kDoorHingeMax = 2.0 * kPi / 3.0;
constexpr double kNailMax = 0.09;

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

void check_finite(const EnvSpec& spec, const EnvState& state,
                  std::span<const double> action) {
  for (double v : state) {
    if (!std::isfinite(v)) throw Error(spec.id + ": non-finite state");
  }
  for (double v : action) {
    if (!std::isfinite(v)) throw Error(spec.id + ": non-finite action");
  }
}

}  // namespace

double wrap_angle(double x) {
  double y = std::remainder(x, 2.0 * kPi);
  if (y <= -kPi) y += 2.0 * kPi;
  return y;
}

EnvSpec make_env_spec(const std::string& id) {
  EnvSpec s;
  s.id = id;
  if (id == "door1d") {
    s.kind = EnvKind::kDoor1d;
    s.obs_dim = 5;
    s.act_dim = 2;
    s.hand_indices = {0, 1};
    s.object_indices = {2, 3, 4};
    s.hand_pos_indices = {0};
    s.contact_pos_indices = {4};
    s.action_bounds = {0.05, 0.1};
    s.goal_indices = {3};
    s.training_goal = kPi / 2.0;
  } else if (id == "hammer1d") {
    s.kind = EnvKind::kHammer1d;
    s.obs_dim = 3;
    s.act_dim = 1;
    s.hand_indices = {0};
    s.object_indices = {1, 2};
    s.hand_pos_indices = {0};
    s.contact_pos_indices = {1};
    s.action_bounds = {0.05};
    s.goal_indices = {2};
    s.training_goal = kNailMax;
    s.terminate_on_success = false;
    s.object_delta_cap = 0.03;  // the true strike quantum is <= 0.025
  } else if (id == "disk") {
    s.kind = EnvKind::kDisk;
    s.obs_dim = 4;
    s.act_dim = 3;
    s.hand_indices = {0, 1, 2};
    s.object_indices = {3};
    // In-hand task: the contact extractor reports zero distance so phase
    // selection always lands post-contact.
    s.hand_pos_indices = {0};
    s.contact_pos_indices = {0};
    s.action_bounds = {0.1, 0.1, 0.1};
    s.goal_indices = {3};
    s.goal_wraps = true;
    s.goal_sampled = true;
    s.goal_range_lo = 0.25;
    s.goal_range_hi = kPi - 0.25;
  } else {
    throw ConfigError("unknown env id: \"" + id +
                      "\" (expected door1d | hammer1d | disk)");
  }
  return s;
}

EnvState env_reset(const EnvSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case EnvKind::kDoor1d:
      return {rng.uniform(-0.25, 0.25), 0.0, 0.0, 0.0, 1.0};
    case EnvKind::kHammer1d:
      return {rng.uniform(-0.1, 0.1), 0.5, 0.0};
    case EnvKind::kDisk:
      return {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
              rng.uniform(-0.05, 0.05), rng.uniform(-0.2, 0.2)};
  }
  throw ConfigError("env_reset: bad kind");
}

EnvState env_step(const EnvSpec& spec, const EnvState& state,
                  std::span<const double> action) {
  check_finite(spec, state, action);
  if (int(state.size()) != spec.obs_dim || int(action.size()) != spec.act_dim) {
    throw ShapeError(spec.id + ": state/action dims");
  }
  std::vector<double> a(action.begin(), action.end());
  for (int k = 0; k < spec.act_dim; ++k) {
    a[k] = clamp(a[k], -spec.action_bounds[k], spec.action_bounds[k]);
  }

  switch (spec.kind) {
    case EnvKind::kDoor1d: {
      const double p = state[0], grip = state[1], latch = state[2],
                   hinge = state[3], handle = state[4];
      const bool contact = std::fabs(p - handle) < spec.contact_threshold;
      EnvState next(5);
      next[0] = clamp(p + a[0], -2.0, 2.0);
      next[1] = clamp(grip + a[1], 0.0, 1.5);
      next[2] = latch;
      next[3] = hinge;
      if (contact) {
        next[2] = clamp(latch + a[1], 0.0, kPi / 2.0);
        if (latch >= kPi / 4.0) {
          next[3] = clamp(hinge - a[0] / 0.5, 0.0, kDoorHingeMax);
        }
      }
      next[4] = 1.0 - 0.5 * next[3];
      return next;
    }
    case EnvKind::kHammer1d: {
      const double p = state[0], ph = state[1], d = state[2];
      const bool grasp = std::fabs(p - ph) < spec.contact_threshold;
      EnvState next(3);
      next[0] = clamp(p + a[0], -2.0, 2.0);
      next[1] = ph;
      next[2] = d;
      if (grasp) {
        next[1] = clamp(ph + a[0], -2.0, 2.0);
        if (ph < 1.0 && next[1] >= 1.0 && a[0] > 0.0) {
          next[2] = clamp(d + 0.5 * a[0], 0.0, kNailMax);
        }
      }
      return next;
    }
    case EnvKind::kDisk: {
      EnvState next(4);
      double sum = 0.0, activity = 0.0;
      for (int k = 0; k < 3; ++k) {
        next[k] = clamp(state[k] + a[k], -4.0, 4.0);
        sum += a[k];
        activity += std::fabs(a[k]);
      }
      next[3] = state[3];
      if (activity / 3.0 > spec.activity_floor) {
        next[3] = wrap_angle(state[3] + sum / 3.0);
      }
      return next;
    }
  }
  throw ConfigError("env_step: bad kind");
}

bool env_success(const EnvSpec& spec, const std::vector<EnvState>& states,
                 std::span<const double> goal) {
  if (states.empty()) return false;
  const double g = goal[0];
  switch (spec.kind) {
    case EnvKind::kDoor1d: {
      if (states.size() < 5) return false;
      for (size_t i = states.size() - 5; i < states.size(); ++i) {
        if (std::fabs(states[i][3] - g) >= 0.1) return false;
      }
      return true;
    }
    case EnvKind::kHammer1d:
      return std::fabs(states.back()[2] - g) < 0.01;
    case EnvKind::kDisk: {
      if (states.size() < 5) return false;
      for (size_t i = states.size() - 5; i < states.size(); ++i) {
        if (std::fabs(wrap_angle(states[i][3] - g)) >= 0.15) return false;
      }
      return true;
    }
  }
  return false;
}

std::vector<double> expert_action(const EnvSpec& spec, const EnvState& state,
                                  std::span<const double> goal) {
  switch (spec.kind) {
    case EnvKind::kDoor1d: {
      const double p = state[0], latch = state[2], hinge = state[3],
                   handle = state[4];
      if (std::fabs(p - handle) >= spec.contact_threshold) {
        return {clamp(handle - p, -0.05, 0.05), 0.0};
      }
      if (latch < kPi / 4.0 + 0.05) {
        return {clamp(handle - p, -0.05, 0.05), 0.1};
      }
      const double err = goal[0] - hinge;
      return {clamp(-err / 2.0, -0.05, 0.05), 0.0};
    }
    case EnvKind::kHammer1d: {
      const double p = state[0], ph = state[1], d = state[2];
      if (std::fabs(p - ph) >= spec.contact_threshold) {
        return {clamp(ph - p, -0.05, 0.05)};
      }
      const double remaining = goal[0] - d;
      if (remaining <= 1e-9) {
        // Done driving: retreat past the nail and settle.
        if (ph > 0.9) return {-0.05};
        return {0.0};
      }
      if (ph >= 1.0) return {-0.05};  // retract for the next strike
      if (ph < 0.995 - 1e-12) return {clamp(0.995 - ph, -0.05, 0.05)};
      // Staged tight under the nail: a measured strike (the crossing adds
      // 0.5 * dp), so strike sizes in the data vary with remaining depth.
      return {
          std::min(0.05, (1.0 - ph) + clamp(2.0 * remaining, 0.01, 0.045))};
    }
    case EnvKind::kDisk: {
      const double d = wrap_angle(goal[0] - state[3]);
      const double step = clamp(d, -0.1, 0.1);
      return {step, step, step};
    }
  }
  throw ConfigError("expert_action: bad kind");
}

double sample_training_goal(const EnvSpec& spec, Rng& rng) {
  if (!spec.goal_sampled) return spec.training_goal;
  return rng.uniform(spec.goal_range_lo, spec.goal_range_hi);
}

double ghost_metric(const EnvSpec& spec, const Array2& predicted_states,
                    const Array2& predicted_actions,
                    std::span<const double> sigma) {
  if (predicted_states.cols != spec.obs_dim ||
      predicted_actions.cols != spec.act_dim ||
      predicted_states.rows != predicted_actions.rows) {
    throw ShapeError("ghost_metric: prediction shapes");
  }
  std::vector<int> dims;
  bool excluded = false;
  for (int d = 0; d < spec.obs_dim; ++d) {
    if (sigma[d] > 1e-9) {
      dims.push_back(d);
    } else {
      excluded = true;
    }
  }
  if (excluded) {
    std::fprintf(stderr,
                 "ghost_metric(%s): excluding zero-variance dimensions\n",
                 spec.id.c_str());
  }
  const int horizon = predicted_states.rows;
  EnvState sim(spec.obs_dim);
  for (int d = 0; d < spec.obs_dim; ++d) sim[d] = predicted_states(0, d);
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    if (t > 0) {
      std::vector<double> a(spec.act_dim);
      for (int k = 0; k < spec.act_dim; ++k) a[k] = predicted_actions(t - 1, k);
      sim = env_step(spec, sim, a);
    }
    double sq = 0.0;
    for (int d : dims) {
      const double e = (predicted_states(t, d) - sim[d]) / sigma[d];
      sq += e * e;
    }
    total += std::sqrt(sq);
  }
  return total / horizon;
}

}  // namespace contactdiff
