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

#ifndef CONTACTDIFF_ENVS_HPP_
#define CONTACTDIFF_ENVS_HPP_

#include <span>
#include <string>
#include <vector>

#include "contactdiff/array.hpp"
#include "contactdiff/rng.hpp"

namespace contactdiff {

enum class EnvKind { kDoor1d, kHammer1d, kDisk };

// Static description of a toy contact environment: which observation dims
// the hand controls directly, which belong to the object (only movable
// through contact), and where the contact geometry lives in the observation.
//
// door1d:   state [p, grip, latch, hinge, handle_x], action [dp, dgrip].
//           Contact iff |p - handle_x| < delta_c. Grip opens the latch while
//           in contact; once latch >= pi/4 the hinge couples to the hand,
//           hinge' = hinge - dp / 0.5, and the handle tracks the hand
//           exactly (handle_x = 1 - 0.5 * hinge).
// hammer1d: state [p_hand, p_hammer, d_nail], action [dp]. Grasp iff
//           |p_hand - p_hammer| < delta_c; a grasped hammer crossing the
//           nail at x = 1 moving +x drives the nail by 0.5 * dp,
//           d_nail clamped to [0, 0.09].
// disk:     state [f1, f2, f3, theta], action [df1, df2, df3]. The disk
//           rotates by mean(df) only when mean(|df|) > delta3; theta wraps
//           to (-pi, pi].
struct EnvSpec {
  EnvKind kind;
  std::string id;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> hand_indices;
  std::vector<int> object_indices;
  // Parallel index lists defining the contact extractor.
  std::vector<int> hand_pos_indices;
  std::vector<int> contact_pos_indices;
  std::vector<double> action_bounds;  // |a_k| <= action_bounds[k]
  std::vector<int> goal_indices;      // object dims targeted by goals
  bool goal_wraps = false;
  double contact_threshold = 0.1;  // delta_c (also the default delta1)
  double object_delta_cap = 0.15;  // delta2
  double activity_floor = 0.01;    // delta3
  // Whether reaching success ends an episode early. Hold-style predicates
  // (door, disk) stay satisfied once reached; the hammer's final-depth
  // predicate is only meaningful at episode end (a full drive passes
  // through every intermediate depth).
  bool terminate_on_success = true;
  // Fixed training goal, or a sampling range when sampled per episode.
  bool goal_sampled = false;
  double training_goal = 0.0;
  double goal_range_lo = 0.0;
  double goal_range_hi = 0.0;
};

using EnvState = std::vector<double>;

// Known ids: "door1d" | "hammer1d" | "disk". Throws ConfigError otherwise.
EnvSpec make_env_spec(const std::string& id);

EnvState env_reset(const EnvSpec& spec, Rng& rng);

// Pure, deterministic transition. Actions are clipped to bounds; object
// dims change only under the env's contact rule. Throws on non-finite
// input.
EnvState env_step(const EnvSpec& spec, const EnvState& state,
                  std::span<const double> action);

// door1d: |hinge - goal| < 0.1 over the final 5 steps (door held).
// hammer1d: |d_final - goal| < 0.01. disk: |wrap(theta - goal)| < 0.15
// over the final 5 steps.
bool env_success(const EnvSpec& spec, const std::vector<EnvState>& states,
                 std::span<const double> goal);

// Proportional scripted controller; drives env_success within 200 steps
// from any reset state.
std::vector<double> expert_action(const EnvSpec& spec, const EnvState& state,
                                  std::span<const double> goal);

double sample_training_goal(const EnvSpec& spec, Rng& rng);

// Replays predicted_actions from predicted_states[0] through env_step and
// returns the mean over t of || (predicted - simulated) / sigma ||_2.
// Dimensions with sigma ~ 0 are excluded (warning to stderr).
double ghost_metric(const EnvSpec& spec, const Array2& predicted_states,
                    const Array2& predicted_actions,
                    std::span<const double> sigma);

double wrap_angle(double x);

}  // namespace contactdiff

#endif  // CONTACTDIFF_ENVS_HPP_
