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

#ifndef CONTACTDIFF_PLANNER_HPP_
#define CONTACTDIFF_PLANNER_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contactdiff/denoiser.hpp"
#include "contactdiff/guidance.hpp"
#include "contactdiff/schedule.hpp"

namespace contactdiff {

// full: dual-phase energy guidance + penalty projection + dynamics guide.
// no_guide: unconditional sampling with state inpainting only.
// naive_guide: direct object-goal push, no phases or dynamics.
// inpaint: goal substituted at the final step instead of gradients.
// cfree: classifier-free conditional model composition.
// oracle: replans by rolling the scripted expert through the simulator
// (test stub; zero ghost by construction).
enum class PlanMode { kFull, kNoGuide, kNaiveGuide, kInpaint, kCfree, kOracle };

PlanMode plan_mode_from_string(const std::string& s);
std::string to_string(PlanMode mode);

struct PlanConfig {
  PlanMode mode = PlanMode::kFull;
  int horizon = 32;
  int execute_steps = 8;  // receding horizon k
  double omega = 1.0;     // cfree blend weight
  std::vector<double> goal;
  uint64_t seed = 0;
  GuidanceConfig guidance;
  // Denoised estimates are clamped to [-1 - margin, 1 + margin] in
  // normalized units. Adaptation goals outside the data range need a wide
  // margin; the disk's half-side goals live beyond the training box.
  double x0_clamp_margin = 0.1;
};

// Immutable, shareable planning inputs. Episodes across seeds may run in
// parallel against one instance.
struct PlannerArtifacts {
  const EnvSpec* spec = nullptr;
  const NoiseSchedule* schedule = nullptr;
  const DenoiserModel* denoiser = nullptr;
  const DenoiserModel* conditional_denoiser = nullptr;  // cfree only
  const DynamicsModel* dynamics = nullptr;              // full only
  const Normalizer* normalizer = nullptr;
  std::vector<double> sigma;  // per-dim training std for the ghost metric
};

// Guided reverse-diffusion sample. Per reverse step: predict tau_hat_0,
// apply projections to it, inpaint the step-0 state columns with s0, select
// the phase from tau_hat_0, compose the guidance gradient, then take the
// posterior step with mean shift alpha * Sigma * g. Returns the trajectory
// denormalized, with the step-0 state exactly s0.
Array2 guided_sample(const PlannerArtifacts& art,
                     std::span<const EnergyTerm> terms, const PlanConfig& cfg,
                     const EnvState& s0, Rng& rng);

// As guided_sample but substitutes the goal at the final step's object
// columns on every reverse iteration; no energy terms.
Array2 inpaint_goal_sample(const PlannerArtifacts& art, const PlanConfig& cfg,
                           const EnvState& s0, Rng& rng);

// Classifier-free sampling; the condition is goal minus the current object
// value, composed with weight omega.
Array2 cfree_sample(const PlannerArtifacts& art, const PlanConfig& cfg,
                    const EnvState& s0, Rng& rng);

// Dispatch by cfg.mode, building the default term set for full/naive.
Array2 plan_trajectory(const PlannerArtifacts& art, const PlanConfig& cfg,
                       const EnvState& s0, Rng& rng);

struct EpisodeRollout {
  std::vector<EnvState> states;               // executed; states[0] = reset
  std::vector<std::vector<double>> actions;   // executed (pre-clip) actions
  std::vector<Array2> plans;                  // denormalized, one per replan
  bool success = false;
  double ghost = 0.0;  // mean over replans of the plan's ghost metric
  int steps = 0;
  std::string error;  // non-empty if the planner aborted the episode
};

// Plan, execute the first k actions, recheck success after every step,
// replan until success holds or max_steps is reached. max_steps must be at
// least the plan horizon.
EpisodeRollout receding_control(const PlannerArtifacts& art,
                                const PlanConfig& cfg, const EnvState& s0,
                                int max_steps);

}  // namespace contactdiff

#endif  // CONTACTDIFF_PLANNER_HPP_
