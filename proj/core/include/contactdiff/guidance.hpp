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

#ifndef CONTACTDIFF_GUIDANCE_HPP_
#define CONTACTDIFF_GUIDANCE_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "contactdiff/array.hpp"
#include "contactdiff/data.hpp"
#include "contactdiff/dynmodel.hpp"
#include "contactdiff/envs.hpp"

namespace contactdiff {

enum class Phase { kPre, kPost };
enum class PhaseMask { kPre, kPost, kBoth };

// What an energy term sees at evaluation time. tau_norm and tau_denorm are
// the same trajectory in normalized and environment units; terms evaluate
// in whichever space defines them and return gradients in normalized units
// (chain-ruled through the normalizer scale).
struct GuidanceContext {
  const EnvSpec* spec = nullptr;
  const Normalizer* normalizer = nullptr;
  const Array2* tau_norm = nullptr;
  const Array2* tau_denorm = nullptr;
};

// One expert h = exp(-weight * energy). Dirac-style terms provide `project`
// instead of value/gradient and are applied to the denoised estimate.
struct EnergyTerm {
  std::string name;
  PhaseMask phase = PhaseMask::kBoth;
  double weight = 1.0;
  std::function<double(const GuidanceContext&)> value;
  std::function<Array2(const GuidanceContext&)> gradient;
  std::function<Array2(const GuidanceContext&, const Array2&)> project;
};

struct GuidanceConfig {
  double alpha = 3.0;             // guidance scale (Sigma-scaled mean shift)
  double contact_threshold = 0.1;  // delta1; <=0 means use the env's delta_c
  double object_delta_cap = 0.15;  // delta2
  double activity_floor = 0.01;    // delta3
  double discount = 1.0;           // per-step discount on energy terms
  double weight_goal = 8.0;
  double weight_align = 4.0;
  double weight_dynamics = 5.0;
  double weight_finger = 4.0;
  // Raw goal push used by the naive baseline (no phases, no dynamics).
  double weight_naive_goal = 150.0;
  bool soft_goal = true;
  // Linear phase blend over [delta1, 2*delta1] instead of the hard mask.
  bool blend_phases = false;
};

// Energies on denormalized trajectories (environment units). Gradient
// outputs (optional) match tau's shape. All are mean-aggregated over t with
// discount^t weighting (discount = 1 by default).

// Mean over t of || hand_pos_t - contact_pos_t ||^2.
double align_energy(const EnvSpec& spec, const Array2& tau_denorm,
                    double discount = 1.0, Array2* grad = nullptr);

// Hard: || obj_T - goal ||^2 at the final step. Soft: mean over t of
// || obj_t - ((1 - t/H) obj_0 + (t/H) goal) ||^2. Const: mean over t of
// || obj_t - goal ||^2 (naive direct push).
enum class GoalMode { kHard, kSoft, kConst };
double goal_energy(const EnvSpec& spec, const Array2& tau_denorm,
                   std::span<const double> goal, GoalMode mode,
                   double discount = 1.0, Array2* grad = nullptr);

// Smooth surrogate of the finger-activity constraint: mean over t of
// delta3 * softplus((delta3 - mean_k |a_{t,k}|) / delta3). The width is
// tied to delta3 so the penalty vanishes once activity clears the floor.
double finger_activity_energy(const EnvSpec& spec, const Array2& tau_denorm,
                              double delta3, double discount = 1.0,
                              Array2* grad = nullptr);

// Dirac-style projection: clamps each per-step object delta to |.| <=
// delta2 by resetting obj_{t+1} = obj_t + clamp(delta).
Array2 penalty_project(const EnvSpec& spec, const Array2& tau0_denorm,
                       double delta2);

// Post iff || hand_pos_0 - contact_pos_0 || < delta1 (strict) at the first
// planning step.
Phase select_phase(const EnvSpec& spec, const Array2& tau0_denorm,
                   double delta1);

// Blend weight for post-phase terms: hard mask by default, or a linear
// ramp over [delta1, 2*delta1] when enabled.
double post_phase_weight(const EnvSpec& spec, const Array2& tau0_denorm,
                         const GuidanceConfig& config);

// g = -sum over phase-active terms of weight_i * grad_i, in normalized
// units. Terms whose phase does not match contribute exactly zero. A
// non-finite term gradient raises GuidanceError naming the term.
Array2 compose_gradient(std::span<const EnergyTerm> terms,
                        const GuidanceContext& ctx, Phase phase,
                        const GuidanceConfig& config);

// Applies every phase-active projection term to tau0_norm in order.
Array2 apply_projections(std::span<const EnergyTerm> terms,
                         const GuidanceContext& ctx, Phase phase,
                         const Array2& tau0_norm);

// Built-in term sets. The default recipe is dual-phase for manipulation
// after contact (align pre; goal + penalty post; dynamics both) and
// single-phase goal + finger + dynamics + penalty for the in-hand disk.
std::vector<EnergyTerm> default_terms(const EnvSpec& spec,
                                      const Normalizer& norm,
                                      const DynamicsModel* dynamics,
                                      std::vector<double> goal,
                                      const GuidanceConfig& config);

// Paper-style naive baseline: direct object push, no phases, no dynamics.
std::vector<EnergyTerm> naive_terms(const EnvSpec& spec,
                                    const Normalizer& norm,
                                    std::vector<double> goal,
                                    const GuidanceConfig& config);

// Wraps an energy defined on denormalized units into a term returning
// normalized-space gradients.
EnergyTerm make_denorm_term(
    std::string name, PhaseMask phase, double weight,
    std::function<double(const GuidanceContext&, Array2*)> eval);

}  // namespace contactdiff

#endif  // CONTACTDIFF_GUIDANCE_HPP_
