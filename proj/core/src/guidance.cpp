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

#include "contactdiff/guidance.hpp"

#include <algorithm>
#include <cmath>

namespace contactdiff {

namespace {

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

double softplus(double x) {
  if (x > 20.0) return x;
  if (x < -20.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Effective delta1: config override or the env's contact threshold.
double delta1_of(const EnvSpec& spec, const GuidanceConfig& cfg) {
  return cfg.contact_threshold > 0.0 ? cfg.contact_threshold
                                     : spec.contact_threshold;
}

double goal_diff(const EnvSpec& spec, double value, double target) {
  return spec.goal_wraps ? wrap_angle(value - target) : value - target;
}

}  // namespace

double align_energy(const EnvSpec& spec, const Array2& tau_denorm,
                    double discount, Array2* grad) {
  const int h = tau_denorm.rows;
  const int ad = spec.act_dim;
  if (grad) *grad = Array2(h, tau_denorm.cols);
  double energy = 0.0;
  double w = 1.0;
  for (int t = 0; t < h; ++t, w *= discount) {
    for (size_t j = 0; j < spec.hand_pos_indices.size(); ++j) {
      const int hc = ad + spec.hand_pos_indices[j];
      const int cc = ad + spec.contact_pos_indices[j];
      const double d = tau_denorm(t, hc) - tau_denorm(t, cc);
      energy += w * d * d / h;
      if (grad) {
        (*grad)(t, hc) += w * 2.0 * d / h;
        (*grad)(t, cc) -= w * 2.0 * d / h;
      }
    }
  }
  return energy;
}

double goal_energy(const EnvSpec& spec, const Array2& tau_denorm,
                   std::span<const double> goal, GoalMode mode,
                   double discount, Array2* grad) {
  const int h = tau_denorm.rows;
  const int ad = spec.act_dim;
  if (goal.size() != spec.goal_indices.size()) {
    throw ShapeError("goal_energy: goal dims do not match env goal indices");
  }
  if (grad) *grad = Array2(h, tau_denorm.cols);
  double energy = 0.0;
  if (mode == GoalMode::kHard) {
    for (size_t j = 0; j < goal.size(); ++j) {
      const int col = ad + spec.goal_indices[j];
      const double d = goal_diff(spec, tau_denorm(h - 1, col), goal[j]);
      energy += d * d;
      if (grad) (*grad)(h - 1, col) += 2.0 * d;
    }
    return energy;
  }
  double w = 1.0;
  for (int t = 0; t < h; ++t, w *= discount) {
    const double ratio = double(t) / double(h);
    for (size_t j = 0; j < goal.size(); ++j) {
      const int col = ad + spec.goal_indices[j];
      double target;
      if (mode == GoalMode::kConst) {
        target = goal[j];
      } else {
        target = (1.0 - ratio) * tau_denorm(0, col) + ratio * goal[j];
      }
      const double d = goal_diff(spec, tau_denorm(t, col), target);
      energy += w * d * d / h;
      if (grad) {
        (*grad)(t, col) += w * 2.0 * d / h;
        if (mode == GoalMode::kSoft) {
          (*grad)(0, col) -= w * 2.0 * d * (1.0 - ratio) / h;
        }
      }
    }
  }
  return energy;
}

double finger_activity_energy(const EnvSpec& spec, const Array2& tau_denorm,
                              double delta3, double discount, Array2* grad) {
  const int h = tau_denorm.rows;
  const int ad = spec.act_dim;
  if (grad) *grad = Array2(h, tau_denorm.cols);
  // Sharpened surrogate delta3 * softplus(z / delta3): near-zero once the
  // mean activity clears the floor, and it stays differentiable. The width
  // has to track delta3 or the penalty cannot tell 0 from full actuation.
  const double sharp = 1.0 / std::max(delta3, 1e-6);
  double energy = 0.0;
  double w = 1.0;
  for (int t = 0; t < h; ++t, w *= discount) {
    double mean_abs = 0.0;
    for (int k = 0; k < ad; ++k) mean_abs += std::fabs(tau_denorm(t, k));
    mean_abs /= ad;
    const double z = delta3 - mean_abs;
    energy += w * softplus(sharp * z) / sharp / h;
    if (grad) {
      const double sig = sigmoid(sharp * z);
      for (int k = 0; k < ad; ++k) {
        const double sign = tau_denorm(t, k) > 0.0   ? 1.0
                            : tau_denorm(t, k) < 0.0 ? -1.0
                                                     : 0.0;
        (*grad)(t, k) += -w * sig * sign / (h * ad);
      }
    }
  }
  return energy;
}

Array2 penalty_project(const EnvSpec& spec, const Array2& tau0_denorm,
                       double delta2) {
  Array2 out = tau0_denorm;
  const int ad = spec.act_dim;
  for (int t = 0; t + 1 < out.rows; ++t) {
    for (int oi : spec.object_indices) {
      const int col = ad + oi;
      double d = out(t + 1, col) - out(t, col);
      if (spec.goal_wraps && oi == spec.goal_indices[0]) d = wrap_angle(d);
      out(t + 1, col) = out(t, col) + clamp(d, -delta2, delta2);
    }
  }
  return out;
}

Phase select_phase(const EnvSpec& spec, const Array2& tau0_denorm,
                   double delta1) {
  const int ad = spec.act_dim;
  double sq = 0.0;
  for (size_t j = 0; j < spec.hand_pos_indices.size(); ++j) {
    const double d = tau0_denorm(0, ad + spec.hand_pos_indices[j]) -
                     tau0_denorm(0, ad + spec.contact_pos_indices[j]);
    sq += d * d;
  }
  // Strict inequality: exactly delta1 away is still pre-contact.
  return std::sqrt(sq) < delta1 ? Phase::kPost : Phase::kPre;
}

double post_phase_weight(const EnvSpec& spec, const Array2& tau0_denorm,
                         const GuidanceConfig& config) {
  const double d1 = delta1_of(spec, config);
  if (!config.blend_phases) {
    return select_phase(spec, tau0_denorm, d1) == Phase::kPost ? 1.0 : 0.0;
  }
  const int ad = spec.act_dim;
  double sq = 0.0;
  for (size_t j = 0; j < spec.hand_pos_indices.size(); ++j) {
    const double d = tau0_denorm(0, ad + spec.hand_pos_indices[j]) -
                     tau0_denorm(0, ad + spec.contact_pos_indices[j]);
    sq += d * d;
  }
  const double dist = std::sqrt(sq);
  if (dist < d1) return 1.0;
  if (dist >= 2.0 * d1) return 0.0;
  return (2.0 * d1 - dist) / d1;
}

Array2 compose_gradient(std::span<const EnergyTerm> terms,
                        const GuidanceContext& ctx, Phase phase,
                        const GuidanceConfig& config) {
  (void)config;
  Array2 g(ctx.tau_norm->rows, ctx.tau_norm->cols);
  for (const auto& term : terms) {
    if (!term.gradient) continue;
    if (term.phase != PhaseMask::kBoth &&
        ((term.phase == PhaseMask::kPre) != (phase == Phase::kPre))) {
      continue;
    }
    Array2 tg = term.gradient(ctx);
    if (!all_finite(tg)) {
      throw GuidanceError("guidance diverged: non-finite gradient from term \"" +
                          term.name + "\"");
    }
    axpy(-term.weight, tg, g);
  }
  return g;
}

Array2 apply_projections(std::span<const EnergyTerm> terms,
                         const GuidanceContext& ctx, Phase phase,
                         const Array2& tau0_norm) {
  Array2 out = tau0_norm;
  for (const auto& term : terms) {
    if (!term.project) continue;
    if (term.phase != PhaseMask::kBoth &&
        ((term.phase == PhaseMask::kPre) != (phase == Phase::kPre))) {
      continue;
    }
    out = term.project(ctx, out);
  }
  return out;
}

EnergyTerm make_denorm_term(
    std::string name, PhaseMask phase, double weight,
    std::function<double(const GuidanceContext&, Array2*)> eval) {
  EnergyTerm term;
  term.name = std::move(name);
  term.phase = phase;
  term.weight = weight;
  term.value = [eval](const GuidanceContext& ctx) {
    return eval(ctx, nullptr);
  };
  term.gradient = [eval](const GuidanceContext& ctx) {
    Array2 grad;
    eval(ctx, &grad);
    // Chain rule from environment units to normalized units.
    const auto& scale = ctx.normalizer->scale;
    for (int r = 0; r < grad.rows; ++r) {
      for (int c = 0; c < grad.cols; ++c) grad(r, c) *= scale[c];
    }
    return grad;
  };
  return term;
}

std::vector<EnergyTerm> default_terms(const EnvSpec& spec,
                                      const Normalizer& norm,
                                      const DynamicsModel* dynamics,
                                      std::vector<double> goal,
                                      const GuidanceConfig& config) {
  (void)norm;
  std::vector<EnergyTerm> terms;
  const bool in_hand = spec.kind == EnvKind::kDisk;
  const double gamma = config.discount;

  if (!in_hand) {
    terms.push_back(make_denorm_term(
        "align", PhaseMask::kPre, config.weight_align,
        [&spec, gamma](const GuidanceContext& ctx, Array2* grad) {
          return align_energy(*ctx.spec, *ctx.tau_denorm, gamma, grad);
        }));
  }

  const GoalMode mode = config.soft_goal ? GoalMode::kSoft : GoalMode::kHard;
  terms.push_back(make_denorm_term(
      "goal", in_hand ? PhaseMask::kBoth : PhaseMask::kPost,
      config.weight_goal,
      [goal, mode, gamma](const GuidanceContext& ctx, Array2* grad) {
        return goal_energy(*ctx.spec, *ctx.tau_denorm, goal, mode, gamma,
                           grad);
      }));

  if (in_hand) {
    const double d3 = config.activity_floor;
    terms.push_back(make_denorm_term(
        "finger_activity", PhaseMask::kBoth, config.weight_finger,
        [d3, gamma](const GuidanceContext& ctx, Array2* grad) {
          return finger_activity_energy(*ctx.spec, *ctx.tau_denorm, d3, gamma,
                                        grad);
        }));
  }

  if (dynamics) {
    EnergyTerm dyn;
    dyn.name = "dynamics";
    dyn.phase = PhaseMask::kBoth;
    dyn.weight = config.weight_dynamics;
    dyn.value = [dynamics](const GuidanceContext& ctx) {
      return dyn_energy(*dynamics, *ctx.tau_norm);
    };
    dyn.gradient = [dynamics](const GuidanceContext& ctx) {
      return dyn_energy_grad(*dynamics, *ctx.tau_norm).second;
    };
    terms.push_back(std::move(dyn));
  }

  EnergyTerm penalty;
  penalty.name = "penalty";
  penalty.phase = in_hand ? PhaseMask::kBoth : PhaseMask::kPost;
  const double d2 = config.object_delta_cap;
  penalty.project = [d2](const GuidanceContext& ctx, const Array2& tau_norm) {
    Array2 denorm = ctx.normalizer->denormalize(tau_norm);
    denorm = penalty_project(*ctx.spec, denorm, d2);
    return ctx.normalizer->normalize(denorm);
  };
  terms.push_back(std::move(penalty));

  return terms;
}

std::vector<EnergyTerm> naive_terms(const EnvSpec& spec,
                                    const Normalizer& norm,
                                    std::vector<double> goal,
                                    const GuidanceConfig& config) {
  (void)spec;
  (void)norm;
  const double gamma = config.discount;
  std::vector<EnergyTerm> terms;
  terms.push_back(make_denorm_term(
      "naive_goal", PhaseMask::kBoth, config.weight_naive_goal,
      [goal, gamma](const GuidanceContext& ctx, Array2* grad) {
        return goal_energy(*ctx.spec, *ctx.tau_denorm, goal, GoalMode::kConst,
                           gamma, grad);
      }));
  return terms;
}

}  // namespace contactdiff
