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

#include "contactdiff/planner.hpp"

#include <algorithm>
#include <cmath>

namespace contactdiff {

PlanMode plan_mode_from_string(const std::string& s) {
  if (s == "full") return PlanMode::kFull;
  if (s == "no_guide") return PlanMode::kNoGuide;
  if (s == "naive_guide") return PlanMode::kNaiveGuide;
  if (s == "inpaint") return PlanMode::kInpaint;
  if (s == "cfree") return PlanMode::kCfree;
  if (s == "oracle") return PlanMode::kOracle;
  throw ConfigError("unknown plan mode: \"" + s + "\"");
}

std::string to_string(PlanMode mode) {
  switch (mode) {
    case PlanMode::kFull: return "full";
    case PlanMode::kNoGuide: return "no_guide";
    case PlanMode::kNaiveGuide: return "naive_guide";
    case PlanMode::kInpaint: return "inpaint";
    case PlanMode::kCfree: return "cfree";
    case PlanMode::kOracle: return "oracle";
  }
  return "?";
}

namespace {

void inpaint_state(Array2& tau, std::span<const double> state_norm,
                   int act_dim) {
  for (size_t k = 0; k < state_norm.size(); ++k) {
    tau(0, act_dim + int(k)) = state_norm[k];
  }
}

void clamp_array(Array2& a, double lo, double hi) {
  for (double& v : a.data) v = std::min(std::max(v, lo), hi);
}

struct SampleOps {
  // Per-step hook: given the clamped prediction (normalized, step-0 state
  // already inpainted), optionally project it and return the guidance
  // gradient (empty = unguided).
  virtual Array2 process(Array2& x0_norm) = 0;
  virtual ~SampleOps() = default;
};

Array2 reverse_loop(const PlannerArtifacts& art, const PlanConfig& cfg,
                    const EnvState& s0, Rng& rng, SampleOps& ops,
                    const DenoiserModel& model,
                    std::span<const double> cond = {}, double omega = 1.0,
                    bool compose_cf = false) {
  const auto& spec = *art.spec;
  const auto& sched = *art.schedule;
  const int h = cfg.horizon;
  const int d = spec.act_dim + spec.obs_dim;
  const std::vector<double> s0n = art.normalizer->normalize_state(s0);

  Array2 tau(h, d);
  for (double& v : tau.data) v = rng.gaussian();
  inpaint_state(tau, s0n, spec.act_dim);

  const double clamp_lo = -1.0 - cfg.x0_clamp_margin;
  const double clamp_hi = 1.0 + cfg.x0_clamp_margin;

  for (int i = sched.steps; i >= 1; --i) {
    Array2 x0 = compose_cf ? cf_compose(model, tau, i, cond, omega)
                           : predict_x0(model, tau, i);
    clamp_array(x0, clamp_lo, clamp_hi);
    inpaint_state(x0, s0n, spec.act_dim);
    Array2 g = ops.process(x0);
    inpaint_state(x0, s0n, spec.act_dim);
    tau = posterior_step(sched, x0, tau, i, cfg.guidance.alpha,
                         g.rows > 0 ? &g : nullptr, rng);
    inpaint_state(tau, s0n, spec.act_dim);
  }

  Array2 out = art.normalizer->denormalize(tau);
  for (int k = 0; k < spec.obs_dim; ++k) out(0, spec.act_dim + k) = s0[k];
  return out;
}

}  // namespace

Array2 guided_sample(const PlannerArtifacts& art,
                     std::span<const EnergyTerm> terms, const PlanConfig& cfg,
                     const EnvState& s0, Rng& rng) {
  struct GuidedOps : SampleOps {
    const PlannerArtifacts* art;
    const PlanConfig* cfg;
    std::span<const EnergyTerm> terms;

    Array2 process(Array2& x0_norm) override {
      if (terms.empty()) return {};
      GuidanceContext ctx;
      ctx.spec = art->spec;
      ctx.normalizer = art->normalizer;
      Array2 denorm = art->normalizer->denormalize(x0_norm);
      ctx.tau_norm = &x0_norm;
      ctx.tau_denorm = &denorm;
      const double d1 = cfg->guidance.contact_threshold > 0.0
                            ? cfg->guidance.contact_threshold
                            : art->spec->contact_threshold;
      const Phase phase = select_phase(*art->spec, denorm, d1);
      // Dirac-style terms act on the denoised estimate itself.
      x0_norm = apply_projections(terms, ctx, phase, x0_norm);
      denorm = art->normalizer->denormalize(x0_norm);
      if (cfg->guidance.blend_phases) {
        const double w = post_phase_weight(*art->spec, denorm, cfg->guidance);
        Array2 pre = compose_gradient(terms, ctx, Phase::kPre, cfg->guidance);
        Array2 post =
            compose_gradient(terms, ctx, Phase::kPost, cfg->guidance);
        Array2 g(pre.rows, pre.cols);
        for (size_t k = 0; k < g.data.size(); ++k) {
          // kBoth terms appear in both compositions; the blend weights sum
          // to one so they keep unit weight.
          g.data[k] = (1.0 - w) * pre.data[k] + w * post.data[k];
        }
        return g;
      }
      return compose_gradient(terms, ctx, phase, cfg->guidance);
    }
  };
  GuidedOps ops;
  ops.art = &art;
  ops.cfg = &cfg;
  ops.terms = terms;
  return reverse_loop(art, cfg, s0, rng, ops, *art.denoiser);
}

Array2 inpaint_goal_sample(const PlannerArtifacts& art, const PlanConfig& cfg,
                           const EnvState& s0, Rng& rng) {
  struct InpaintOps : SampleOps {
    const PlannerArtifacts* art;
    const PlanConfig* cfg;
    std::vector<double> goal_norm;  // per goal index
    Array2 process(Array2& x0_norm) override {
      const auto& spec = *art->spec;
      for (size_t j = 0; j < spec.goal_indices.size(); ++j) {
        x0_norm(x0_norm.rows - 1, spec.act_dim + spec.goal_indices[j]) =
            goal_norm[j];
      }
      return {};
    }
  };
  InpaintOps ops;
  ops.art = &art;
  ops.cfg = &cfg;
  const auto& spec = *art.spec;
  for (size_t j = 0; j < spec.goal_indices.size(); ++j) {
    const int col = spec.act_dim + spec.goal_indices[j];
    ops.goal_norm.push_back((cfg.goal[j] - art.normalizer->offset[col]) /
                            art.normalizer->scale[col]);
  }
  Array2 out = reverse_loop(art, cfg, s0, rng, ops, *art.denoiser);
  for (size_t j = 0; j < spec.goal_indices.size(); ++j) {
    out(out.rows - 1, spec.act_dim + spec.goal_indices[j]) = cfg.goal[j];
  }
  return out;
}

Array2 cfree_sample(const PlannerArtifacts& art, const PlanConfig& cfg,
                    const EnvState& s0, Rng& rng) {
  if (!art.conditional_denoiser) {
    throw ConfigError("cfree mode requires a conditional denoiser checkpoint");
  }
  if (art.conditional_denoiser->config.cond_dim == 0) {
    throw ConfigError("cfree: checkpoint is not a conditional model");
  }
  struct NoOps : SampleOps {
    Array2 process(Array2&) override { return {}; }
  };
  NoOps ops;
  const auto& spec = *art.spec;
  std::vector<double> cond;
  for (size_t j = 0; j < spec.goal_indices.size(); ++j) {
    double d = cfg.goal[j] - s0[spec.goal_indices[j]];
    if (spec.goal_wraps) d = wrap_angle(d);
    cond.push_back(d);
  }
  return reverse_loop(art, cfg, s0, rng, ops, *art.conditional_denoiser, cond,
                      cfg.omega, /*compose_cf=*/true);
}

namespace {

Array2 oracle_plan(const PlannerArtifacts& art, const PlanConfig& cfg,
                   const EnvState& s0) {
  const auto& spec = *art.spec;
  Array2 plan(cfg.horizon, spec.act_dim + spec.obs_dim);
  EnvState s = s0;
  for (int t = 0; t < cfg.horizon; ++t) {
    const std::vector<double> a = expert_action(spec, s, cfg.goal);
    for (int k = 0; k < spec.act_dim; ++k) plan(t, k) = a[k];
    for (int k = 0; k < spec.obs_dim; ++k) plan(t, spec.act_dim + k) = s[k];
    s = env_step(spec, s, a);
  }
  return plan;
}

}  // namespace

Array2 plan_trajectory(const PlannerArtifacts& art, const PlanConfig& cfg,
                       const EnvState& s0, Rng& rng) {
  switch (cfg.mode) {
    case PlanMode::kFull: {
      const auto terms = default_terms(*art.spec, *art.normalizer,
                                       art.dynamics, cfg.goal, cfg.guidance);
      return guided_sample(art, terms, cfg, s0, rng);
    }
    case PlanMode::kNaiveGuide: {
      const auto terms =
          naive_terms(*art.spec, *art.normalizer, cfg.goal, cfg.guidance);
      return guided_sample(art, terms, cfg, s0, rng);
    }
    case PlanMode::kNoGuide:
      return guided_sample(art, {}, cfg, s0, rng);
    case PlanMode::kInpaint:
      return inpaint_goal_sample(art, cfg, s0, rng);
    case PlanMode::kCfree:
      return cfree_sample(art, cfg, s0, rng);
    case PlanMode::kOracle:
      return oracle_plan(art, cfg, s0);
  }
  throw ConfigError("plan_trajectory: bad mode");
}

EpisodeRollout receding_control(const PlannerArtifacts& art,
                                const PlanConfig& cfg, const EnvState& s0,
                                int max_steps) {
  const auto& spec = *art.spec;
  if (max_steps < cfg.horizon) {
    throw ConfigError("receding_control: max_steps < plan horizon");
  }
  EpisodeRollout roll;
  roll.states.push_back(s0);
  Rng rng(cfg.seed);
  EnvState s = s0;
  try {
    while (int(roll.actions.size()) < max_steps && !roll.success) {
      Array2 plan = plan_trajectory(art, cfg, s, rng);
      roll.plans.push_back(plan);
      const int budget =
          std::min(cfg.execute_steps, max_steps - int(roll.actions.size()));
      for (int t = 0; t < budget; ++t) {
        std::vector<double> a(spec.act_dim);
        for (int k = 0; k < spec.act_dim; ++k) a[k] = plan(t, k);
        s = env_step(spec, s, a);
        roll.states.push_back(s);
        roll.actions.push_back(std::move(a));
        if (spec.terminate_on_success &&
            env_success(spec, roll.states, cfg.goal)) {
          roll.success = true;
          break;
        }
      }
    }
    if (!roll.success) {
      roll.success = env_success(spec, roll.states, cfg.goal);
    }
  } catch (const GuidanceError& e) {
    roll.error = e.what();
  }
  roll.steps = int(roll.actions.size());
  if (!roll.plans.empty()) {
    double total = 0.0;
    for (const Array2& plan : roll.plans) {
      Array2 states(plan.rows, spec.obs_dim);
      Array2 actions(plan.rows, spec.act_dim);
      for (int t = 0; t < plan.rows; ++t) {
        for (int k = 0; k < spec.obs_dim; ++k) {
          states(t, k) = plan(t, spec.act_dim + k);
        }
        for (int k = 0; k < spec.act_dim; ++k) actions(t, k) = plan(t, k);
      }
      total += ghost_metric(spec, states, actions, art.sigma);
    }
    roll.ghost = total / double(roll.plans.size());
  }
  return roll;
}

}  // namespace contactdiff
