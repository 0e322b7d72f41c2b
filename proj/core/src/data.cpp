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

#include "contactdiff/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "contactdiff/checkpoint.hpp"

namespace contactdiff {

namespace {

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

DimStats compute_stats(const std::vector<std::vector<double>>& rows, int dim) {
  DimStats s;
  s.min.assign(dim, 0.0);
  s.max.assign(dim, 0.0);
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 0.0);
  if (rows.empty()) return s;
  for (int d = 0; d < dim; ++d) {
    double mn = rows[0][d], mx = rows[0][d], sum = 0.0;
    for (const auto& r : rows) {
      mn = std::min(mn, r[d]);
      mx = std::max(mx, r[d]);
      sum += r[d];
    }
    const double mean = sum / double(rows.size());
    double var = 0.0;
    for (const auto& r : rows) var += (r[d] - mean) * (r[d] - mean);
    s.min[d] = mn;
    s.max[d] = mx;
    s.mean[d] = mean;
    s.stddev[d] = std::sqrt(var / double(rows.size()));
  }
  return s;
}

}  // namespace

void recompute_stats(DemoSet& demos) {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> actions;
  for (const auto& ep : demos.episodes) {
    for (const auto& tr : ep.steps) {
      states.push_back(tr.state);
      actions.push_back(tr.action);
    }
    if (!ep.steps.empty()) states.push_back(ep.steps.back().next_state);
  }
  demos.state_stats = compute_stats(states, demos.obs_dim);
  demos.action_stats = compute_stats(actions, demos.act_dim);
}

DemoSet collect_demos(const EnvSpec& spec, const CollectConfig& config) {
  if (config.episodes < 1) {
    throw ConfigError("collect_demos: episode count must be >= 1");
  }
  DemoSet demos;
  demos.env_id = spec.id;
  demos.obs_dim = spec.obs_dim;
  demos.act_dim = spec.act_dim;

  for (int e = 0; e < config.episodes; ++e) {
    const uint64_t episode_seed = derive_seed(config.seed, uint64_t(e));
    Rng rng(episode_seed);
    EnvState state = env_reset(spec, rng);
    const double goal = sample_training_goal(spec, rng);

    // Waypoint plan: door episodes may pause-hold partway before finishing.
    struct Waypoint {
      double goal;
      int hold;
    };
    std::vector<Waypoint> plan = {{goal, 0}};
    if (rng.uniform() < config.pause_probability) {
      // Pause-hold partway so held intermediate configurations are on the
      // data manifold; goal-adaptive guidance selects among them later.
      if (spec.kind == EnvKind::kDoor1d) {
        plan = {{rng.uniform(0.15, goal - 0.15), 8 + int(rng.next_index(14))},
                {goal, 0}};
      } else if (spec.kind == EnvKind::kHammer1d) {
        plan = {{rng.uniform(0.015, goal - 0.015),
                 8 + int(rng.next_index(14))},
                {goal, 0}};
      }
    }

    Episode ep;
    std::vector<EnvState> trace = {state};
    size_t wp = 0;
    int hold_left = -1;
    bool reached = false;
    for (int t = 0; t < config.max_episode_steps; ++t) {
      std::vector<double> a = expert_action(spec, state, {&plan[wp].goal, 1});
      for (int k = 0; k < spec.act_dim; ++k) {
        a[k] += config.action_noise * spec.action_bounds[k] *
                rng.uniform(-1.0, 1.0);
        a[k] = clamp(a[k], -spec.action_bounds[k], spec.action_bounds[k]);
      }
      EnvState next = env_step(spec, state, a);
      ep.steps.push_back({state, a, next});
      trace.push_back(next);
      state = next;
      if (wp + 1 < plan.size()) {
        const int gi = spec.goal_indices[0];
        double d = state[gi] - plan[wp].goal;
        if (spec.goal_wraps) d = wrap_angle(d);
        if (hold_left < 0 && std::fabs(d) < 0.05) {
          hold_left = plan[wp].hold;
        } else if (hold_left == 0) {
          ++wp;
          hold_left = -1;
        } else if (hold_left > 0) {
          --hold_left;
        }
      } else if (env_success(spec, trace, {&goal, 1})) {
        reached = true;
        break;
      }
    }
    if (!reached) {
      throw CollectError("collect_demos: expert failed episode " +
                         std::to_string(e) + " (seed " +
                         std::to_string(episode_seed) + ") on " + spec.id);
    }
    // Hold recording so windows cover held terminal behavior.
    for (int t = 0; t < config.hold_steps; ++t) {
      std::vector<double> a = expert_action(spec, state, {&goal, 1});
      for (int k = 0; k < spec.act_dim; ++k) {
        a[k] += config.action_noise * spec.action_bounds[k] *
                rng.uniform(-1.0, 1.0);
        a[k] = clamp(a[k], -spec.action_bounds[k], spec.action_bounds[k]);
      }
      EnvState next = env_step(spec, state, a);
      ep.steps.push_back({state, a, next});
      state = next;
    }
    demos.episodes.push_back(std::move(ep));
  }
  recompute_stats(demos);
  return demos;
}

std::vector<Array2> window_dataset(const DemoSet& demos, int horizon) {
  if (horizon < 2) throw ConfigError("window_dataset: horizon must be >= 2");
  const int d = demos.act_dim + demos.obs_dim;
  std::vector<Array2> out;
  for (const auto& ep : demos.episodes) {
    const int len = int(ep.steps.size());
    if (len == 0) continue;
    auto fill_row = [&](Array2& w, int row, const Transition& tr) {
      for (int k = 0; k < demos.act_dim; ++k) w(row, k) = tr.action[k];
      for (int k = 0; k < demos.obs_dim; ++k) {
        w(row, demos.act_dim + k) = tr.state[k];
      }
    };
    if (len >= horizon) {
      for (int off = 0; off + horizon <= len; ++off) {
        Array2 w(horizon, d);
        for (int t = 0; t < horizon; ++t) fill_row(w, t, ep.steps[off + t]);
        out.push_back(std::move(w));
      }
    } else {
      // Pad by repeating the terminal state with zero actions.
      Array2 w(horizon, d);
      for (int t = 0; t < len; ++t) fill_row(w, t, ep.steps[t]);
      const auto& terminal = ep.steps.back().next_state;
      for (int t = len; t < horizon; ++t) {
        for (int k = 0; k < demos.obs_dim; ++k) {
          w(t, demos.act_dim + k) = terminal[k];
        }
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

Normalizer fit_normalizer(const DemoSet& demos) {
  if (demos.episodes.empty()) {
    throw ConfigError("fit_normalizer: empty demo set");
  }
  Normalizer n;
  n.act_dim = demos.act_dim;
  n.obs_dim = demos.obs_dim;
  n.offset.resize(n.dim());
  n.scale.resize(n.dim());
  for (int k = 0; k < demos.act_dim; ++k) {
    const double mn = demos.action_stats.min[k];
    const double mx = demos.action_stats.max[k];
    n.offset[k] = 0.5 * (mx + mn);
    n.scale[k] = 0.5 * (mx - mn);
    if (n.scale[k] < 1e-12) {
      n.offset[k] = mn;
      n.scale[k] = 1.0;
    }
  }
  for (int k = 0; k < demos.obs_dim; ++k) {
    const double mn = demos.state_stats.min[k];
    const double mx = demos.state_stats.max[k];
    n.offset[demos.act_dim + k] = 0.5 * (mx + mn);
    n.scale[demos.act_dim + k] = 0.5 * (mx - mn);
    if (n.scale[demos.act_dim + k] < 1e-12) {
      n.offset[demos.act_dim + k] = mn;
      n.scale[demos.act_dim + k] = 1.0;
    }
  }
  return n;
}

Array2 Normalizer::normalize(const Array2& tau) const {
  require_shape(tau, tau.rows, dim(), "Normalizer::normalize");
  Array2 out(tau.rows, tau.cols);
  for (int r = 0; r < tau.rows; ++r) {
    for (int c = 0; c < tau.cols; ++c) {
      out(r, c) = (tau(r, c) - offset[c]) / scale[c];
    }
  }
  return out;
}

Array2 Normalizer::denormalize(const Array2& tau) const {
  require_shape(tau, tau.rows, dim(), "Normalizer::denormalize");
  Array2 out(tau.rows, tau.cols);
  for (int r = 0; r < tau.rows; ++r) {
    for (int c = 0; c < tau.cols; ++c) {
      out(r, c) = tau(r, c) * scale[c] + offset[c];
    }
  }
  return out;
}

std::vector<double> Normalizer::normalize_state(
    std::span<const double> s) const {
  std::vector<double> out(obs_dim);
  for (int k = 0; k < obs_dim; ++k) {
    out[k] = (s[k] - offset[act_dim + k]) / scale[act_dim + k];
  }
  return out;
}

std::vector<double> Normalizer::denormalize_state(
    std::span<const double> s) const {
  std::vector<double> out(obs_dim);
  for (int k = 0; k < obs_dim; ++k) {
    out[k] = s[k] * scale[act_dim + k] + offset[act_dim + k];
  }
  return out;
}

void save_demos(const std::string& path, const DemoSet& demos) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("save_demos: cannot open " + path);
  write_magic(out, "CDD1");
  write_u32(out, uint32_t(demos.env_id.size()));
  out.write(demos.env_id.data(), std::streamsize(demos.env_id.size()));
  write_u32(out, uint32_t(demos.obs_dim));
  write_u32(out, uint32_t(demos.act_dim));
  write_u32(out, uint32_t(demos.episodes.size()));
  for (const auto& ep : demos.episodes) {
    write_u32(out, uint32_t(ep.steps.size()));
    for (const auto& tr : ep.steps) {
      for (double v : tr.state) write_f64(out, v);
      for (double v : tr.action) write_f64(out, v);
      for (double v : tr.next_state) write_f64(out, v);
    }
  }
  if (!out) throw FormatError("save_demos: write failed for " + path);
}

DemoSet load_demos(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_demos: cannot open " + path);
  expect_magic(in, "CDD1", "demo file");
  const uint32_t id_len = read_u32(in);
  if (id_len > 256) throw FormatError("demo file: implausible env id length");
  std::string id(id_len, '\0');
  in.read(id.data(), id_len);
  if (!in) throw FormatError("demo file: truncated env id");
  DemoSet demos;
  demos.env_id = id;
  demos.obs_dim = int(read_u32(in));
  demos.act_dim = int(read_u32(in));
  const uint32_t n_episodes = read_u32(in);
  for (uint32_t e = 0; e < n_episodes; ++e) {
    const uint32_t len = read_u32(in);
    Episode ep;
    ep.steps.resize(len);
    for (auto& tr : ep.steps) {
      tr.state.resize(demos.obs_dim);
      tr.action.resize(demos.act_dim);
      tr.next_state.resize(demos.obs_dim);
      for (double& v : tr.state) v = read_f64(in);
      for (double& v : tr.action) v = read_f64(in);
      for (double& v : tr.next_state) v = read_f64(in);
    }
    demos.episodes.push_back(std::move(ep));
  }
  recompute_stats(demos);
  return demos;
}

void validate_demos(const DemoSet& demos, const EnvSpec& spec) {
  if (demos.env_id != spec.id || demos.obs_dim != spec.obs_dim ||
      demos.act_dim != spec.act_dim) {
    throw FormatError("demo file for env \"" + demos.env_id + "\" (" +
                      std::to_string(demos.obs_dim) + "/" +
                      std::to_string(demos.act_dim) +
                      ") does not match env \"" + spec.id + "\" (" +
                      std::to_string(spec.obs_dim) + "/" +
                      std::to_string(spec.act_dim) + ")");
  }
}

}  // namespace contactdiff
