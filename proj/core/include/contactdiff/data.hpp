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

#ifndef CONTACTDIFF_DATA_HPP_
#define CONTACTDIFF_DATA_HPP_

#include <span>
#include <string>
#include <vector>

#include "contactdiff/array.hpp"
#include "contactdiff/envs.hpp"
#include "contactdiff/rng.hpp"

namespace contactdiff {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> next_state;
};

struct Episode {
  std::vector<Transition> steps;
};

struct DimStats {
  std::vector<double> min, max, mean, stddev;
};

struct DemoSet {
  std::string env_id;
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<Episode> episodes;
  DimStats state_stats;   // over states and next_states
  DimStats action_stats;  // over executed (clipped) actions
};

// Collection knobs. The expert is the env's proportional controller; a
// bounded exploration noise is mixed into executed actions, and door
// episodes optionally pause-hold at an intermediate hinge angle before
// continuing to the training goal. Both give the windows the behavioral
// variety that goal-adaptive guidance selects from at plan time.
struct CollectConfig {
  int episodes = 50;
  uint64_t seed = 0;
  double action_noise = 0.25;  // fraction of the per-dim action bound
  double pause_probability = 0.7;
  int hold_steps = 28;  // extra steps recorded after success
  int max_episode_steps = 400;
};

// Every episode must satisfy env_success on the training goal; a failure
// raises CollectError naming the episode seed. Deterministic per seed.
DemoSet collect_demos(const EnvSpec& spec, const CollectConfig& config);

void recompute_stats(DemoSet& demos);

// All length-H windows of [action | state] rows from each episode; episodes
// shorter than H are padded by repeating the terminal state with zero
// actions. Windows never cross episode boundaries.
std::vector<Array2> window_dataset(const DemoSet& demos, int horizon);

// Min-max map to [-1, 1] per dimension over the concatenated
// [action | state] layout. Constant dimensions map to 0 with scale 1.
struct Normalizer {
  int act_dim = 0;
  int obs_dim = 0;
  std::vector<double> offset;  // size act_dim + obs_dim
  std::vector<double> scale;

  int dim() const { return act_dim + obs_dim; }
  Array2 normalize(const Array2& tau) const;
  Array2 denormalize(const Array2& tau) const;
  std::vector<double> normalize_state(std::span<const double> s) const;
  std::vector<double> denormalize_state(std::span<const double> s) const;
};

Normalizer fit_normalizer(const DemoSet& demos);

// Demo file, magic "CDD1": u32 env-id length + UTF-8 id, u32 obs_dim,
// u32 act_dim, u32 episode count, then per episode u32 length and raw
// little-endian f64 rows (state, action, next_state).
void save_demos(const std::string& path, const DemoSet& demos);
DemoSet load_demos(const std::string& path);

// Same check the loader applies against a caller-provided spec.
void validate_demos(const DemoSet& demos, const EnvSpec& spec);

}  // namespace contactdiff

#endif  // CONTACTDIFF_DATA_HPP_
