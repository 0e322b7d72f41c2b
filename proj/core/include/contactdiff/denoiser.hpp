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

#ifndef CONTACTDIFF_DENOISER_HPP_
#define CONTACTDIFF_DENOISER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "contactdiff/data.hpp"
#include "contactdiff/mlp.hpp"
#include "contactdiff/schedule.hpp"

namespace contactdiff {

// Fully-connected trajectory denoiser over the flattened H x (act+obs)
// window. Predicts the clean trajectory tau_0 directly. The diffusion step
// enters as 16 sinusoidal features of i/N; an optional condition block
// [cond..., flag] is appended, with the all-zeros block as the null token.
struct DenoiserConfig {
  int horizon = 32;
  int act_dim = 0;
  int obs_dim = 0;
  int schedule_steps = 20;
  int cond_dim = 0;
  std::vector<int> hidden = {256, 256, 256};
  int step_embed_dim = 16;

  int traj_dim() const { return act_dim + obs_dim; }
  int flat_dim() const { return horizon * traj_dim(); }
  int input_dim() const {
    return flat_dim() + step_embed_dim + (cond_dim > 0 ? cond_dim + 1 : 0);
  }
};

struct DenoiserModel {
  DenoiserConfig config;
  MlpParams net;
  // Standardization of raw condition values, fit during training.
  std::vector<double> cond_offset;
  std::vector<double> cond_scale;
};

struct DenoiserTrainConfig {
  int64_t steps = 20000;
  int batch = 64;
  double learning_rate = 2e-4;
  double cond_dropout = 0.25;  // probability of the null token per sample
  uint64_t seed = 0;
  // Substitute the clean first-state columns into the noised input, the
  // same conditioning the sampler applies at every reverse step.
  bool inpaint_first_state = true;
  ScheduleKind schedule = ScheduleKind::kCosine;
};

std::vector<double> step_embedding(int step, int schedule_steps, int dim);

// windows must be normalized; conds (raw units) either empty or one vector
// per window when config.cond_dim > 0. Throws TrainError with the step
// index if the loss diverges.
DenoiserModel train_denoiser(
    const std::vector<Array2>& windows, const DenoiserConfig& config,
    const DenoiserTrainConfig& train,
    const std::vector<std::vector<double>>& conds = {},
    std::vector<std::pair<int64_t, double>>* loss_log = nullptr);

// cond empty selects the null token. Output shape equals tau's.
Array2 predict_x0(const DenoiserModel& model, const Array2& tau, int step,
                  std::span<const double> cond = {});

// Classifier-free composition in x0 space:
// x = x(null) + omega * (x(cond) - x(null)). Requires a conditional model.
Array2 cf_compose(const DenoiserModel& model, const Array2& tau, int step,
                  std::span<const double> cond, double omega);

// Self-contained checkpoint (magic "CDN1"): model, normalizer, per-dim
// training std (ghost metric), env id.
struct DenoiserArtifact {
  std::string env_id;
  DenoiserModel model;
  Normalizer normalizer;
  std::vector<double> sigma;
};

void save_denoiser(const std::string& path, const DenoiserArtifact& artifact);
DenoiserArtifact load_denoiser(const std::string& path);

}  // namespace contactdiff

#endif  // CONTACTDIFF_DENOISER_HPP_
