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

#ifndef CONTACTDIFF_DYNMODEL_HPP_
#define CONTACTDIFF_DYNMODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "contactdiff/data.hpp"
#include "contactdiff/mlp.hpp"

namespace contactdiff {

// Learned one-step forward model in normalized units. The network predicts
// the state residual, s'_n = s_n + net([s_n, a_n]).
struct DynamicsModel {
  std::string env_id;
  int obs_dim = 0;
  int act_dim = 0;
  MlpParams net;
  double holdout_mse = 0.0;
};

struct DynTrainConfig {
  int64_t steps = 8000;
  int batch = 64;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
  double holdout_fraction = 0.1;
  std::vector<int> hidden = {128, 128};
};

DynamicsModel train_dynamics(const DemoSet& demos, const Normalizer& norm,
                             const DynTrainConfig& config);

// Predicted next state (normalized) for one transition.
std::vector<double> dyn_predict(const DynamicsModel& model,
                                std::span<const double> state_norm,
                                std::span<const double> action_norm);

// Consistency energy over a normalized H x (act+obs) trajectory:
// sum over t < H-1 of || s_{t+1} - T(s_t, a_t) ||^2.
double dyn_energy(const DynamicsModel& model, const Array2& tau_norm);

// Energy plus its gradient w.r.t. every trajectory entry (states at t and
// t+1 and actions at t, through the network's backward pass).
std::pair<double, Array2> dyn_energy_grad(const DynamicsModel& model,
                                          const Array2& tau_norm);

// Checkpoint (magic "CDY1") with env-id header.
void save_dynamics(const std::string& path, const DynamicsModel& model);
DynamicsModel load_dynamics(const std::string& path);

}  // namespace contactdiff

#endif  // CONTACTDIFF_DYNMODEL_HPP_
