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

#include "contactdiff/dynmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "contactdiff/adam.hpp"
#include "contactdiff/checkpoint.hpp"

#include "json.hpp"

namespace contactdiff {

DynamicsModel train_dynamics(const DemoSet& demos, const Normalizer& norm,
                             const DynTrainConfig& config) {
  if (demos.episodes.empty()) throw TrainError("train_dynamics: no demos");
  const int od = demos.obs_dim;
  const int ad = demos.act_dim;

  // Flatten transitions in normalized units.
  std::vector<std::vector<double>> inputs;   // [s_n, a_n]
  std::vector<std::vector<double>> targets;  // s'_n - s_n
  for (const auto& ep : demos.episodes) {
    for (const auto& tr : ep.steps) {
      std::vector<double> in(od + ad);
      std::vector<double> tg(od);
      for (int k = 0; k < od; ++k) {
        in[k] = (tr.state[k] - norm.offset[ad + k]) / norm.scale[ad + k];
        tg[k] = (tr.next_state[k] - tr.state[k]) / norm.scale[ad + k];
      }
      for (int k = 0; k < ad; ++k) {
        in[od + k] = (tr.action[k] - norm.offset[k]) / norm.scale[k];
      }
      inputs.push_back(std::move(in));
      targets.push_back(std::move(tg));
    }
  }

  Rng rng(config.seed);
  const size_t n = inputs.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.next_index(i + 1)]);
  }
  const size_t holdout = std::max<size_t>(1, size_t(config.holdout_fraction * n));
  std::span<const size_t> hold(order.data(), holdout);
  std::span<const size_t> train(order.data() + holdout, n - holdout);

  DynamicsModel model;
  model.env_id = demos.env_id;
  model.obs_dim = od;
  model.act_dim = ad;
  std::vector<int> sizes = {od + ad};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(od);
  model.net = make_mlp(sizes, rng);

  AdamState opt = make_adam(model.net, {.learning_rate = config.learning_rate});
  Array2 batch_in(config.batch, od + ad);
  Array2 target(config.batch, od);
  for (int64_t step = 0; step < config.steps; ++step) {
    for (int b = 0; b < config.batch; ++b) {
      const size_t idx = train[rng.next_index(train.size())];
      std::copy(inputs[idx].begin(), inputs[idx].end(), &batch_in(b, 0));
      std::copy(targets[idx].begin(), targets[idx].end(), &target(b, 0));
    }
    ForwardCache cache;
    Array2 pred = mlp_forward(model.net, batch_in, &cache);
    Array2 upstream(pred.rows, pred.cols);
    double loss = 0.0;
    const double inv = 1.0 / double(pred.size());
    for (size_t k = 0; k < pred.data.size(); ++k) {
      const double diff = pred.data[k] - target.data[k];
      loss += diff * diff;
      upstream.data[k] = 2.0 * diff * inv;
    }
    loss *= inv;
    if (!std::isfinite(loss)) {
      throw TrainError("train_dynamics: loss diverged at step " +
                       std::to_string(step));
    }
    auto [grads, ig] = mlp_backward(model.net, cache, upstream);
    (void)ig;
    adam_step(opt, model.net, grads);
  }

  // Held-out one-step MSE in normalized units.
  double mse = 0.0;
  for (size_t idx : hold) {
    Array2 in(1, od + ad);
    std::copy(inputs[idx].begin(), inputs[idx].end(), &in(0, 0));
    Array2 pred = mlp_forward(model.net, in);
    for (int k = 0; k < od; ++k) {
      const double diff = pred(0, k) - targets[idx][k];
      mse += diff * diff;
    }
  }
  model.holdout_mse = mse / double(hold.size() * od);
  return model;
}

std::vector<double> dyn_predict(const DynamicsModel& model,
                                std::span<const double> state_norm,
                                std::span<const double> action_norm) {
  Array2 in(1, model.obs_dim + model.act_dim);
  std::copy(state_norm.begin(), state_norm.end(), &in(0, 0));
  std::copy(action_norm.begin(), action_norm.end(), &in(0, model.obs_dim));
  Array2 res = mlp_forward(model.net, in);
  std::vector<double> out(model.obs_dim);
  for (int k = 0; k < model.obs_dim; ++k) out[k] = state_norm[k] + res(0, k);
  return out;
}

namespace {

// Shared by dyn_energy and dyn_energy_grad: builds the (H-1)-row batch of
// [s_t, a_t] inputs and the residuals r_t = s_{t+1} - T(s_t, a_t).
struct DynBatch {
  Array2 inputs;     // (H-1) x (obs+act)
  Array2 residuals;  // (H-1) x obs
  ForwardCache cache;
  double energy = 0.0;
};

DynBatch eval_batch(const DynamicsModel& model, const Array2& tau,
                    bool keep_cache) {
  const int od = model.obs_dim;
  const int ad = model.act_dim;
  require_shape(tau, tau.rows, ad + od, "dyn_energy tau");
  const int h = tau.rows;
  DynBatch b{Array2(h - 1, od + ad), Array2(h - 1, od), {}, 0.0};
  for (int t = 0; t < h - 1; ++t) {
    for (int k = 0; k < od; ++k) b.inputs(t, k) = tau(t, ad + k);
    for (int k = 0; k < ad; ++k) b.inputs(t, od + k) = tau(t, k);
  }
  Array2 res = mlp_forward(model.net, b.inputs,
                           keep_cache ? &b.cache : nullptr);
  for (int t = 0; t < h - 1; ++t) {
    for (int k = 0; k < od; ++k) {
      const double r = tau(t + 1, ad + k) - (tau(t, ad + k) + res(t, k));
      b.residuals(t, k) = r;
      b.energy += r * r;
    }
  }
  return b;
}

}  // namespace

double dyn_energy(const DynamicsModel& model, const Array2& tau_norm) {
  return eval_batch(model, tau_norm, false).energy;
}

std::pair<double, Array2> dyn_energy_grad(const DynamicsModel& model,
                                          const Array2& tau_norm) {
  const int od = model.obs_dim;
  const int ad = model.act_dim;
  DynBatch b = eval_batch(model, tau_norm, true);
  const int h = tau_norm.rows;
  Array2 grad(h, ad + od);
  // dE/ds_{t+1} += 2 r_t; the network path carries -2 r_t upstream.
  Array2 upstream(h - 1, od);
  for (int t = 0; t < h - 1; ++t) {
    for (int k = 0; k < od; ++k) {
      grad(t + 1, ad + k) += 2.0 * b.residuals(t, k);
      upstream(t, k) = -2.0 * b.residuals(t, k);
    }
  }
  auto [pg, input_grad] = mlp_backward(model.net, b.cache, upstream);
  (void)pg;
  for (int t = 0; t < h - 1; ++t) {
    for (int k = 0; k < od; ++k) {
      // Residual identity path plus the network's input gradient.
      grad(t, ad + k) += -2.0 * b.residuals(t, k) + input_grad(t, k);
    }
    for (int k = 0; k < ad; ++k) {
      grad(t, k) += input_grad(t, od + k);
    }
  }
  return {b.energy, std::move(grad)};
}

void save_dynamics(const std::string& path, const DynamicsModel& model) {
  nlohmann::json j;
  j["env_id"] = model.env_id;
  j["obs_dim"] = model.obs_dim;
  j["act_dim"] = model.act_dim;
  j["holdout_mse"] = model.holdout_mse;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("save_dynamics: cannot open " + path);
  save_wrapped_mlp(out, "CDY1", j.dump(), model.net);
  if (!out) throw FormatError("save_dynamics: write failed for " + path);
}

DynamicsModel load_dynamics(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_dynamics: cannot open " + path);
  auto [header, net] = load_wrapped_mlp(in, "CDY1", "dynamics checkpoint");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dynamics checkpoint: bad header: ") +
                      e.what());
  }
  DynamicsModel m;
  m.env_id = j.at("env_id").get<std::string>();
  m.obs_dim = j.at("obs_dim").get<int>();
  m.act_dim = j.at("act_dim").get<int>();
  m.holdout_mse = j.at("holdout_mse").get<double>();
  m.net = std::move(net);
  if (m.net.input_dim() != m.obs_dim + m.act_dim ||
      m.net.output_dim() != m.obs_dim) {
    throw FormatError("dynamics checkpoint: header/network dims disagree");
  }
  return m;
}

}  // namespace contactdiff
