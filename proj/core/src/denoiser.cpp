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

#include "contactdiff/denoiser.hpp"

#include <cmath>
#include <fstream>

#include "contactdiff/adam.hpp"
#include "contactdiff/checkpoint.hpp"

#include "json.hpp"

namespace contactdiff {

namespace {

void write_embedding(double* dst, int step, int schedule_steps, int dim) {
  const double u = double(step) / double(schedule_steps);
  for (int j = 0; j < dim / 2; ++j) {
    const double freq = M_PI * std::pow(2.0, double(j));
    dst[2 * j] = std::sin(freq * u);
    dst[2 * j + 1] = std::cos(freq * u);
  }
}

// Assembles one input row: [flat tau | step embed | cond block].
void write_input_row(const DenoiserModel& model, double* row,
                     const double* tau_flat, int step,
                     std::span<const double> cond) {
  const auto& cfg = model.config;
  std::copy(tau_flat, tau_flat + cfg.flat_dim(), row);
  write_embedding(row + cfg.flat_dim(), step, cfg.schedule_steps,
                  cfg.step_embed_dim);
  if (cfg.cond_dim > 0) {
    double* c = row + cfg.flat_dim() + cfg.step_embed_dim;
    if (cond.empty()) {
      std::fill(c, c + cfg.cond_dim + 1, 0.0);
    } else {
      if (int(cond.size()) != cfg.cond_dim) {
        throw ShapeError("denoiser: condition has wrong dimension");
      }
      for (int k = 0; k < cfg.cond_dim; ++k) {
        c[k] = (cond[k] - model.cond_offset[k]) / model.cond_scale[k];
      }
      c[cfg.cond_dim] = 1.0;
    }
  }
}

}  // namespace

std::vector<double> step_embedding(int step, int schedule_steps, int dim) {
  std::vector<double> out(dim);
  write_embedding(out.data(), step, schedule_steps, dim);
  return out;
}

DenoiserModel train_denoiser(
    const std::vector<Array2>& windows, const DenoiserConfig& config,
    const DenoiserTrainConfig& train,
    const std::vector<std::vector<double>>& conds,
    std::vector<std::pair<int64_t, double>>* loss_log) {
  if (windows.empty()) throw TrainError("train_denoiser: empty dataset");
  if (config.cond_dim > 0 && conds.size() != windows.size()) {
    throw ShapeError("train_denoiser: conds must match windows");
  }
  for (const auto& w : windows) {
    require_shape(w, config.horizon, config.traj_dim(), "train_denoiser window");
  }

  Rng rng(train.seed);
  DenoiserModel model;
  model.config = config;
  std::vector<int> sizes = {config.input_dim()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(config.flat_dim());
  model.net = make_mlp(sizes, rng);

  if (config.cond_dim > 0) {
    model.cond_offset.assign(config.cond_dim, 0.0);
    model.cond_scale.assign(config.cond_dim, 1.0);
    for (int k = 0; k < config.cond_dim; ++k) {
      double sum = 0.0;
      for (const auto& c : conds) sum += c[k];
      const double mean = sum / double(conds.size());
      double var = 0.0;
      for (const auto& c : conds) var += (c[k] - mean) * (c[k] - mean);
      model.cond_offset[k] = mean;
      model.cond_scale[k] = std::sqrt(var / double(conds.size())) + 1e-9;
    }
  }

  const NoiseSchedule sched =
      make_schedule(config.schedule_steps, train.schedule);
  AdamState opt = make_adam(model.net, {.learning_rate = train.learning_rate});

  const int flat = config.flat_dim();
  const int in_dim = config.input_dim();
  Array2 batch_in(train.batch, in_dim);
  Array2 target(train.batch, flat);

  for (int64_t step = 0; step < train.steps; ++step) {
    for (int b = 0; b < train.batch; ++b) {
      const size_t idx = rng.next_index(windows.size());
      const Array2& w = windows[idx];
      const int i = 1 + int(rng.next_index(uint64_t(config.schedule_steps)));
      const double a = std::sqrt(sched.abar(i));
      const double s = std::sqrt(1.0 - sched.abar(i));
      double* row = &batch_in(b, 0);
      for (int k = 0; k < flat; ++k) {
        target(b, k) = w.data[k];
        row[k] = a * w.data[k] + s * rng.gaussian();
      }
      if (train.inpaint_first_state) {
        for (int k = config.act_dim; k < config.traj_dim(); ++k) {
          row[k] = w.data[k];
        }
      }
      write_embedding(row + flat, i, config.schedule_steps,
                      config.step_embed_dim);
      if (config.cond_dim > 0) {
        double* c = row + flat + config.step_embed_dim;
        if (rng.uniform() < train.cond_dropout) {
          std::fill(c, c + config.cond_dim + 1, 0.0);
        } else {
          for (int k = 0; k < config.cond_dim; ++k) {
            c[k] = (conds[idx][k] - model.cond_offset[k]) / model.cond_scale[k];
          }
          c[config.cond_dim] = 1.0;
        }
      }
    }

    ForwardCache cache;
    Array2 pred = mlp_forward(model.net, batch_in, &cache);
    double loss = 0.0;
    Array2 upstream(pred.rows, pred.cols);
    const double inv = 1.0 / double(pred.size());
    for (size_t k = 0; k < pred.data.size(); ++k) {
      const double diff = pred.data[k] - target.data[k];
      loss += diff * diff;
      upstream.data[k] = 2.0 * diff * inv;
    }
    loss *= inv;
    if (!std::isfinite(loss)) {
      throw TrainError("train_denoiser: loss diverged at step " +
                       std::to_string(step));
    }
    if (loss_log && (step % 100 == 0 || step + 1 == train.steps)) {
      loss_log->emplace_back(step, loss);
    }
    auto [grads, input_grad] = mlp_backward(model.net, cache, upstream);
    (void)input_grad;
    adam_step(opt, model.net, grads);
  }
  if (!all_finite(model.net)) {
    throw TrainError("train_denoiser: non-finite parameters after training");
  }
  return model;
}

Array2 predict_x0(const DenoiserModel& model, const Array2& tau, int step,
                  std::span<const double> cond) {
  const auto& cfg = model.config;
  require_shape(tau, cfg.horizon, cfg.traj_dim(), "predict_x0 tau");
  if (step < 1 || step > cfg.schedule_steps) {
    throw ShapeError("predict_x0: step out of range");
  }
  Array2 in(1, cfg.input_dim());
  write_input_row(model, &in(0, 0), tau.data.data(), step, cond);
  Array2 flat = mlp_forward(model.net, in);
  Array2 out(cfg.horizon, cfg.traj_dim());
  out.data = std::move(flat.data);
  return out;
}

Array2 cf_compose(const DenoiserModel& model, const Array2& tau, int step,
                  std::span<const double> cond, double omega) {
  if (model.config.cond_dim == 0) {
    throw ConfigError("cf_compose: model was trained unconditionally");
  }
  const auto& cfg = model.config;
  require_shape(tau, cfg.horizon, cfg.traj_dim(), "cf_compose tau");
  // One batched forward with the null row and the conditioned row.
  Array2 in(2, cfg.input_dim());
  write_input_row(model, &in(0, 0), tau.data.data(), step, {});
  write_input_row(model, &in(1, 0), tau.data.data(), step, cond);
  Array2 flat = mlp_forward(model.net, in);
  Array2 out(cfg.horizon, cfg.traj_dim());
  for (int k = 0; k < cfg.flat_dim(); ++k) {
    const double u = flat(0, k);
    out.data[k] = u + omega * (flat(1, k) - u);
  }
  return out;
}

void save_denoiser(const std::string& path, const DenoiserArtifact& artifact) {
  nlohmann::json j;
  j["env_id"] = artifact.env_id;
  j["horizon"] = artifact.model.config.horizon;
  j["act_dim"] = artifact.model.config.act_dim;
  j["obs_dim"] = artifact.model.config.obs_dim;
  j["schedule_steps"] = artifact.model.config.schedule_steps;
  j["cond_dim"] = artifact.model.config.cond_dim;
  j["step_embed_dim"] = artifact.model.config.step_embed_dim;
  j["hidden"] = artifact.model.config.hidden;
  j["cond_offset"] = artifact.model.cond_offset;
  j["cond_scale"] = artifact.model.cond_scale;
  j["normalizer_offset"] = artifact.normalizer.offset;
  j["normalizer_scale"] = artifact.normalizer.scale;
  j["sigma"] = artifact.sigma;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("save_denoiser: cannot open " + path);
  save_wrapped_mlp(out, "CDN1", j.dump(), artifact.model.net);
  if (!out) throw FormatError("save_denoiser: write failed for " + path);
}

DenoiserArtifact load_denoiser(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_denoiser: cannot open " + path);
  auto [header, net] = load_wrapped_mlp(in, "CDN1", "denoiser checkpoint");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("denoiser checkpoint: bad header: ") +
                      e.what());
  }
  DenoiserArtifact a;
  a.env_id = j.at("env_id").get<std::string>();
  a.model.config.horizon = j.at("horizon").get<int>();
  a.model.config.act_dim = j.at("act_dim").get<int>();
  a.model.config.obs_dim = j.at("obs_dim").get<int>();
  a.model.config.schedule_steps = j.at("schedule_steps").get<int>();
  a.model.config.cond_dim = j.at("cond_dim").get<int>();
  a.model.config.step_embed_dim = j.at("step_embed_dim").get<int>();
  a.model.config.hidden = j.at("hidden").get<std::vector<int>>();
  a.model.cond_offset = j.at("cond_offset").get<std::vector<double>>();
  a.model.cond_scale = j.at("cond_scale").get<std::vector<double>>();
  a.model.net = std::move(net);
  a.normalizer.act_dim = a.model.config.act_dim;
  a.normalizer.obs_dim = a.model.config.obs_dim;
  a.normalizer.offset = j.at("normalizer_offset").get<std::vector<double>>();
  a.normalizer.scale = j.at("normalizer_scale").get<std::vector<double>>();
  a.sigma = j.at("sigma").get<std::vector<double>>();
  if (a.model.net.input_dim() != a.model.config.input_dim()) {
    throw FormatError("denoiser checkpoint: header/network dims disagree");
  }
  return a;
}

}  // namespace contactdiff
