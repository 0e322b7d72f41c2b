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

#include "contactdiff/adam.hpp"

#include <cmath>

namespace contactdiff {

namespace {

void update_span(double* p, double* m, double* v, const double* g, size_t n,
                 const AdamConfig& c, double bc1, double bc2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    p[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

}  // namespace

AdamState make_adam(const MlpParams& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  s.first_moment = zeros_like(params);
  s.second_moment = zeros_like(params);
  return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads) {
  if (grads.sizes != params.sizes) {
    throw ShapeError("adam_step: gradient shapes do not match parameters");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.config.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.config.beta2, double(state.step));
  for (size_t l = 0; l < params.weights.size(); ++l) {
    update_span(params.weights[l].data.data(),
                state.first_moment.weights[l].data.data(),
                state.second_moment.weights[l].data.data(),
                grads.weights[l].data.data(), params.weights[l].size(),
                state.config, bc1, bc2);
    update_span(params.biases[l].data(), state.first_moment.biases[l].data(),
                state.second_moment.biases[l].data(), grads.biases[l].data(),
                params.biases[l].size(), state.config, bc1, bc2);
  }
}

}  // namespace contactdiff
