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

#ifndef CONTACTDIFF_MLP_HPP_
#define CONTACTDIFF_MLP_HPP_

#include <span>
#include <utility>
#include <vector>

#include "contactdiff/array.hpp"
#include "contactdiff/rng.hpp"

namespace contactdiff {

// Hidden nonlinearity. Mish is smooth everywhere, which keeps the analytic
// backward pass exact under finite-difference checks.
enum class Activation { kMish, kIdentity };

double mish(double x);
double mish_grad(double x);

// Fully-connected network parameters. weights[l] has shape
// sizes[l] x sizes[l+1] (inputs are row vectors, y = x W + b).
struct MlpParams {
  std::vector<int> sizes;
  std::vector<Array2> weights;
  std::vector<std::vector<double>> biases;
  Activation hidden_activation = Activation::kMish;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  size_t parameter_count() const;
};

// He-scaled gaussian init.
MlpParams make_mlp(std::span<const int> sizes, Rng& rng,
                   Activation act = Activation::kMish,
                   double init_scale = 1.0);

// Zero-valued parameter set with the same shapes (gradient accumulators,
// Adam moments).
MlpParams zeros_like(const MlpParams& params);

// Per-layer pre-activations and inputs kept for the backward pass.
struct ForwardCache {
  std::vector<Array2> inputs;  // input to each layer (batch x sizes[l])
  std::vector<Array2> pre;     // pre-activation of each layer
};

// Batched forward pass: input is batch x input_dim.
Array2 mlp_forward(const MlpParams& params, const Array2& input,
                   ForwardCache* cache = nullptr);

// Gradients of sum(upstream .* output) w.r.t. parameters and input.
// `cache` must come from mlp_forward on the same (params, input).
std::pair<MlpParams, Array2> mlp_backward(const MlpParams& params,
                                          const ForwardCache& cache,
                                          const Array2& upstream);

// Convenience overload that reruns the forward pass internally.
std::pair<MlpParams, Array2> mlp_backward(const MlpParams& params,
                                          const Array2& input,
                                          const Array2& upstream);

bool all_finite(const MlpParams& params);

}  // namespace contactdiff

#endif  // CONTACTDIFF_MLP_HPP_
