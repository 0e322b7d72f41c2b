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

#include "contactdiff/mlp.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace contactdiff {

namespace {

using MatMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                   Eigen::Dynamic,
                                                   Eigen::RowMajor>>;

ConstMatMap map(const Array2& a) { return {a.data.data(), a.rows, a.cols}; }
MatMap map(Array2& a) { return {a.data.data(), a.rows, a.cols}; }

double softplus(double x) {
  if (x > 20.0) return x;
  if (x < -20.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

}  // namespace

double mish(double x) { return x * std::tanh(softplus(x)); }

double mish_grad(double x) {
  double sp = softplus(x);
  double t = std::tanh(sp);
  double sig = 1.0 / (1.0 + std::exp(-x));
  return t + x * (1.0 - t * t) * sig;
}

size_t MlpParams::parameter_count() const {
  size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

MlpParams make_mlp(std::span<const int> sizes, Rng& rng, Activation act,
                   double init_scale) {
  if (sizes.size() < 2) throw ShapeError("make_mlp: need at least two sizes");
  MlpParams p;
  p.sizes.assign(sizes.begin(), sizes.end());
  p.hidden_activation = act;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    Array2 w(sizes[l], sizes[l + 1]);
    double scale = init_scale * std::sqrt(2.0 / sizes[l]);
    for (double& v : w.data) v = scale * rng.gaussian();
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(sizes[l + 1], 0.0);
  }
  return p;
}

MlpParams zeros_like(const MlpParams& params) {
  MlpParams z;
  z.sizes = params.sizes;
  z.hidden_activation = params.hidden_activation;
  for (const auto& w : params.weights) z.weights.emplace_back(w.rows, w.cols);
  for (const auto& b : params.biases) z.biases.emplace_back(b.size(), 0.0);
  return z;
}

Array2 mlp_forward(const MlpParams& params, const Array2& input,
                   ForwardCache* cache) {
  if (input.cols != params.input_dim()) {
    throw ShapeError("mlp_forward: input has " + std::to_string(input.cols) +
                     " columns, layer expects " +
                     std::to_string(params.input_dim()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Array2 h = input;
  const int layers = int(params.weights.size());
  for (int l = 0; l < layers; ++l) {
    Array2 z(h.rows, params.sizes[l + 1]);
    map(z).noalias() = map(h) * map(params.weights[l]);
    for (int r = 0; r < z.rows; ++r) {
      for (int c = 0; c < z.cols; ++c) z(r, c) += params.biases[l][c];
    }
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(z);
    }
    if (l + 1 < layers && params.hidden_activation == Activation::kMish) {
      for (double& v : z.data) v = mish(v);
    }
    h = std::move(z);
  }
  return h;
}

std::pair<MlpParams, Array2> mlp_backward(const MlpParams& params,
                                          const ForwardCache& cache,
                                          const Array2& upstream) {
  const int layers = int(params.weights.size());
  if (int(cache.inputs.size()) != layers) {
    throw ShapeError("mlp_backward: cache does not match network depth");
  }
  MlpParams grads = zeros_like(params);
  Array2 delta = upstream;
  require_shape(delta, cache.pre.back().rows, params.output_dim(),
                "mlp_backward upstream");
  for (int l = layers - 1; l >= 0; --l) {
    // dL/dW = x^T delta, dL/db = column sums of delta
    map(grads.weights[l]).noalias() =
        map(cache.inputs[l]).transpose() * map(delta);
    for (int r = 0; r < delta.rows; ++r) {
      for (int c = 0; c < delta.cols; ++c) grads.biases[l][c] += delta(r, c);
    }
    Array2 prev(delta.rows, params.sizes[l]);
    map(prev).noalias() = map(delta) * map(params.weights[l]).transpose();
    if (l > 0 && params.hidden_activation == Activation::kMish) {
      const Array2& z = cache.pre[l - 1];
      for (size_t i = 0; i < prev.data.size(); ++i) {
        prev.data[i] *= mish_grad(z.data[i]);
      }
    }
    delta = std::move(prev);
  }
  return {std::move(grads), std::move(delta)};
}

std::pair<MlpParams, Array2> mlp_backward(const MlpParams& params,
                                          const Array2& input,
                                          const Array2& upstream) {
  ForwardCache cache;
  mlp_forward(params, input, &cache);
  return mlp_backward(params, cache, upstream);
}

bool all_finite(const MlpParams& params) {
  for (const auto& w : params.weights) {
    if (!all_finite(w)) return false;
  }
  for (const auto& b : params.biases) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace contactdiff
