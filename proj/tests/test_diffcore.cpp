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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "contactdiff/adam.hpp"
#include "contactdiff/checkpoint.hpp"
#include "contactdiff/mlp.hpp"

namespace contactdiff {
namespace {

Array2 random_array(int rows, int cols, Rng& rng, double scale = 1.0) {
  Array2 a(rows, cols);
  for (double& v : a.data) v = scale * rng.gaussian();
  return a;
}

// Scalar loss used by the finite-difference checks: sum(coeffs .* output).
double probe_loss(const MlpParams& params, const Array2& input,
                  const Array2& coeffs) {
  Array2 out = mlp_forward(params, input);
  double s = 0.0;
  for (size_t k = 0; k < out.data.size(); ++k) {
    s += coeffs.data[k] * out.data[k];
  }
  return s;
}

TEST(MlpForward, IdentityLinearLayer) {
  MlpParams p;
  p.sizes = {2, 2};
  p.hidden_activation = Activation::kMish;
  Array2 w(2, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  p.weights.push_back(w);
  p.biases.push_back({0.0, 0.0});

  Array2 in(1, 2);
  in(0, 0) = 1.0;
  in(0, 1) = 2.0;
  Array2 out = mlp_forward(p, in);
  EXPECT_DOUBLE_EQ(out(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 2.0);
}

TEST(MlpForward, ZeroWeightsReturnBias) {
  Rng rng(1);
  MlpParams p = make_mlp(std::array{3, 4, 2}, rng);
  for (auto& w : p.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  p.biases[1] = {0.5, -0.25};
  // mish(0) = 0, so the hidden layer contributes nothing.
  Array2 in = random_array(5, 3, rng);
  Array2 out = mlp_forward(p, in);
  for (int r = 0; r < 5; ++r) {
    EXPECT_DOUBLE_EQ(out(r, 0), 0.5);
    EXPECT_DOUBLE_EQ(out(r, 1), -0.25);
  }
}

TEST(MlpForward, MatchesHandComputedPass) {
  // 2-3-1 net evaluated layer by layer with scalar arithmetic.
  Rng rng(42);
  MlpParams p = make_mlp(std::array{2, 3, 1}, rng);
  Array2 in(1, 2);
  in(0, 0) = 0.3;
  in(0, 1) = -0.7;
  double hidden[3];
  for (int j = 0; j < 3; ++j) {
    double z = p.biases[0][j];
    z += in(0, 0) * p.weights[0](0, j);
    z += in(0, 1) * p.weights[0](1, j);
    hidden[j] = mish(z);
  }
  double expected = p.biases[1][0];
  for (int j = 0; j < 3; ++j) expected += hidden[j] * p.weights[1](j, 0);
  Array2 out = mlp_forward(p, in);
  EXPECT_NEAR(out(0, 0), expected, 1e-14);
}

TEST(MlpForward, ShapeMismatchThrows) {
  Rng rng(3);
  MlpParams p = make_mlp(std::array{4, 8, 4}, rng);
  Array2 bad(1, 3);
  EXPECT_THROW(mlp_forward(p, bad), ShapeError);
}

TEST(MlpForward, Deterministic) {
  Rng rng(7);
  MlpParams p = make_mlp(std::array{4, 8, 4}, rng);
  Array2 in = random_array(2, 4, rng);
  Array2 a = mlp_forward(p, in);
  Array2 b = mlp_forward(p, in);
  EXPECT_EQ(a.data, b.data);
}

TEST(MlpBackward, LinearLayerGradients) {
  // y = x W, upstream g  =>  dL/dx = g W^T, dL/dW = x^T g.
  Rng rng(5);
  MlpParams p = make_mlp(std::array{3, 2}, rng);
  Array2 in = random_array(1, 3, rng);
  Array2 g = random_array(1, 2, rng);
  auto [grads, input_grad] = mlp_backward(p, in, g);
  for (int i = 0; i < 3; ++i) {
    double expect = 0.0;
    for (int j = 0; j < 2; ++j) expect += p.weights[0](i, j) * g(0, j);
    EXPECT_NEAR(input_grad(0, i), expect, 1e-14);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(grads.weights[0](i, j), in(0, i) * g(0, j), 1e-14);
    }
  }
}

TEST(MlpBackward, ZeroUpstreamGivesZeroGrads) {
  Rng rng(6);
  MlpParams p = make_mlp(std::array{4, 8, 4}, rng);
  Array2 in = random_array(3, 4, rng);
  Array2 zero(3, 4);
  auto [grads, input_grad] = mlp_backward(p, in, zero);
  EXPECT_EQ(squared_norm(input_grad), 0.0);
  for (const auto& w : grads.weights) EXPECT_EQ(squared_norm(w), 0.0);
}

// Central finite differences against parameter and input entries, over 20
// seeds. This is the contract the rest of the project leans on.
TEST(MlpBackward, MatchesFiniteDifferences) {
  constexpr double kH = 1e-5;
  constexpr double kTol = 1e-4;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    MlpParams p = make_mlp(std::array{4, 8, 4}, rng);
    Array2 in = random_array(2, 4, rng);
    Array2 coeffs = random_array(2, 4, rng);
    auto [grads, input_grad] = mlp_backward(p, in, coeffs);

    auto check = [&](double* slot, double analytic) {
      const double saved = *slot;
      *slot = saved + kH;
      const double up = probe_loss(p, in, coeffs);
      *slot = saved - kH;
      const double down = probe_loss(p, in, coeffs);
      *slot = saved;
      const double fd = (up - down) / (2.0 * kH);
      const double denom = std::max({std::fabs(fd), std::fabs(analytic), 1e-8});
      EXPECT_LT(std::fabs(fd - analytic) / denom, kTol)
          << "seed " << seed << " fd=" << fd << " analytic=" << analytic;
    };

    for (size_t l = 0; l < p.weights.size(); ++l) {
      for (size_t k = 0; k < p.weights[l].data.size(); k += 7) {
        check(&p.weights[l].data[k], grads.weights[l].data[k]);
      }
      for (size_t k = 0; k < p.biases[l].size(); ++k) {
        check(&p.biases[l][k], grads.biases[l][k]);
      }
    }
    for (size_t k = 0; k < in.data.size(); ++k) {
      check(&in.data[k], input_grad.data[k]);
    }
  }
}

TEST(Adam, ZeroGradientLeavesParams) {
  Rng rng(9);
  MlpParams p = make_mlp(std::array{3, 5, 2}, rng);
  MlpParams before = p;
  AdamState st = make_adam(p);
  adam_step(st, p, zeros_like(p));
  EXPECT_EQ(st.step, 1);
  for (size_t l = 0; l < p.weights.size(); ++l) {
    EXPECT_EQ(p.weights[l].data, before.weights[l].data);
  }
}

TEST(Adam, FirstStepClosedForm) {
  // With zero moments the bias-corrected first step is
  // -lr * g / (|g| + eps).
  Rng rng(10);
  MlpParams p = make_mlp(std::array{2, 2}, rng);
  MlpParams before = p;
  MlpParams g = zeros_like(p);
  for (double& v : g.weights[0].data) v = rng.gaussian();
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  AdamState st = make_adam(p, cfg);
  adam_step(st, p, g);
  for (size_t k = 0; k < g.weights[0].data.size(); ++k) {
    const double grad = g.weights[0].data[k];
    const double expected = before.weights[0].data[k] -
                            cfg.learning_rate * grad /
                                (std::fabs(grad) + cfg.epsilon);
    EXPECT_NEAR(p.weights[0].data[k], expected, 1e-12);
  }
}

TEST(Adam, ConstantGradientMovesAgainstSign) {
  Rng rng(11);
  MlpParams p = make_mlp(std::array{2, 2}, rng);
  MlpParams before = p;
  MlpParams g = zeros_like(p);
  for (double& v : g.weights[0].data) v = 0.5;
  AdamState st = make_adam(p);
  for (int i = 0; i < 50; ++i) adam_step(st, p, g);
  for (size_t k = 0; k < p.weights[0].data.size(); ++k) {
    EXPECT_LT(p.weights[0].data[k], before.weights[0].data[k]);
  }
}

TEST(Checkpoint, RoundTrip) {
  Rng rng(12);
  MlpParams p = make_mlp(std::array{4, 8, 4}, rng);
  std::stringstream ss;
  save_mlp(ss, p);
  MlpParams q = load_mlp(ss);
  ASSERT_EQ(p.sizes, q.sizes);
  for (size_t l = 0; l < p.weights.size(); ++l) {
    EXPECT_EQ(p.weights[l].data, q.weights[l].data);
    EXPECT_EQ(p.biases[l], q.biases[l]);
  }
}

TEST(Checkpoint, BadMagicThrows) {
  std::stringstream ss;
  ss << "NOPE" << std::string(64, '\0');
  EXPECT_THROW(load_mlp(ss), FormatError);
}

TEST(Checkpoint, TruncatedThrows) {
  Rng rng(13);
  MlpParams p = make_mlp(std::array{4, 8, 4}, rng);
  std::stringstream ss;
  save_mlp(ss, p);
  std::string bytes = ss.str();
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_mlp(cut), FormatError);
}

TEST(Rng, DeterministicStreams) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.gaussian(), b.gaussian());
  Rng c(124);
  Rng a2(123);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs |= a2.gaussian() != c.gaussian();
  EXPECT_TRUE(differs);
}

}  // namespace
}  // namespace contactdiff
