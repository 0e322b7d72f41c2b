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

#include "contactdiff/schedule.hpp"

#include <cmath>

namespace contactdiff {

namespace {

constexpr double kCosineS = 0.008;
constexpr double kBetaMax = 0.999;
constexpr double kBetaMin = 1e-8;

double cosine_abar(double x) {
  double c = std::cos((x + kCosineS) / (1.0 + kCosineS) * M_PI / 2.0);
  return c * c;
}

}  // namespace

NoiseSchedule make_schedule(int steps, ScheduleKind kind) {
  if (steps < 2) throw ShapeError("make_schedule: N must be >= 2");
  NoiseSchedule s;
  s.steps = steps;
  s.beta.resize(steps);

  // Target abar(i) curve, then beta_i = 1 - abar(i)/abar(i-1) with clipping;
  // abar is rebuilt from the clipped betas so the tables stay consistent.
  double prev = 1.0;
  for (int i = 1; i <= steps; ++i) {
    double target;
    if (kind == ScheduleKind::kCosine) {
      target = cosine_abar(double(i) / steps) / cosine_abar(0.0);
    } else {
      target = 1.0 - 0.99 * double(i) / steps;  // linear decay to 0.01
    }
    double beta = 1.0 - target / prev;
    if (beta < kBetaMin) beta = kBetaMin;
    if (beta > kBetaMax) beta = kBetaMax;
    s.beta[i - 1] = beta;
    prev = target;
  }

  s.alpha.resize(steps);
  s.alpha_bar.resize(steps);
  s.posterior_variance.resize(steps);
  s.mean_x0_coeff.resize(steps);
  s.mean_xi_coeff.resize(steps);
  double abar = 1.0;
  for (int k = 0; k < steps; ++k) {
    const double abar_prev = abar;
    s.alpha[k] = 1.0 - s.beta[k];
    abar *= s.alpha[k];
    s.alpha_bar[k] = abar;
    const double denom = 1.0 - abar;
    s.posterior_variance[k] = s.beta[k] * (1.0 - abar_prev) / denom;
    s.mean_x0_coeff[k] = std::sqrt(abar_prev) * s.beta[k] / denom;
    s.mean_xi_coeff[k] = std::sqrt(s.alpha[k]) * (1.0 - abar_prev) / denom;
  }
  return s;
}

Array2 q_sample(const NoiseSchedule& sched, const Array2& x0, int i,
                const Array2& noise) {
  if (i < 1 || i > sched.steps) {
    throw ShapeError("q_sample: step " + std::to_string(i) +
                     " outside [1, " + std::to_string(sched.steps) + "]");
  }
  if (!x0.same_shape(noise)) throw ShapeError("q_sample: noise shape mismatch");
  const double a = std::sqrt(sched.abar(i));
  const double b = std::sqrt(1.0 - sched.abar(i));
  Array2 out(x0.rows, x0.cols);
  for (size_t k = 0; k < out.data.size(); ++k) {
    out.data[k] = a * x0.data[k] + b * noise.data[k];
  }
  return out;
}

Array2 posterior_step(const NoiseSchedule& sched, const Array2& x0_hat,
                      const Array2& x_i, int i, double alpha_scale,
                      const Array2* guidance, Rng& rng) {
  if (i < 1 || i > sched.steps) {
    throw ShapeError("posterior_step: step " + std::to_string(i) +
                     " outside [1, " + std::to_string(sched.steps) + "]");
  }
  if (!x0_hat.same_shape(x_i)) {
    throw ShapeError("posterior_step: x0_hat/x_i shape mismatch");
  }
  if (guidance) {
    if (!guidance->same_shape(x_i)) {
      throw ShapeError("posterior_step: guidance shape mismatch");
    }
    if (!all_finite(*guidance)) {
      throw GuidanceError("posterior_step: non-finite guidance gradient");
    }
  }
  const int k = i - 1;
  const double c0 = sched.mean_x0_coeff[k];
  const double ci = sched.mean_xi_coeff[k];
  const double var = sched.posterior_variance[k];
  const double sd = std::sqrt(var);
  Array2 out(x_i.rows, x_i.cols);
  for (size_t n = 0; n < out.data.size(); ++n) {
    double mean = c0 * x0_hat.data[n] + ci * x_i.data[n];
    if (guidance) mean += alpha_scale * var * guidance->data[n];
    out.data[n] = (i > 1) ? mean + sd * rng.gaussian() : mean;
  }
  return out;
}

}  // namespace contactdiff
