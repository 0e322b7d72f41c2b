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

#ifndef CONTACTDIFF_SCHEDULE_HPP_
#define CONTACTDIFF_SCHEDULE_HPP_

#include <vector>

#include "contactdiff/array.hpp"
#include "contactdiff/rng.hpp"

namespace contactdiff {

enum class ScheduleKind { kCosine, kLinear };

// Diffusion noise schedule plus the Gaussian posterior tables used by the
// reverse process. Index 0 of each table corresponds to step i = 1.
struct NoiseSchedule {
  int steps = 0;  // N
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  std::vector<double> posterior_variance;  // Sigma_i (isotropic, scalar)
  std::vector<double> mean_x0_coeff;       // c0_i, multiplies tau_hat_0
  std::vector<double> mean_xi_coeff;       // ci_i, multiplies tau_i

  double abar(int i) const { return alpha_bar[i - 1]; }
  double sigma(int i) const { return posterior_variance[i - 1]; }
};

// Cosine (default, s = 0.008) or linear-in-alpha_bar schedule. N >= 2.
NoiseSchedule make_schedule(int steps, ScheduleKind kind = ScheduleKind::kCosine);

// Forward noising: sqrt(abar_i) * x0 + sqrt(1 - abar_i) * noise.
Array2 q_sample(const NoiseSchedule& sched, const Array2& x0, int i,
                const Array2& noise);

// One guided reverse step: sample from N(mu + alpha_scale * Sigma_i * g,
// Sigma_i) where mu is the DDPM posterior mean of (x0_hat, x_i). At i = 1
// the mean is returned without noise. Pass guidance = nullptr for an
// unguided step.
Array2 posterior_step(const NoiseSchedule& sched, const Array2& x0_hat,
                      const Array2& x_i, int i, double alpha_scale,
                      const Array2* guidance, Rng& rng);

}  // namespace contactdiff

#endif  // CONTACTDIFF_SCHEDULE_HPP_
