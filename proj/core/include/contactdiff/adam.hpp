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

#ifndef CONTACTDIFF_ADAM_HPP_
#define CONTACTDIFF_ADAM_HPP_

#include <cstdint>

#include "contactdiff/mlp.hpp"

namespace contactdiff {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  int64_t step = 0;
  MlpParams first_moment;
  MlpParams second_moment;
};

AdamState make_adam(const MlpParams& params, const AdamConfig& config = {});

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads);

}  // namespace contactdiff

#endif  // CONTACTDIFF_ADAM_HPP_
