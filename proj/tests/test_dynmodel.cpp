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
#include <filesystem>

#include <gtest/gtest.h>

#include "contactdiff/dynmodel.hpp"

namespace contactdiff {
namespace {

// One small trained model shared across the suite.
class DynDoor : public ::testing::Test {
 protected:
  static DemoSet* demos_;
  static Normalizer* norm_;
  static DynamicsModel* model_;

  static void SetUpTestSuite() {
    EnvSpec spec = make_env_spec("door1d");
    CollectConfig cc;
    cc.episodes = 12;
    cc.seed = 99;
    demos_ = new DemoSet(collect_demos(spec, cc));
    norm_ = new Normalizer(fit_normalizer(*demos_));
    DynTrainConfig dc;
    dc.steps = 4000;
    dc.batch = 64;
    dc.seed = 3;
    dc.hidden = {64, 64};
    model_ = new DynamicsModel(train_dynamics(*demos_, *norm_, dc));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete norm_;
    delete demos_;
  }
};

DemoSet* DynDoor::demos_ = nullptr;
Normalizer* DynDoor::norm_ = nullptr;
DynamicsModel* DynDoor::model_ = nullptr;

TEST_F(DynDoor, HoldoutMseSmall) {
  EXPECT_LE(model_->holdout_mse, 5e-3);
}

TEST_F(DynDoor, ContactFreeTransitionPredicted) {
  EnvSpec spec = make_env_spec("door1d");
  EnvState s = {0.2, 0.1, 0.0, 0.0, 1.0};  // far from the handle
  std::vector<double> a = {0.04, 0.0};
  EnvState truth = env_step(spec, s, a);
  std::vector<double> sn = norm_->normalize_state(s);
  std::vector<double> an(2);
  for (int k = 0; k < 2; ++k) an[k] = (a[k] - norm_->offset[k]) / norm_->scale[k];
  std::vector<double> pred_n = dyn_predict(*model_, sn, an);
  std::vector<double> pred = norm_->denormalize_state(pred_n);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(pred[k], truth[k], 0.02);
}

TEST_F(DynDoor, ZeroActionKeepsState) {
  // A held configuration (door at the goal, hand on the handle): idle
  // actions at such states are demonstrated by the hold phase.
  const double hinge = M_PI / 2.0;
  EnvState s = {1.0 - 0.5 * hinge, 0.9, M_PI / 2.0, hinge, 1.0 - 0.5 * hinge};
  std::vector<double> a = {0.0, 0.0};
  std::vector<double> sn = norm_->normalize_state(s);
  std::vector<double> an(2);
  for (int k = 0; k < 2; ++k) an[k] = (a[k] - norm_->offset[k]) / norm_->scale[k];
  std::vector<double> pred = norm_->denormalize_state(dyn_predict(*model_, sn, an));
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(pred[k], s[k], 0.03);
}

TEST_F(DynDoor, SelfRolledTrajectoryHasZeroEnergy) {
  // Build tau by rolling the model itself: residuals are identically zero.
  const int h = 6;
  Array2 tau(h, 7);
  Rng rng(5);
  std::vector<double> s = norm_->normalize_state(
      std::vector<double>{0.3, 0.1, 0.2, 0.1, 0.95});
  for (int t = 0; t < h; ++t) {
    std::vector<double> a_norm = {rng.uniform(-0.5, 0.5),
                                  rng.uniform(-0.5, 0.5)};
    tau(t, 0) = a_norm[0];
    tau(t, 1) = a_norm[1];
    for (int k = 0; k < 5; ++k) tau(t, 2 + k) = s[k];
    s = dyn_predict(*model_, s, a_norm);
  }
  auto [energy, grad] = dyn_energy_grad(*model_, tau);
  EXPECT_NEAR(energy, 0.0, 1e-20);
  EXPECT_NEAR(squared_norm(grad), 0.0, 1e-18);
}

TEST_F(DynDoor, PerturbationRaisesEnergyQuadratically) {
  const int h = 4;
  Array2 tau(h, 7);
  Rng rng(6);
  std::vector<double> s = norm_->normalize_state(
      std::vector<double>{0.0, 0.0, 0.0, 0.0, 1.0});
  for (int t = 0; t < h; ++t) {
    std::vector<double> a_norm = {0.2, 0.0};
    tau(t, 0) = a_norm[0];
    tau(t, 1) = a_norm[1];
    for (int k = 0; k < 5; ++k) tau(t, 2 + k) = s[k];
    s = dyn_predict(*model_, s, a_norm);
  }
  const double base = dyn_energy(*model_, tau);
  const double delta = 0.1;
  tau(2, 2 + 3) += delta;  // perturb one next-state entry
  const double bumped = dyn_energy(*model_, tau);
  // The perturbed entry appears once as s_{t+1} (exactly +delta^2) and once
  // as an input to the next prediction (small model-dependent change).
  EXPECT_NEAR(bumped - base, delta * delta, 0.3 * delta * delta);
}

TEST_F(DynDoor, GradientMatchesFiniteDifferences) {
  constexpr double kH = 1e-5;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Array2 tau(5, 7);
    for (double& v : tau.data) v = 0.7 * rng.gaussian();
    auto [energy, grad] = dyn_energy_grad(*model_, tau);
    (void)energy;
    Array2 probe = tau;
    for (size_t k = 0; k < tau.data.size(); ++k) {
      probe.data[k] = tau.data[k] + kH;
      const double up = dyn_energy(*model_, probe);
      probe.data[k] = tau.data[k] - kH;
      const double down = dyn_energy(*model_, probe);
      probe.data[k] = tau.data[k];
      const double fd = (up - down) / (2.0 * kH);
      const double denom =
          std::max({std::fabs(fd), std::fabs(grad.data[k]), 1e-8});
      EXPECT_LT(std::fabs(fd - grad.data[k]) / denom, 1e-4)
          << "seed " << seed << " entry " << k;
    }
  }
}

TEST_F(DynDoor, CheckpointRoundTrip) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "cd_dyn.ckpt").string();
  save_dynamics(path, *model_);
  DynamicsModel loaded = load_dynamics(path);
  EXPECT_EQ(loaded.env_id, model_->env_id);
  EXPECT_EQ(loaded.holdout_mse, model_->holdout_mse);
  EXPECT_EQ(loaded.net.weights[0].data, model_->net.weights[0].data);
  std::filesystem::remove(path);
}

TEST(DynDeterminism, SameSeedSameModel) {
  EnvSpec spec = make_env_spec("hammer1d");
  CollectConfig cc;
  cc.episodes = 4;
  cc.seed = 5;
  DemoSet demos = collect_demos(spec, cc);
  Normalizer norm = fit_normalizer(demos);
  DynTrainConfig dc;
  dc.steps = 300;
  dc.hidden = {32};
  dc.seed = 9;
  DynamicsModel a = train_dynamics(demos, norm, dc);
  DynamicsModel b = train_dynamics(demos, norm, dc);
  EXPECT_EQ(a.net.weights[0].data, b.net.weights[0].data);
  EXPECT_EQ(a.holdout_mse, b.holdout_mse);
}

}  // namespace
}  // namespace contactdiff
