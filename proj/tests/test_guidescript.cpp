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
#include <fstream>

#include <gtest/gtest.h>

#include "contactdiff/guidance.hpp"
#include "contactdiff/guidescript.hpp"
#include "contactdiff/llm.hpp"

namespace contactdiff {
namespace {

namespace gs = guidescript;

gs::DslContext door_ctx(int horizon = 8) {
  gs::DslContext ctx;
  ctx.horizon = horizon;
  ctx.obs_dim = 5;
  ctx.act_dim = 2;
  return ctx;
}

Array2 random_traj(int h, int d, Rng& rng, double scale = 1.0) {
  Array2 tau(h, d);
  for (double& v : tau.data) v = scale * rng.gaussian();
  return tau;
}

TEST(Parse, SpecSmokeExample) {
  gs::Program p = gs::parse("goal: mean_t(norm2(obs[t, 3:4] - 1.5708))");
  ASSERT_EQ(p.terms.size(), 1u);
  EXPECT_EQ(p.terms[0].name, "goal");
  EXPECT_EQ(p.terms[0].weight, 1.0);
}

TEST(Parse, WeightsAndAdaptiveMarkers) {
  gs::Program p = gs::parse(
      "a @ 8: norm2(obs[0, 1])\n"
      "b ~ 12: norm2(obs[0, 2])\n");
  EXPECT_EQ(p.terms[0].weight, 8.0);
  EXPECT_TRUE(p.terms[1].adaptive);
  EXPECT_EQ(p.terms[1].adaptive_target, 12.0);
}

TEST(Parse, UnbalancedParenPositionsError) {
  try {
    gs::parse("goal: mean_t(norm2(obs[t, 3] - 1.0)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 1);
    EXPECT_EQ(e.column, 36);  // where ')' was expected
    ASSERT_FALSE(e.expected.empty());
    EXPECT_EQ(e.expected[0], "')'");
  }
}

TEST(Parse, CommentsAndBlankLines) {
  gs::Program p = gs::parse(
      "# door guidance\n"
      "\n"
      "goal: norm2(obs[0, 3])  # final angle\n");
  EXPECT_EQ(p.terms.size(), 1u);
}

TEST(Check, ObsIndexOutOfRangeNamed) {
  gs::Program p = gs::parse("goal: mean_t(norm2(obs[t, 99]))");
  try {
    gs::check(p, door_ctx());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
  }
}

TEST(Check, TimeVarOutsideMeanT) {
  gs::Program p = gs::parse("bad: norm2(obs[t, 0])");
  EXPECT_THROW(gs::check(p, door_ctx()), ParseError);
}

TEST(Check, VectorTermRejected) {
  gs::Program p = gs::parse("bad: obs[0, 0:3]");
  EXPECT_THROW(gs::check(p, door_ctx()), ParseError);
}

TEST(Check, UnknownFunctionListsAlternatives) {
  gs::Program p = gs::parse("bad: huber(obs[0, 0])");
  try {
    gs::check(p, door_ctx());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_FALSE(e.expected.empty());
  }
}

TEST(Check, DynRequiresModel) {
  gs::Program p = gs::parse("c: dyn()");
  EXPECT_THROW(gs::check(p, door_ctx()), ParseError);
}

TEST(Print, ParseOfPrintIsFixedPoint) {
  const char* sources[] = {
      "goal @ 8: mean_t(norm2(obs[t, 3] - interp(obs[0, 3], 0.5236)))",
      "a: -(obs[0, 1] + obs[0, 2]) * 3 / (1 - obs[0, 0])",
      "b ~ 2: mask(heaviside(0.1 - abs(obs[0, 0] - obs[0, 4])), "
      "norm2(obs[0, 3] - 1))",
      "c: mean_t(norm2(obs[t+1, 2:4] - obs[t, 2:4]))\n"
      "d: softplus(clamp(act[0, 0], -1, 1)) + sqrt(abs(obs[0, 1]))",
  };
  for (const char* src : sources) {
    gs::Program p = gs::parse(src);
    const std::string printed = gs::print_program(p);
    gs::Program q = gs::parse(printed);
    EXPECT_TRUE(gs::equal(p, q)) << printed;
    EXPECT_EQ(printed, gs::print_program(q));
  }
}

TEST(Eval, ConstantProgramHasZeroGradient) {
  gs::DslContext ctx = door_ctx();
  gs::Program p = gs::load_program("c: 3.5 * 2 - 1", ctx);
  Rng rng(1);
  Array2 tau = random_traj(8, 7, rng);
  auto [value, grad] = gs::eval_grad(p, tau, ctx);
  EXPECT_DOUBLE_EQ(value, 6.0);
  EXPECT_EQ(squared_norm(grad), 0.0);
}

TEST(Eval, DivisionByZeroCarriesLocation) {
  gs::DslContext ctx = door_ctx();
  gs::Program p = gs::load_program("bad: 1 / (obs[0, 0] - obs[0, 0])", ctx);
  Array2 tau(8, 7);
  try {
    gs::eval(p, tau, ctx);
    FAIL() << "expected EvalError";
  } catch (const EvalError& e) {
    EXPECT_EQ(e.line, 1);
    EXPECT_GT(e.column, 0);
  }
}

// The DSL encoding of the built-in alignment energy evaluates identically
// to the built-in on random trajectories.
TEST(Eval, AlignParityWithBuiltin) {
  EnvSpec spec = make_env_spec("door1d");
  gs::DslContext ctx = door_ctx(8);
  gs::Program p =
      gs::load_program("align: mean_t(norm2(obs[t, 0] - obs[t, 4]))", ctx);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Array2 tau = random_traj(8, 7, rng);
    Array2 builtin_grad;
    const double builtin = align_energy(spec, tau, 1.0, &builtin_grad);
    auto [value, grad] = gs::eval_grad(p, tau, ctx);
    EXPECT_NEAR(value, builtin, 1e-9);
    for (size_t k = 0; k < grad.data.size(); ++k) {
      EXPECT_NEAR(grad.data[k], builtin_grad.data[k], 1e-6);
    }
  }
}

TEST(Eval, SoftGoalParityWithBuiltin) {
  EnvSpec spec = make_env_spec("door1d");
  gs::DslContext ctx = door_ctx(8);
  gs::Program p = gs::load_program(
      "goal: mean_t(norm2(obs[t, 3] - interp(obs[0, 3], 0.5236)))", ctx);
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Array2 tau = random_traj(8, 7, rng);
    Array2 builtin_grad;
    const double builtin = goal_energy(spec, tau, std::array{0.5236},
                                       GoalMode::kSoft, 1.0, &builtin_grad);
    auto [value, grad] = gs::eval_grad(p, tau, ctx);
    EXPECT_NEAR(value, builtin, 1e-9);
    for (size_t k = 0; k < grad.data.size(); ++k) {
      EXPECT_NEAR(grad.data[k], builtin_grad.data[k], 1e-6);
    }
  }
}

TEST(Eval, GradientMatchesFiniteDifferencesOnSmoothPrograms) {
  gs::DslContext ctx = door_ctx(6);
  const char* sources[] = {
      "a: mean_t(norm2(obs[t, 0:2] - obs[t, 3:5]))",
      "b: softplus(obs[0, 1] * act[0, 0]) + norm2(act[1, 0:2])",
      "c: mean_t(norm2(obs[t+1, 3] - obs[t, 3]))",
  };
  Rng rng(9);
  for (const char* src : sources) {
    gs::Program p = gs::load_program(src, ctx);
    for (int trial = 0; trial < 5; ++trial) {
      Array2 tau = random_traj(6, 7, rng);
      auto [value, grad] = gs::eval_grad(p, tau, ctx);
      (void)value;
      const double h = 1e-5;
      Array2 probe = tau;
      for (size_t k = 0; k < tau.data.size(); ++k) {
        probe.data[k] = tau.data[k] + h;
        const double up = gs::eval(p, probe, ctx);
        probe.data[k] = tau.data[k] - h;
        const double down = gs::eval(p, probe, ctx);
        probe.data[k] = tau.data[k];
        const double fd = (up - down) / (2.0 * h);
        const double denom =
            std::max({std::fabs(fd), std::fabs(grad.data[k]), 1e-8});
        EXPECT_LT(std::fabs(fd - grad.data[k]) / denom, 1e-4) << src;
      }
    }
  }
}

TEST(Eval, HeavisideContributesZeroGradient) {
  gs::DslContext ctx = door_ctx(4);
  gs::Program p = gs::load_program("h: heaviside(obs[0, 0] - 0.3)", ctx);
  Array2 tau(4, 7);
  tau(0, 2) = 1.0;
  auto [value, grad] = gs::eval_grad(p, tau, ctx);
  EXPECT_EQ(value, 1.0);
  EXPECT_EQ(squared_norm(grad), 0.0);
}

TEST(Eval, MaskGatesValueAndGradient) {
  gs::DslContext ctx = door_ctx(4);
  gs::Program p = gs::load_program(
      "m: mask(heaviside(obs[0, 0]), norm2(obs[0, 3] - 1))", ctx);
  Array2 tau(4, 7);
  tau(0, 2 + 3) = 0.5;
  // Gate closed.
  tau(0, 2 + 0) = -1.0;
  auto [v0, g0] = gs::eval_grad(p, tau, ctx);
  EXPECT_EQ(v0, 0.0);
  EXPECT_EQ(squared_norm(g0), 0.0);
  // Gate open.
  tau(0, 2 + 0) = 1.0;
  auto [v1, g1] = gs::eval_grad(p, tau, ctx);
  EXPECT_NEAR(v1, 0.25, 1e-12);
  EXPECT_NEAR(g1(0, 2 + 3), -1.0, 1e-12);
}

TEST(Calibrate, AdaptiveWeightHitsTarget) {
  gs::DslContext ctx = door_ctx(4);
  gs::Program p = gs::load_program("g ~ 12: norm2(obs[0, 3])", ctx);
  Array2 ref(4, 7);
  ref(0, 2 + 3) = 2.0;  // term value 4.0
  gs::calibrate(p, ref, ctx);
  EXPECT_FALSE(p.terms[0].adaptive);
  EXPECT_NEAR(p.terms[0].weight, 3.0, 1e-12);
  EXPECT_NEAR(gs::eval(p, ref, ctx), 12.0, 1e-12);
}

// ---- prompt + generation loop ----

TEST(Prompt, DoorBundleHasPhaseStructure) {
  EnvSpec spec = make_env_spec("door1d");
  PromptBundle b = render_prompt(spec, "open the door to 30 degrees");
  const std::string text = b.render();
  EXPECT_NE(text.find("Phase 1 (Pre-Interaction Phase)"), std::string::npos);
  EXPECT_NE(text.find("Phase 2 (Post-Interaction Phase)"), std::string::npos);
  EXPECT_NE(text.find("door hinge angle"), std::string::npos);
  EXPECT_NE(text.find("open the door to 30 degrees"), std::string::npos);
  // Deterministic rendering.
  EXPECT_EQ(text, render_prompt(spec, "open the door to 30 degrees").render());
}

TEST(Prompt, MissingHintsGetDefaults) {
  EnvSpec spec = make_env_spec("disk");
  PromptBundle b = render_prompt(spec, "rotate the disk");
  EXPECT_FALSE(b.fewshot_hints.empty());
}

TEST(Generate, ValidFirstTryUsesOneRound) {
  gs::DslContext ctx = door_ctx();
  FixtureLlmClient client({
      "Here is the program:\n```\ngoal: mean_t(norm2(obs[t, 3] - 0.5))\n```",
  });
  EnvSpec spec = make_env_spec("door1d");
  auto result =
      generate_guidance(render_prompt(spec, "open"), client, 3, ctx);
  EXPECT_EQ(result.rounds, 1);
  EXPECT_EQ(result.program.terms.size(), 1u);
}

TEST(Generate, RepairsAfterSyntaxErrorInTwoRounds) {
  gs::DslContext ctx = door_ctx();
  FixtureLlmClient client({
      "```\ngoal: mean_t(norm2(obs[t, 3] - 0.5)\n```",   // missing paren
      "```\ngoal: mean_t(norm2(obs[t, 3] - 0.5))\n```",  // fixed
  });
  EnvSpec spec = make_env_spec("door1d");
  auto result =
      generate_guidance(render_prompt(spec, "open"), client, 3, ctx);
  EXPECT_EQ(result.rounds, 2);
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_NE(result.diagnostics[0].find("line"), std::string::npos);
}

TEST(Generate, ExhaustionCarriesAllDiagnostics) {
  gs::DslContext ctx = door_ctx();
  FixtureLlmClient client({
      "```\nbad: obs[t, 99]\n```",
      "```\nbad: (((\n```",
      "```\nstill bad\n```",
  });
  EnvSpec spec = make_env_spec("door1d");
  try {
    generate_guidance(render_prompt(spec, "open"), client, 3, ctx);
    FAIL() << "expected ExhaustionError";
  } catch (const ExhaustionError& e) {
    EXPECT_EQ(e.diagnostics.size(), 3u);
  }
}

TEST(Fixture, ExhaustedFixtureIsTransportError) {
  FixtureLlmClient client({"only one"});
  EXPECT_EQ(client.complete({}), "only one");
  EXPECT_THROW(client.complete({}), TransportError);
}

TEST(Fixture, FileParsingSplitsOnSeparator) {
  const std::string path = "/tmp/cd_fixture_test.txt";
  {
    std::ofstream f(path);
    f << "first response\n---\nsecond response\nwith two lines\n";
  }
  FixtureLlmClient client = FixtureLlmClient::from_file(path);
  EXPECT_EQ(client.complete({}), "first response\n");
  EXPECT_EQ(client.complete({}), "second response\nwith two lines\n");
  std::remove(path.c_str());
}

}  // namespace
}  // namespace contactdiff
