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

#include <cstdio>

#include "contactdiff/llm.hpp"

namespace contactdiff {

namespace {

std::string describe_env(const EnvSpec& spec) {
  std::string out;
  char buf[256];
  out += "Environment \"" + spec.id + "\": " + std::to_string(spec.obs_dim) +
         " observation dims, " + std::to_string(spec.act_dim) +
         " action dims.\n";
  switch (spec.kind) {
    case EnvKind::kDoor1d:
      out +=
          "Observation index map:\n"
          "  obs[t, 0]: hand position p (m)\n"
          "  obs[t, 1]: grip aperture (hand-controlled)\n"
          "  obs[t, 2]: latch angle (rad); the latch opens while the hand "
          "is on the handle and the grip closes; the hinge is locked until "
          "latch >= 0.785\n"
          "  obs[t, 3]: door hinge angle (rad), range [0, 2.094]\n"
          "  obs[t, 4]: handle x-position (m); handle = 1 - 0.5 * hinge, "
          "so it tracks the hand while pulling\n"
          "Action map: act[t, 0] = hand displacement per step (|.| <= "
          "0.05); act[t, 1] = grip change per step (|.| <= 0.1).\n"
          "Contact iff |obs[t, 0] - obs[t, 4]| < 0.1. Object dims (latch, "
          "hinge, handle) move only under contact.\n";
      break;
    case EnvKind::kHammer1d:
      out +=
          "Observation index map:\n"
          "  obs[t, 0]: hand position (m)\n"
          "  obs[t, 1]: hammer position (m)\n"
          "  obs[t, 2]: nail insertion depth (m), range [0, 0.09] (0.09 = "
          "full drive)\n"
          "Action map: act[t, 0] = hand displacement per step (|.| <= "
          "0.05).\n"
          "Grasp iff |obs[t, 0] - obs[t, 1]| < 0.1; a grasped hammer "
          "crossing x = 1 moving +x drives the nail by half the step.\n";
      break;
    case EnvKind::kDisk:
      out +=
          "Observation index map:\n"
          "  obs[t, 0..2]: finger joint positions\n"
          "  obs[t, 3]: disk angle theta (rad), wrapped to (-pi, pi]\n"
          "Action map: act[t, 0..2] = finger joint displacements (|.| <= "
          "0.1 each).\n"
          "The disk rotates by mean(act) only when mean(|act|) exceeds "
          "0.01 (active finger involvement).\n";
      break;
  }
  std::snprintf(buf, sizeof buf,
                "Thresholds: contact delta1 = %.3g, per-step object delta "
                "cap delta2 = %.3g, actuator activity floor delta3 = %.3g.\n",
                spec.contact_threshold, spec.object_delta_cap,
                spec.activity_floor);
  out += buf;
  return out;
}

}  // namespace

std::string PromptBundle::render() const {
  std::string out;
  out += "## Function purpose\n" + function_purpose + "\n";
  out += "## Guidance structure\n" + guidance_structure + "\n";
  out += "## Environment description\n" + environment_description + "\n";
  out += "## Function prototype\n" + function_prototype + "\n";
  out += "## Task instruction\n" + task_instruction + "\n";
  out += "## Few-shot hints\n" + fewshot_hints + "\n";
  out += "## Grammar reference\n";
  out += guidescript::grammar_ebnf();
  out += "\n";
  return out;
}

PromptBundle render_prompt(const EnvSpec& spec,
                           const std::string& task_instruction,
                           const std::string& hints) {
  PromptBundle b;
  b.function_purpose =
      "You are writing a guidance energy program for a diffusion-based "
      "trajectory planner. The program scores a candidate plan; lower "
      "energy is better. The planner follows the negative gradient of the "
      "total energy during the reverse diffusion process, so every term "
      "must be differentiable almost everywhere.";
  b.guidance_structure =
      "Structure the guidance in two phases.\n"
      "Phase 1 (Pre-Interaction Phase): before contact, only guide the "
      "hand state toward the object's interaction point; never push object "
      "dims directly.\n"
      "Phase 2 (Post-Interaction Phase): once the hand is within delta1 of "
      "the contact point, guide the object toward the task goal, keep "
      "per-step object changes small, and include dyn() so generated "
      "states stay consistent with generated actions.\n"
      "Gate phase-specific terms with mask(...) on the step-0 hand-contact "
      "distance.";
  b.environment_description = describe_env(spec);
  b.function_prototype =
      "Write one program in the guidance DSL, one term per line:\n"
      "  name: expr            (weight 1)\n"
      "  name @ w: expr        (fixed weight w)\n"
      "  name ~ target: expr   (weight calibrated so the term starts near "
      "target)\n"
      "The total energy is the weighted sum of the named terms. Respond "
      "with the program in a fenced code block.";
  b.task_instruction = task_instruction;
  b.fewshot_hints =
      hints.empty()
          ? "Use soft interpolation for goals: track interp(obs[0, i], "
            "goal) inside mean_t rather than a hard final-step target. Use "
            "norm2 for distances. Typical weights: goal terms around 8-30, "
            "alignment around 4-12, dyn() around 1-5."
          : hints;
  return b;
}

}  // namespace contactdiff
