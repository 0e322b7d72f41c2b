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

#ifndef CONTACTDIFF_EVALHARNESS_HPP_
#define CONTACTDIFF_EVALHARNESS_HPP_

#include <string>
#include <vector>

#include "contactdiff/planner.hpp"

namespace contactdiff {

// Desk-scale experiment protocol: every (mode, goal) cell runs
// seeds x tries episodes; the reported std is the population std over the
// per-try success rates.
struct ExperimentSpec {
  std::string env_id;
  std::vector<double> goals;
  std::vector<PlanMode> modes;
  int seeds = 10;
  int tries = 3;
  int max_steps = 120;
  uint64_t base_seed = 0;
};

struct ResultRow {
  PlanMode mode;
  double goal = 0.0;
  double success_rate = 0.0;  // percent
  double std_dev = 0.0;       // percent, over tries
  double ghost = 0.0;
  double mean_steps = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

struct EpisodeRecord {
  PlanMode mode;
  double goal = 0.0;
  int seed = 0;
  int try_index = 0;
  bool success = false;
  double ghost = 0.0;
  int steps = 0;
};

// Runs every cell with a fixed worker pool. Episode seeds depend only on
// (base_seed, seed, try), never on the mode or scheduling order, so
// comparisons across modes are on the same seeds and rerunning an
// identical spec reproduces results bit-exactly.
ResultTable run_experiment(const ExperimentSpec& spec,
                           const PlannerArtifacts& artifacts,
                           const PlanConfig& base_config, int workers = 0,
                           std::vector<EpisodeRecord>* episodes = nullptr);

// CSV schema: mode,goal,success_rate,std,ghost_metric,mean_steps.
std::string report_csv(const ResultTable& table);
std::string report_markdown(const ResultTable& table);
ResultTable parse_csv(const std::string& text);

}  // namespace contactdiff

#endif  // CONTACTDIFF_EVALHARNESS_HPP_
