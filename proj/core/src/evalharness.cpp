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

#include "contactdiff/evalharness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace contactdiff {

namespace {

struct Job {
  size_t cell;  // index into (mode, goal) cells
  int seed;
  int try_index;
};

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec,
                           const PlannerArtifacts& artifacts,
                           const PlanConfig& base_config, int workers,
                           std::vector<EpisodeRecord>* episodes) {
  if (spec.seeds < 1 || spec.tries < 1) {
    throw ConfigError("run_experiment: seeds and tries must be >= 1");
  }
  struct Cell {
    PlanMode mode;
    double goal;
  };
  std::vector<Cell> cells;
  for (PlanMode mode : spec.modes) {
    for (double goal : spec.goals) cells.push_back({mode, goal});
  }
  std::vector<Job> jobs;
  for (size_t c = 0; c < cells.size(); ++c) {
    for (int s = 0; s < spec.seeds; ++s) {
      for (int t = 0; t < spec.tries; ++t) jobs.push_back({c, s, t});
    }
  }

  std::vector<EpisodeRecord> records(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job& job = jobs[j];
      const Cell& cell = cells[job.cell];
      // Seed depends only on (base, seed, try): same across modes/goals.
      const uint64_t ep_seed = derive_seed(
          derive_seed(spec.base_seed, uint64_t(job.seed)), uint64_t(job.try_index));
      PlanConfig cfg = base_config;
      cfg.mode = cell.mode;
      cfg.goal = {cell.goal};
      cfg.seed = ep_seed;
      Rng reset_rng(derive_seed(ep_seed, 0x5eed));
      const EnvState s0 = env_reset(*artifacts.spec, reset_rng);
      EpisodeRollout roll =
          receding_control(artifacts, cfg, s0, spec.max_steps);
      records[j] = {cell.mode, cell.goal,   job.seed, job.try_index,
                    roll.success, roll.ghost, roll.steps};
    }
  };

  int n_workers = workers > 0 ? workers
                              : int(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min<int>(n_workers, int(jobs.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // Deterministic reduction in (cell, seed, try) order.
  ResultTable table;
  for (size_t c = 0; c < cells.size(); ++c) {
    ResultRow row;
    row.mode = cells[c].mode;
    row.goal = cells[c].goal;
    std::vector<double> try_rate(size_t(spec.tries), 0.0);
    double ghost = 0.0, steps = 0.0;
    int succ = 0;
    for (size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].cell != c) continue;
      const EpisodeRecord& r = records[j];
      succ += r.success ? 1 : 0;
      try_rate[size_t(r.try_index)] += r.success ? 1.0 : 0.0;
      ghost += r.ghost;
      steps += r.steps;
    }
    const double n = double(spec.seeds * spec.tries);
    row.success_rate = 100.0 * succ / n;
    for (double& tr : try_rate) tr = 100.0 * tr / double(spec.seeds);
    double mean = 0.0;
    for (double tr : try_rate) mean += tr;
    mean /= double(spec.tries);
    double var = 0.0;
    for (double tr : try_rate) var += (tr - mean) * (tr - mean);
    row.std_dev = std::sqrt(var / double(spec.tries));
    row.ghost = ghost / n;
    row.mean_steps = steps / n;
    table.rows.push_back(row);
  }
  if (episodes) *episodes = std::move(records);
  return table;
}

std::string report_csv(const ResultTable& table) {
  std::string out = "mode,goal,success_rate,std,ghost_metric,mean_steps\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.2f,%.2f,%.4f,%.2f\n",
                  to_string(r.mode).c_str(), r.goal, r.success_rate,
                  r.std_dev, r.ghost, r.mean_steps);
    out += buf;
  }
  return out;
}

std::string report_markdown(const ResultTable& table) {
  std::string out =
      "| mode | goal | success % | std | ghost | mean steps |\n"
      "|------|------|-----------|-----|-------|------------|\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf,
                  "| %s | %.4f | %.1f | %.1f | %.3f | %.1f |\n",
                  to_string(r.mode).c_str(), r.goal, r.success_rate,
                  r.std_dev, r.ghost, r.mean_steps);
    out += buf;
  }
  return out;
}

ResultTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("result csv: empty");
  if (line != "mode,goal,success_rate,std,ghost_metric,mean_steps") {
    throw FormatError("result csv: unexpected header: " + line);
  }
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ResultRow row;
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, field, ',');
    row.mode = plan_mode_from_string(field);
    auto next_double = [&]() {
      std::string f;
      if (!std::getline(ls, f, ',')) {
        throw FormatError("result csv: truncated row: " + line);
      }
      return std::stod(f);
    };
    row.goal = next_double();
    row.success_rate = next_double();
    row.std_dev = next_double();
    row.ghost = next_double();
    row.mean_steps = next_double();
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace contactdiff
