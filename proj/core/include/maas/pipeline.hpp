// Copyright 2026 The maas-solver Authors.
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "maas/metrics.hpp"

namespace maas {

// Process exit codes shared between the pipeline and the CLI wrapper.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitInfeasiblePricing = 3;
inline constexpr int kExitConfig = 4;

struct PipelineOptions {
  std::string config_path;
  std::string out_dir = "out";
  double eta = 0.87;
  std::vector<double> eta_grid;  // empty = 0.60 .. 1.20 step 0.05
  std::string objective = "platform";
  uint64_t seed = 0;
  // Negative values keep the solver defaults.
  int max_outer = -1;
  int inner_iterations = -1;
  double tol_q = -1;
  double tol_z = -1;
  double alpha = -1, gamma = -1;
  double op_cost_per_trip = 0;
  int stability_hop_budget = 10;  // path check skipped on large networks
  std::ostream* log = nullptr;
};

// Executes one batch command: base, assign, price, sweep, report, verify or
// dump. Returns a process exit code; error text goes to opts.log.
int run_pipeline(const std::string& command, const PipelineOptions& opts);

// On-disk state shared between pipeline stages.
struct BaseState {
  Eigen::VectorXd utility;            // per OD
  std::vector<double> base_revenue;   // per operator
  AssignmentResult result;
};

struct AssignState {
  AssignmentResult result;
};

void save_base_state(const std::string& path, const MultiModalNetwork& net,
                     const BaseState& state);
BaseState load_base_state(const std::string& path, const MultiModalNetwork& net);
void save_assign_state(const std::string& path, const MultiModalNetwork& net,
                       const AssignState& state);
AssignState load_assign_state(const std::string& path,
                              const MultiModalNetwork& net);

AlgorithmParams params_from_options(const PipelineOptions& opts);

}  // namespace maas
