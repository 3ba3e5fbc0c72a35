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

#include <string>
#include <vector>

#include "maas/bilevel.hpp"

namespace maas {

// Everything the reduced pricing program needs, detached from the network so
// synthetic instances can exercise the solver directly.
struct PricingInputs {
  Eigen::VectorXd q;           // served MaaS demand per OD
  Eigen::VectorXd pi;          // MaaS generalized cost per OD
  Eigen::VectorXd tau_min;     // cheapest outside option per OD
  Eigen::VectorXd lambda_min;  // cheapest weighted volume over matched paths
  Eigen::VectorXd utility;     // trip utility per OD
  std::vector<std::string> operator_ids;
  std::vector<double> revenue_floor;         // per operator
  std::vector<double> nonmaas_revenue;       // fares earned outside the platform
  std::vector<double> weighted_maas_volume;  // regular-link weighted volume
  double total_weighted_volume = 0;          // all links

  int num_ods() const { return static_cast<int>(q.size()); }
};

struct PricingScheme {
  Eigen::VectorXd p_d;     // OD fare, negative = compensation
  double p_s = 0;          // scalar capacity price factor
  Eigen::VectorXd lambda;  // per-link weights (empty for synthetic inputs)
  double eta = 0;
  double profit = 0;
  int binding_floor_operator = -1;  // operator whose floor pins the lower bound
  bool optimum_at_lower_bound = false;
  bool unique_cond_volume = false;  // uniqueness diagnostics at the solution
  bool unique_cond_ratio = false;
};

// Per-link purchase weights: operator fares on regular links (transit scaled
// by eta), half the access time on transit access links, zero elsewhere.
Eigen::VectorXd lambda_weights(const MultiModalNetwork& net,
                               const Eigen::VectorXd& time, double eta);

// Cheapest outside option per OD: time plus capacity duals plus the planning
// cost, over every non-platform path including driving. Fares excluded.
Eigen::VectorXd tau_min(const MultiModalNetwork& net, const Eigen::VectorXd& time,
                        const Eigen::VectorXd& mu);

struct LambdaMinResult {
  Eigen::VectorXd value;        // per OD, 0 where undefined (q = 0)
  std::vector<char> cyclic;     // used subgraph had a cycle (fell back)
  std::vector<char> connected;  // used subgraph reached the destination
};

// Minimum weighted volume over the matched paths, from the used-link subgraph
// of the OD's origin flows.
LambdaMinResult lambda_min(const MultiModalNetwork& net, const FlowState& flows,
                           const Eigen::VectorXd& lambda, const Eigen::VectorXd& q,
                           double rel_threshold = 1e-6);

// Smallest capacity price admitted by the revenue floors; identifies the
// binding operator. Throws InfeasiblePricingError when a floor is unreachable.
double ps_lower_bound(const PricingInputs& inputs, int* binding_op = nullptr);

PricingInputs build_pricing_inputs(const MultiModalNetwork& net,
                                   const AssignmentResult& assignment,
                                   const Eigen::VectorXd& utility, double eta,
                                   const std::vector<double>& floor_override = {});

// Exact maximizer of the reduced pricing program via the breakpoint scan of
// its concave piecewise-linear profile in the capacity price.
PricingScheme solve_pricing(const PricingInputs& inputs);

struct StabilityReport {
  double worst_within_platform = 0;  // re-matching on an unused platform path
  double worst_defection = 0;        // leaving the platform entirely
  bool partial = false;              // some path set hit the enumeration budget
  int paths_checked = 0;
};

// Numeric check of both stability conditions by path enumeration.
StabilityReport check_stability(const MultiModalNetwork& net,
                                const AssignmentResult& assignment,
                                const PricingScheme& scheme,
                                const Eigen::VectorXd& utility, int hop_budget);

enum class SweepObjective { Platform, Traveler, Operator };

SweepObjective sweep_objective_from_string(const std::string& s);

struct SweepRow {
  double eta = 0;
  bool feasible = false;
  double p_s = 0;
  double profit = 0;
  double traveler_cost = 0;
  std::vector<double> operator_revenue;
  std::string note;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int best = -1;  // index into rows, -1 when no eta qualifies
};

// Re-prices the fixed assignment across the eta grid and selects the row
// optimizing the requested stakeholder.
SweepResult scenario_sweep(const MultiModalNetwork& net,
                           const AssignmentResult& assignment,
                           const Eigen::VectorXd& utility,
                           const std::vector<double>& eta_grid,
                           SweepObjective objective,
                           const std::vector<double>& floor_override = {});

struct PayoffReport {
  Eigen::VectorXd maas_cost, nonmaas_cost;      // per OD
  Eigen::VectorXd maas_saving, nonmaas_saving;  // vs trip utility
  Eigen::VectorXd fare_time_ratio_maas, fare_time_ratio_nonmaas;
  std::vector<double> operator_revenue;
  double platform_profit = 0;
  std::vector<int> compensated;  // served ODs with a negative fare
};

PayoffReport compute_payoffs(const MultiModalNetwork& net,
                             const AssignmentResult& assignment,
                             const PricingScheme& scheme,
                             const Eigen::VectorXd& utility);

}  // namespace maas
