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

#include "maas/paths.hpp"
#include "maas/pricing.hpp"

namespace maas {

// Brute-force oracles for testing: path-based equilibrium by extragradient,
// finite-difference objective gradients, and pricing by vertex enumeration.
// None of them share code with the production solvers they check.

struct UEOracleOptions {
  int hop_budget = 12;
  int max_inner = 500000;
  double tol = 1e-10;          // gradient-map residual on path flows
  int max_multiplier_rounds = 80;
  double rho0 = 2.0;
  double rho_growth = 1.5;
  double capacity_tol = 5e-8;
};

struct UEOracleResult {
  Eigen::VectorXd maas_link_flow, nonmaas_link_flow;  // per global link
  Eigen::VectorXd mu;                                 // transit capacity duals
  double complementarity = 0;  // max flow-weighted cost gap at the solution
  bool converged = false;
  std::vector<Eigen::VectorXd> maas_path_flows, nonmaas_path_flows;
  std::vector<PathSet> paths;
};

// Capacity-constrained two-class equilibrium on enumerated paths. Throws
// OracleFailure instead of returning a half-converged answer.
UEOracleResult ue_oracle(const MultiModalNetwork& net, const Eigen::VectorXd& q,
                         const std::vector<PathSet>& paths,
                         const UEOracleOptions& opts = {});

UEOracleResult ue_oracle(const MultiModalNetwork& net, const Eigen::VectorXd& q,
                         const UEOracleOptions& opts = {});

// Central differences of the fixed-iteration equilibrium objective, with
// one-sided steps at the demand box boundary.
Eigen::VectorXd fd_objective_gradient(const MultiModalNetwork& net,
                                      const Eigen::VectorXd& q,
                                      const MultiplierState& mult,
                                      const VIOptions& vi, double h,
                                      const FlowState* warm_start = nullptr);

struct VertexOracleResult {
  bool feasible = true;
  double p_s = 0;
  Eigen::VectorXd p_d;
  double profit = 0;
};

// Dense LP oracle for the reduced pricing program: enumerates constraint
// intersections of the (|W|+1)-dimensional polyhedron.
VertexOracleResult lp_vertex_oracle(const PricingInputs& inputs,
                                    int max_dims = 6);

// ---------------------------------------------------------------------------
// Seeded random instances
// ---------------------------------------------------------------------------

struct ToyOptions {
  bool tight_mt_capacity = false;  // make transit capacities bind
  bool with_mod_access = false;    // include an on-demand waiting subnetwork
  int max_ods = 3;
};

NetworkConfig random_toy_config(uint64_t seed, const ToyOptions& opts = {});

// Random reduced-pricing instances; roughly one in eight is infeasible and a
// slice carries degenerate zero lambda_min entries.
PricingInputs random_pricing_inputs(uint64_t seed);

// Oracle suite used by the CLI: solver-vs-oracle agreement batches with a
// pass/fail table. Returns true when every batch passes.
bool verify_suite(std::ostream& os);

// Solver parameters sized for the random toys: step from the sampled operator
// norm, tight gaps.
AlgorithmParams tuned_toy_params(const MultiModalNetwork& net);

// Worst flow-weighted cost gap over enumerated paths at a solver result.
double solver_complementarity(const MultiModalNetwork& net,
                              const AssignmentResult& solver,
                              int hop_budget = 12);

// Max relative disagreement between the unrolled and finite-difference
// objective gradients on a seeded toy.
double gradient_agreement_error(uint64_t seed);

}  // namespace maas
