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
#include <vector>

#include "maas/equilibrium.hpp"

namespace maas {

struct AlgorithmParams {
  double alpha = 2.5e-4;  // demand step
  double gamma = 2.5e-4;  // inner step
  double beta = 0.2;      // momentum
  int inner_iterations = 200;
  double rho0 = 1.0;
  double rho_max = 200.0;
  double phi = 0.1;    // penalty increment
  double sigma = 0.85; // violation-decay threshold
  double tol_q = 1e-7;
  double tol_z = 1e-7;
  double capacity_tol = 1e-3;
  int max_outer = 10000;
  int min_inner = 20;
  bool paper_simplified_gradient = false;  // own-flow derivative form only
  bool use_full_jacobian = false;          // materialize J (verification scale)
  CostOptions cost;
  std::ostream* log_csv = nullptr;
  std::ostream* log = nullptr;  // human-readable progress notes

  void check() const;
};

// Total system travel time at the given flows (fares excluded).
double objective(const MultiModalNetwork& net, const FlowState& z);

// Seed vector for the objective derivative: per link, flow-weighted time
// slopes plus the time itself, broadcast over both classes.
FlowState objective_seed(const MultiModalNetwork& net, const FlowState& z,
                         bool paper_simplified, const CostOptions& opts = {});

// Objective gradient assembled from an explicit equilibrium Jacobian.
Eigen::VectorXd gradient(const MultiModalNetwork& net, const FlowState& z,
                         const Eigen::MatrixXd& jacobian,
                         bool paper_simplified = false,
                         const CostOptions& opts = {});

// Momentum step on the MaaS demand split, clamped into [0, Q].
void nesterov_update(Eigen::VectorXd& q, Eigen::VectorXd& omega,
                     const Eigen::VectorXd& grad, double alpha, double beta,
                     const Eigen::VectorXd& q_max);

// Penalty multiplier update; the scalar penalty grows when any transit
// capacity violation failed to decay by the factor sigma.
void multiplier_update(MultiplierState& mult, const MultiModalNetwork& net,
                       const Eigen::VectorXd& total_flow,
                       const Eigen::VectorXd& total_flow_prev, double phi,
                       double sigma, double rho_max);

// Relative iterate gaps; falls back to absolute norms at zero denominators.
std::pair<double, double> gaps(const Eigen::VectorXd& q,
                               const Eigen::VectorXd& q_prev,
                               const FlowState& z, const FlowState& z_prev);

struct Potentials {
  Eigen::VectorXd pi;        // MaaS generalized cost per OD (time + mu)
  Eigen::VectorXd pi_tilde;  // non-MaaS generalized cost (time + mu + fares)
  // Decomposition along the argmin paths, for reporting only.
  Eigen::VectorXd maas_time, nonmaas_time, nonmaas_fare;
};

Potentials node_potentials(const MultiModalNetwork& net,
                           const Eigen::VectorXd& time,
                           const Eigen::VectorXd& mu);

struct AssignmentResult {
  Eigen::VectorXd q;
  FlowState flows;
  MultiplierState mult;
  CostEval cost;          // raw link times at the solution
  Potentials potentials;
  Eigen::VectorXd capacity;  // purchased capacity per link
  double objective = 0;
  bool converged = false;
  int outer_iterations = 0;
  double gap_q = 0, gap_z = 0, max_violation = 0;
  double sampled_lipschitz = 0;
  // One row per outer iteration: objective, gap_q, gap_z, violation, rho, N.
  std::vector<std::array<double, 6>> history;
};

// Purchased capacity: realized MaaS flow on transit regular links, occupied
// vehicle time on on-demand regular links.
Eigen::VectorXd capacity_purchase(const MultiModalNetwork& net,
                                  const FlowState& flows, const CostEval& cost);

// Capacity-constrained equilibrium at a fixed demand split (no demand step):
// inner iterations plus multiplier updates until the flow gap settles.
AssignmentResult solve_fixed_demand(const MultiModalNetwork& net,
                                    const Eigen::VectorXd& q,
                                    const AlgorithmParams& params,
                                    const FlowState* init = nullptr);

// The no-platform starting point: everything non-MaaS.
inline AssignmentResult solve_base(const MultiModalNetwork& net,
                                   const AlgorithmParams& params) {
  return solve_fixed_demand(net, Eigen::VectorXd::Zero(net.num_ods()), params);
}

// Full outer loop: equilibrium solve, sensitivity, momentum demand update,
// multiplier update, gap checks, adaptive inner iteration count.
AssignmentResult solve_assignment(const MultiModalNetwork& net,
                                  const AlgorithmParams& params,
                                  const Eigen::VectorXd& q0,
                                  const FlowState* z0 = nullptr);

}  // namespace maas
