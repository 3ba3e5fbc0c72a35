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

#include "maas/cost.hpp"
#include "maas/network.hpp"

namespace maas {

// Iterate of the three-operator splitting: z is the flow estimate, u and v
// the auxiliary variables.
struct SplitState {
  FlowState z, u, v;
  int iter = 0;
};

struct VIOptions {
  int iterations = 200;
  double gamma = 2.5e-4;
  bool keep_trace = false;  // store u iterates for unrolled differentiation
  bool compute_fixed_point_residual = true;
  CostOptions cost;
  std::ostream* iteration_csv = nullptr;  // "iteration,residual" rows
};

struct EquilibriumSolution {
  FlowState z;  // nonnegative flow estimate after the last step
  FlowState u;  // final auxiliary iterate
  Demand demand;
  double gamma = 0;
  int iterations = 0;
  double step_residual = 0;            // ||u_N - u_{N-1}||
  double residual = 0;                 // ||z - proj(z - gamma F(z))|| on the full set
  double affine_violation = 0;         // max |incidence * z - demand|
  double min_flow = 0;                 // most negative component of z (>= 0 ideally)
  double max_capacity_violation = 0;   // transit links
  std::vector<FlowState> trace_u;      // u^(0..N-1) when requested
  std::vector<double> step_residuals;
};

// Componentwise clamp onto the nonnegative orthant.
FlowState project_nonneg(const FlowState& z);

// Minimum-norm correction onto the flow-conservation subspace, per origin
// block, using the cached compact SVD factors.
FlowState project_affine(const MultiModalNetwork& net, const FlowState& z,
                         const Demand& demand);

// Projection onto the intersection of both sets (Dykstra), used only for the
// reported fixed-point residual.
FlowState project_feasible(const MultiModalNetwork& net, const FlowState& z,
                           const Demand& demand, int max_iter = 500,
                           double tol = 1e-12);

// One splitting step; returns ||v' - z'||.
double davis_yin_step(const MultiModalNetwork& net, SplitState& state,
                      double gamma, const MultiplierState& mult,
                      const Demand& demand, const CostOptions& cost_opts = {});

// Runs the fixed-point iterations for the relaxed equilibrium at MaaS demand
// split q. `warm_start` seeds u^(0) (flows of the previous outer iterate).
EquilibriumSolution solve_vi(const MultiModalNetwork& net,
                             const Eigen::VectorXd& q,
                             const FlowState* warm_start,
                             const MultiplierState& mult, const VIOptions& opts);

enum class JacobianMode { Unrolled, FiniteDifference };

// Sensitivity of the equilibrium flows with respect to the MaaS demand split,
// as a dense (flattened flow dim) x |W| matrix. Unrolled mode chains exact
// derivatives through the stored iterates; finite differences re-solve.
Eigen::MatrixXd equilibrium_jacobian(const MultiModalNetwork& net,
                                     const Eigen::VectorXd& q,
                                     const EquilibriumSolution& solution,
                                     JacobianMode mode,
                                     const MultiplierState& mult,
                                     const VIOptions& opts,
                                     double fd_step = 1e-4);

// Adjoint pass through the stored iterates: returns d(seed . z_final)/dq for a
// given seed without materializing the Jacobian.
Eigen::VectorXd unrolled_gradient(const MultiModalNetwork& net,
                                  const EquilibriumSolution& solution,
                                  const FlowState& seed,
                                  const MultiplierState& mult,
                                  const VIOptions& opts);

// Largest singular value of the lifted augmented cost Jacobian, sampled at the
// given per-link flow points (power iteration).
double sampled_lipschitz(const MultiModalNetwork& net,
                         const std::vector<Eigen::VectorXd>& flow_points,
                         const MultiplierState& mult,
                         const CostOptions& cost_opts = {});

}  // namespace maas
