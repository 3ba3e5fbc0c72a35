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

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <vector>

#include "maas/network.hpp"

namespace maas {

// Origin-indexed flows of both traveler classes. Columns are origin blocks;
// rows follow the class link lists of the network.
struct FlowState {
  Eigen::MatrixXd x;   // MaaS: usable links x origins
  Eigen::MatrixXd xt;  // non-MaaS

  static FlowState zero(const MultiModalNetwork& net);

  // Total flow per global link, both classes summed.
  Eigen::VectorXd total_link_flow(const MultiModalNetwork& net) const;
  // Per-class aggregate flow per global link.
  Eigen::VectorXd class_link_flow(const MultiModalNetwork& net, bool maas) const;

  Eigen::Index flat_size() const { return x.size() + xt.size(); }
  Eigen::VectorXd flatten() const;
  static FlowState unflatten(const MultiModalNetwork& net,
                             const Eigen::VectorXd& v);

  double norm() const;
  double dot(const FlowState& other) const;
  double max_abs() const;
};

FlowState operator+(const FlowState& a, const FlowState& b);
FlowState operator-(const FlowState& a, const FlowState& b);
FlowState operator*(double s, const FlowState& a);

// Relaxation multipliers for the transit capacity constraints.
struct MultiplierState {
  Eigen::VectorXd mu;  // per global link, nonzero only on MT regular links
  double rho = 1.0;

  static MultiplierState zero(const MultiModalNetwork& net, double rho = 1.0);
};

struct CostOptions {
  // Keep access times Lipschitz by extrapolating linearly once the vacant
  // fleet drops below min_vacant/10; without it a nonpositive vacant fleet
  // with positive access demand is an error.
  bool guard_access_singularity = true;
};

struct OperatorLoad {
  double occupied = 0;       // vehicle-minutes in service
  double vacant = 0;         // fleet_time - occupied
  double access_demand = 0;  // total flow on the operator's access links
  bool extrapolated = false;
};

struct CostEval {
  Eigen::VectorXd time;  // travel time per global link
  std::vector<OperatorLoad> loads;
};

// Link travel times at the given per-link total flows.
CostEval travel_time(const MultiModalNetwork& net, const Eigen::VectorXd& total_flow,
                     const CostOptions& opts = {});

inline CostEval travel_time(const MultiModalNetwork& net, const FlowState& flow,
                            const CostOptions& opts = {}) {
  return travel_time(net, flow.total_link_flow(net), opts);
}

// Exact partial derivatives of link times with respect to per-link total
// flows. Row a, column b holds dt_a/dX_b.
Eigen::SparseMatrix<double> travel_time_jacobian(const MultiModalNetwork& net,
                                                 const Eigen::VectorXd& total_flow,
                                                 const CostOptions& opts = {});

// Augmented (penalized) link times: the transit capacity constraint enters as
// a clamped linear penalty.
Eigen::VectorXd augmented_time(const MultiModalNetwork& net, const CostEval& eval,
                               const Eigen::VectorXd& total_flow,
                               const MultiplierState& mult);

// Derivative of the augmented times: travel_time_jacobian plus the active
// penalty slopes on transit regular links (subderivative zero at the clamp).
Eigen::SparseMatrix<double> augmented_jacobian(const MultiModalNetwork& net,
                                               const Eigen::VectorXd& total_flow,
                                               const MultiplierState& mult,
                                               const CostOptions& opts = {});

// Per-class cost columns of the lifted map F(z) = [t_hat, t_hat + fare]:
// the same per-link value applies to every origin block.
void class_costs(const MultiModalNetwork& net, const Eigen::VectorXd& t_hat,
                 Eigen::VectorXd& maas_cost, Eigen::VectorXd& nonmaas_cost);

// Directional derivative of the lifted cost map: dF = broadcast(G * agg(dz)).
FlowState lift_jvp(const MultiModalNetwork& net,
                   const Eigen::SparseMatrix<double>& link_jacobian,
                   const FlowState& dz);

// Adjoint of lift_jvp: zbar = broadcast(G^T * agg(wbar)).
FlowState lift_vjp(const MultiModalNetwork& net,
                   const Eigen::SparseMatrix<double>& link_jacobian,
                   const FlowState& wbar);

}  // namespace maas
