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

#include "maas/cost.hpp"

#include <cmath>

namespace maas {

FlowState FlowState::zero(const MultiModalNetwork& net) {
  FlowState fs;
  fs.x = Eigen::MatrixXd::Zero(net.maas_space().num_links(),
                               net.maas_space().num_origins());
  fs.xt = Eigen::MatrixXd::Zero(net.nonmaas_space().num_links(),
                                net.nonmaas_space().num_origins());
  return fs;
}

Eigen::VectorXd FlowState::total_link_flow(const MultiModalNetwork& net) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(net.num_links());
  const auto& ms = net.maas_space();
  const auto& ns = net.nonmaas_space();
  const Eigen::VectorXd xr = x.rowwise().sum();
  const Eigen::VectorXd xtr = xt.rowwise().sum();
  for (int i = 0; i < ms.num_links(); ++i) total[ms.link_ids[i]] += xr[i];
  for (int i = 0; i < ns.num_links(); ++i) total[ns.link_ids[i]] += xtr[i];
  return total;
}

Eigen::VectorXd FlowState::class_link_flow(const MultiModalNetwork& net,
                                           bool maas) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(net.num_links());
  const ClassSpace& space = maas ? net.maas_space() : net.nonmaas_space();
  const Eigen::VectorXd rows = maas ? x.rowwise().sum() : xt.rowwise().sum();
  for (int i = 0; i < space.num_links(); ++i) total[space.link_ids[i]] += rows[i];
  return total;
}

Eigen::VectorXd FlowState::flatten() const {
  Eigen::VectorXd v(flat_size());
  v.head(x.size()) = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  v.tail(xt.size()) = Eigen::Map<const Eigen::VectorXd>(xt.data(), xt.size());
  return v;
}

FlowState FlowState::unflatten(const MultiModalNetwork& net,
                               const Eigen::VectorXd& v) {
  FlowState fs = FlowState::zero(net);
  Eigen::Map<Eigen::VectorXd>(fs.x.data(), fs.x.size()) = v.head(fs.x.size());
  Eigen::Map<Eigen::VectorXd>(fs.xt.data(), fs.xt.size()) = v.tail(fs.xt.size());
  return fs;
}

double FlowState::norm() const {
  return std::sqrt(x.squaredNorm() + xt.squaredNorm());
}

double FlowState::dot(const FlowState& other) const {
  return x.cwiseProduct(other.x).sum() + xt.cwiseProduct(other.xt).sum();
}

double FlowState::max_abs() const {
  double m = 0;
  if (x.size()) m = x.cwiseAbs().maxCoeff();
  if (xt.size()) m = std::max(m, xt.cwiseAbs().maxCoeff());
  return m;
}

FlowState operator+(const FlowState& a, const FlowState& b) {
  return {a.x + b.x, a.xt + b.xt};
}
FlowState operator-(const FlowState& a, const FlowState& b) {
  return {a.x - b.x, a.xt - b.xt};
}
FlowState operator*(double s, const FlowState& a) {
  return {s * a.x, s * a.xt};
}

MultiplierState MultiplierState::zero(const MultiModalNetwork& net, double rho) {
  MultiplierState m;
  m.mu = Eigen::VectorXd::Zero(net.num_links());
  m.rho = rho;
  return m;
}

namespace {

inline double bpr(double t0, double combined, double capacity) {
  if (!std::isfinite(capacity)) return t0;
  const double r = combined / capacity;
  return t0 * (1.0 + 0.15 * r * r * r * r);
}

inline double bpr_slope(double t0, double combined, double capacity) {
  if (!std::isfinite(capacity)) return 0.0;
  return 0.6 * t0 * combined * combined * combined /
         (capacity * capacity * capacity * capacity);
}

inline double combined_flow(const MultiModalNetwork& net,
                            const Eigen::VectorXd& flow, const Link& link) {
  double c = flow[link.id];
  if (link.paired_road_link >= 0) c += flow[link.paired_road_link];
  return c;
}

}  // namespace

CostEval travel_time(const MultiModalNetwork& net, const Eigen::VectorXd& total_flow,
                     const CostOptions& opts) {
  CostEval eval;
  eval.time.resize(net.num_links());
  eval.loads.assign(net.operators().size(), OperatorLoad{});

  for (const Link& link : net.links()) {
    switch (link.kind) {
      case LinkKind::Drive:
      case LinkKind::MoDRegular1:
        eval.time[link.id] =
            bpr(link.free_flow_time, combined_flow(net, total_flow, link),
                link.capacity);
        break;
      case LinkKind::MoDAccess:
        eval.time[link.id] = link.free_flow_time;  // waiting added below
        break;
      default:
        eval.time[link.id] = link.free_flow_time;
        break;
    }
  }

  // Fleet accounting per on-demand operator, then the uniform waiting time on
  // its access links. Regular-link times above feed the occupied-time sum.
  for (size_t m = 0; m < net.operators().size(); ++m) {
    const Operator& op = net.operators()[m];
    if (op.kind == OperatorKind::MassTransit) continue;
    OperatorLoad& load = eval.loads[m];
    for (int lid : net.operator_regular_links(static_cast<int>(m)))
      load.occupied += eval.time[lid] * total_flow[lid];
    load.vacant = op.fleet_time - load.occupied;
    for (int lid : net.operator_links(static_cast<int>(m))) {
      if (net.links()[lid].kind == LinkKind::MoDAccess)
        load.access_demand += total_flow[lid];
    }
    const double guard_floor = std::max(op.min_vacant / 10.0, 1e-9);
    double wait = 0;
    if (load.vacant > guard_floor || !opts.guard_access_singularity) {
      if (load.vacant <= 0) {
        if (load.access_demand > 1e-12)
          throw SingularServiceError("operator " + op.id +
                                     " has no vacant fleet time");
        wait = 0;
      } else {
        wait = op.matching_coeff * load.access_demand / load.vacant;
      }
    } else {
      // Linear extrapolation below the guard floor keeps the map Lipschitz.
      load.extrapolated = true;
      wait = op.matching_coeff * load.access_demand / guard_floor *
             (2.0 - load.vacant / guard_floor);
    }
    for (int lid : net.operator_links(static_cast<int>(m))) {
      if (net.links()[lid].kind == LinkKind::MoDAccess)
        eval.time[lid] += wait;
    }
  }
  return eval;
}

Eigen::SparseMatrix<double> travel_time_jacobian(const MultiModalNetwork& net,
                                                 const Eigen::VectorXd& total_flow,
                                                 const CostOptions& opts) {
  const CostEval eval = travel_time(net, total_flow, opts);
  std::vector<Eigen::Triplet<double>> trip;

  for (const Link& link : net.links()) {
    if (link.kind != LinkKind::Drive && link.kind != LinkKind::MoDRegular1)
      continue;
    const double slope = bpr_slope(link.free_flow_time,
                                   combined_flow(net, total_flow, link),
                                   link.capacity);
    if (slope == 0.0) continue;
    trip.emplace_back(link.id, link.id, slope);
    if (link.paired_road_link >= 0)
      trip.emplace_back(link.id, link.paired_road_link, slope);
  }

  for (size_t m = 0; m < net.operators().size(); ++m) {
    const Operator& op = net.operators()[m];
    if (op.kind == OperatorKind::MassTransit) continue;
    const OperatorLoad& load = eval.loads[m];
    std::vector<int> access;
    for (int lid : net.operator_links(static_cast<int>(m)))
      if (net.links()[lid].kind == LinkKind::MoDAccess) access.push_back(lid);
    if (access.empty()) continue;

    const double guard_floor = std::max(op.min_vacant / 10.0, 1e-9);
    double dwait_dD, dwait_dV;
    if (!load.extrapolated) {
      if (load.vacant <= 0)
        throw SingularServiceError("operator " + op.id +
                                   " has no vacant fleet time");
      dwait_dD = op.matching_coeff / load.vacant;
      dwait_dV = -op.matching_coeff * load.access_demand /
                 (load.vacant * load.vacant);
    } else {
      dwait_dD = op.matching_coeff / guard_floor *
                 (2.0 - load.vacant / guard_floor);
      dwait_dV = -op.matching_coeff * load.access_demand /
                 (guard_floor * guard_floor);
    }

    // dV/dX_b = -dO/dX_b; the occupied-time product rule couples the waiting
    // time to regular-link flows and, through the shared road, to driving.
    std::vector<std::pair<int, double>> dv;
    for (int lid : net.operator_regular_links(static_cast<int>(m))) {
      const Link& link = net.links()[lid];
      const double slope =
          link.kind == LinkKind::MoDRegular1
              ? bpr_slope(link.free_flow_time,
                          combined_flow(net, total_flow, link), link.capacity)
              : 0.0;
      dv.emplace_back(lid, -(eval.time[lid] + total_flow[lid] * slope));
      if (link.paired_road_link >= 0 && slope != 0.0)
        dv.emplace_back(link.paired_road_link, -total_flow[lid] * slope);
    }

    for (int a : access) {
      for (int b : access) trip.emplace_back(a, b, dwait_dD);
      for (const auto& [b, dVdb] : dv) trip.emplace_back(a, b, dwait_dV * dVdb);
    }
  }

  Eigen::SparseMatrix<double> jac(net.num_links(), net.num_links());
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

Eigen::VectorXd augmented_time(const MultiModalNetwork& net, const CostEval& eval,
                               const Eigen::VectorXd& total_flow,
                               const MultiplierState& mult) {
  Eigen::VectorXd t_hat = eval.time;
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    const Link& link = net.links()[lid];
    const double bracket =
        mult.mu[lid] + mult.rho * (total_flow[lid] - link.capacity);
    if (bracket > 0) t_hat[lid] += bracket;
  }
  return t_hat;
}

Eigen::SparseMatrix<double> augmented_jacobian(const MultiModalNetwork& net,
                                               const Eigen::VectorXd& total_flow,
                                               const MultiplierState& mult,
                                               const CostOptions& opts) {
  Eigen::SparseMatrix<double> jac = travel_time_jacobian(net, total_flow, opts);
  std::vector<Eigen::Triplet<double>> trip;
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    const Link& link = net.links()[lid];
    const double bracket =
        mult.mu[lid] + mult.rho * (total_flow[lid] - link.capacity);
    if (bracket > 0) trip.emplace_back(lid, lid, mult.rho);
  }
  if (!trip.empty()) {
    Eigen::SparseMatrix<double> pen(net.num_links(), net.num_links());
    pen.setFromTriplets(trip.begin(), trip.end());
    jac += pen;
  }
  return jac;
}

void class_costs(const MultiModalNetwork& net, const Eigen::VectorXd& t_hat,
                 Eigen::VectorXd& maas_cost, Eigen::VectorXd& nonmaas_cost) {
  const auto& ms = net.maas_space();
  const auto& ns = net.nonmaas_space();
  maas_cost.resize(ms.num_links());
  nonmaas_cost.resize(ns.num_links());
  for (int i = 0; i < ms.num_links(); ++i) maas_cost[i] = t_hat[ms.link_ids[i]];
  for (int i = 0; i < ns.num_links(); ++i) {
    const Link& link = net.links()[ns.link_ids[i]];
    nonmaas_cost[i] = t_hat[link.id] + link.nonmaas_fare();
  }
}

FlowState lift_jvp(const MultiModalNetwork& net,
                   const Eigen::SparseMatrix<double>& link_jacobian,
                   const FlowState& dz) {
  const Eigen::VectorXd df = link_jacobian * dz.total_link_flow(net);
  FlowState out = FlowState::zero(net);
  const auto& ms = net.maas_space();
  const auto& ns = net.nonmaas_space();
  for (int i = 0; i < ms.num_links(); ++i)
    out.x.row(i).setConstant(df[ms.link_ids[i]]);
  for (int i = 0; i < ns.num_links(); ++i)
    out.xt.row(i).setConstant(df[ns.link_ids[i]]);
  return out;
}

FlowState lift_vjp(const MultiModalNetwork& net,
                   const Eigen::SparseMatrix<double>& link_jacobian,
                   const FlowState& wbar) {
  const Eigen::VectorXd g =
      link_jacobian.transpose() * wbar.total_link_flow(net);
  FlowState out = FlowState::zero(net);
  const auto& ms = net.maas_space();
  const auto& ns = net.nonmaas_space();
  for (int i = 0; i < ms.num_links(); ++i)
    out.x.row(i).setConstant(g[ms.link_ids[i]]);
  for (int i = 0; i < ns.num_links(); ++i)
    out.xt.row(i).setConstant(g[ns.link_ids[i]]);
  return out;
}

}  // namespace maas
