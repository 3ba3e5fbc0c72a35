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

#include "maas/bilevel.hpp"

#include <cmath>
#include <ostream>

#include "maas/shortest_path.hpp"

namespace maas {

void AlgorithmParams::check() const {
  if (alpha <= 0 || gamma <= 0) throw DomainError("step sizes must be positive");
  if (beta < 0 || beta >= 1) throw DomainError("momentum must lie in [0,1)");
  if (inner_iterations < 1) throw DomainError("inner iteration count must be >= 1");
  if (tol_q <= 0 || tol_z <= 0) throw DomainError("gap tolerances must be positive");
  if (rho0 <= 0 || rho_max < rho0 || phi < 0 || sigma <= 0 || sigma >= 1)
    throw DomainError("bad penalty parameters");
  if (max_outer < 1) throw DomainError("max_outer must be >= 1");
}

double objective(const MultiModalNetwork& net, const FlowState& z) {
  const Eigen::VectorXd total = z.total_link_flow(net);
  const CostEval eval = travel_time(net, total);
  return eval.time.dot(total);
}

FlowState objective_seed(const MultiModalNetwork& net, const FlowState& z,
                         bool paper_simplified, const CostOptions& opts) {
  const Eigen::VectorXd total = z.total_link_flow(net);
  const CostEval eval = travel_time(net, total, opts);
  const Eigen::SparseMatrix<double> jac = travel_time_jacobian(net, total, opts);
  Eigen::VectorXd y;
  if (paper_simplified) {
    y = eval.time;
    for (int k = 0; k < jac.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(jac, k); it; ++it)
        if (it.row() == it.col()) y[it.row()] += total[it.row()] * it.value();
  } else {
    y = eval.time + jac.transpose() * total;
  }
  FlowState seed = FlowState::zero(net);
  const auto& ms = net.maas_space();
  const auto& ns = net.nonmaas_space();
  for (int i = 0; i < ms.num_links(); ++i)
    seed.x.row(i).setConstant(y[ms.link_ids[i]]);
  for (int i = 0; i < ns.num_links(); ++i)
    seed.xt.row(i).setConstant(y[ns.link_ids[i]]);
  return seed;
}

Eigen::VectorXd gradient(const MultiModalNetwork& net, const FlowState& z,
                         const Eigen::MatrixXd& jacobian, bool paper_simplified,
                         const CostOptions& opts) {
  const FlowState seed = objective_seed(net, z, paper_simplified, opts);
  if (jacobian.rows() != seed.flat_size())
    throw DomainError("jacobian/flow dimension mismatch");
  return jacobian.transpose() * seed.flatten();
}

void nesterov_update(Eigen::VectorXd& q, Eigen::VectorXd& omega,
                     const Eigen::VectorXd& grad, double alpha, double beta,
                     const Eigen::VectorXd& q_max) {
  omega = beta * omega - alpha * grad;
  q = (q - alpha * grad + beta * omega).cwiseMax(0.0).cwiseMin(q_max);
}

void multiplier_update(MultiplierState& mult, const MultiModalNetwork& net,
                       const Eigen::VectorXd& total_flow,
                       const Eigen::VectorXd& total_flow_prev, double phi,
                       double sigma, double rho_max) {
  bool stagnant = false;
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    const Link& link = net.links()[lid];
    const double excess = total_flow[lid] - link.capacity;
    mult.mu[lid] = std::max(0.0, mult.mu[lid] + mult.rho * excess);
    const double viol = std::max(0.0, excess);
    const double viol_prev = std::max(0.0, total_flow_prev[lid] - link.capacity);
    if (viol > 0 && viol >= sigma * viol_prev) stagnant = true;
  }
  if (stagnant) mult.rho = std::min(mult.rho + phi, rho_max);
}

std::pair<double, double> gaps(const Eigen::VectorXd& q,
                               const Eigen::VectorXd& q_prev, const FlowState& z,
                               const FlowState& z_prev) {
  const double qn = q_prev.norm();
  const double zn = z_prev.norm();
  const double gq = qn > 0 ? (q - q_prev).norm() / qn : (q - q_prev).norm();
  const double gz = zn > 0 ? (z - z_prev).norm() / zn : (z - z_prev).norm();
  return {gq, gz};
}

Potentials node_potentials(const MultiModalNetwork& net,
                           const Eigen::VectorXd& time,
                           const Eigen::VectorXd& mu) {
  const int nw = net.num_ods();
  Potentials p;
  p.pi.resize(nw);
  p.pi_tilde.resize(nw);
  p.maas_time.resize(nw);
  p.nonmaas_time.resize(nw);
  p.nonmaas_fare.resize(nw);

  Eigen::VectorXd cost_m(net.num_links()), cost_n(net.num_links());
  for (const Link& l : net.links()) {
    cost_m[l.id] = time[l.id] + mu[l.id];
    cost_n[l.id] = time[l.id] + mu[l.id] + l.nonmaas_fare();
  }

  auto run = [&](bool maas) {
    const ClassSpace& space = maas ? net.maas_space() : net.nonmaas_space();
    const Eigen::VectorXd& cost = maas ? cost_m : cost_n;
    auto usable = [maas](const Link& l) { return maas ? l.maas_ok : l.nonmaas_ok; };
    for (int b = 0; b < space.num_origins(); ++b) {
      const auto tree =
          shortest_paths_from(net, space.origins[b], cost, usable);
      for (int w = 0; w < nw; ++w) {
        if (space.origin_block[w] != b) continue;
        const ODPair& od = net.od_pairs()[w];
        const int dest = maas ? od.maas_dest_node : od.nonmaas_dest_node;
        const double dist = tree.dist[dest];
        double t_sum = 0, fare_sum = 0;
        if (std::isfinite(dist)) {
          for (int lid : extract_path(tree, net, dest)) {
            t_sum += time[lid];
            fare_sum += net.links()[lid].nonmaas_fare();
          }
        } else {
          t_sum = fare_sum = kInf;
        }
        if (maas) {
          p.pi[w] = dist;
          p.maas_time[w] = t_sum;
        } else {
          p.pi_tilde[w] = dist;
          p.nonmaas_time[w] = t_sum;
          p.nonmaas_fare[w] = fare_sum;
        }
      }
    }
  };
  run(true);
  run(false);
  return p;
}

Eigen::VectorXd capacity_purchase(const MultiModalNetwork& net,
                                  const FlowState& flows, const CostEval& cost) {
  const Eigen::VectorXd maas_flow = flows.class_link_flow(net, true);
  Eigen::VectorXd k = Eigen::VectorXd::Zero(net.num_links());
  for (const Link& link : net.links()) {
    if (link.kind == LinkKind::MTRegular) {
      k[link.id] = maas_flow[link.id];
    } else if (is_mod_regular(link.kind)) {
      k[link.id] = cost.time[link.id] * maas_flow[link.id];
    }
  }
  return k;
}

namespace {

struct LoopState {
  Eigen::VectorXd q;
  FlowState flows;
  MultiplierState mult;
  Eigen::VectorXd total_flow;
};

void finalize(const MultiModalNetwork& net, const AlgorithmParams& params,
              AssignmentResult& result) {
  const Eigen::VectorXd total = result.flows.total_link_flow(net);
  result.cost = travel_time(net, total, params.cost);
  result.objective = result.cost.time.dot(total);
  result.potentials = node_potentials(net, result.cost.time, result.mult.mu);
  result.capacity = capacity_purchase(net, result.flows, result.cost);
  double viol = 0;
  for (int lid : net.links_of_kind(LinkKind::MTRegular))
    viol = std::max(viol, total[lid] - net.links()[lid].capacity);
  result.max_violation = viol;
}

void log_row(const AlgorithmParams& params, int outer, double objective,
             double gq, double gz, double viol, double rho, int inner) {
  if (!params.log_csv) return;
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%d,%.10e,%.6e,%.6e,%.6e,%.3f,%d\n", outer,
                objective, gq, gz, viol, rho, inner);
  *params.log_csv << buf;
}

}  // namespace

AssignmentResult solve_fixed_demand(const MultiModalNetwork& net,
                                    const Eigen::VectorXd& q,
                                    const AlgorithmParams& params,
                                    const FlowState* init) {
  params.check();
  AssignmentResult result;
  result.q = q;

  MultiplierState mult = MultiplierState::zero(net, params.rho0);
  FlowState flows = init ? *init : FlowState::zero(net);
  Eigen::VectorXd prev_total = flows.total_link_flow(net);

  VIOptions vi;
  vi.iterations = params.inner_iterations;
  vi.gamma = params.gamma;
  vi.cost = params.cost;
  vi.compute_fixed_point_residual = false;

  if (params.log_csv)
    *params.log_csv << "outer,objective,gap_q,gap_z,max_violation,rho,inner\n";

  bool converged = false;
  int outer = 0;
  for (; outer < params.max_outer; ++outer) {
    EquilibriumSolution sol = solve_vi(net, q, &flows, mult, vi);
    const Eigen::VectorXd total = sol.z.total_link_flow(net);
    const auto [gq, gz] = gaps(q, q, sol.z, flows);
    double viol = 0;
    for (int lid : net.links_of_kind(LinkKind::MTRegular))
      viol = std::max(viol, total[lid] - net.links()[lid].capacity);
    multiplier_update(mult, net, total, prev_total, params.phi, params.sigma,
                      params.rho_max);
    flows = sol.z;
    prev_total = total;
    result.history.push_back({objective(net, flows), gq, gz, viol, mult.rho,
                              static_cast<double>(vi.iterations)});
    log_row(params, outer, result.history.back()[0], gq, gz, viol, mult.rho,
            vi.iterations);
    if (gz < params.tol_z && viol < params.capacity_tol) {
      converged = true;
      ++outer;
      break;
    }
  }
  result.q = q;
  result.flows = flows;
  result.mult = mult;
  result.converged = converged;
  result.outer_iterations = outer;
  auto [gq, gz] = result.history.empty()
                      ? std::pair<double, double>{0, 0}
                      : std::pair<double, double>{result.history.back()[1],
                                                  result.history.back()[2]};
  result.gap_q = gq;
  result.gap_z = gz;
  finalize(net, params, result);
  return result;
}

AssignmentResult solve_assignment(const MultiModalNetwork& net,
                                  const AlgorithmParams& params,
                                  const Eigen::VectorXd& q0,
                                  const FlowState* z0) {
  params.check();
  const int nw = net.num_ods();
  if (q0.size() != nw) throw DomainError("q0 size mismatch");
  Eigen::VectorXd q_max(nw);
  for (int w = 0; w < nw; ++w) q_max[w] = net.od_pairs()[w].demand;

  AssignmentResult result;
  Eigen::VectorXd q = q0.cwiseMax(0.0).cwiseMin(q_max);
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(nw);
  MultiplierState mult = MultiplierState::zero(net, params.rho0);
  FlowState flows = z0 ? *z0 : FlowState::zero(net);
  Eigen::VectorXd prev_total = flows.total_link_flow(net);

  VIOptions vi;
  vi.gamma = params.gamma;
  vi.cost = params.cost;
  vi.keep_trace = true;
  vi.compute_fixed_point_residual = false;
  int inner = params.inner_iterations;
  bool shrink_inner = false;

  // Step-size diagnostic on the warm-start flow box.
  {
    std::vector<Eigen::VectorXd> points;
    points.push_back(prev_total);
    Eigen::VectorXd full = Eigen::VectorXd::Constant(
        net.num_links(), net.total_demand() / std::max(1, net.num_links() / 4));
    points.push_back(full);
    MultiplierState probe = mult;
    probe.rho = params.rho_max;
    result.sampled_lipschitz = sampled_lipschitz(net, points, probe, params.cost);
    if (params.log && params.gamma >= 2.0 / std::max(result.sampled_lipschitz, 1e-12))
      *params.log << "warning: step gamma=" << params.gamma
                  << " exceeds 2/L with sampled L=" << result.sampled_lipschitz
                  << "\n";
  }

  if (params.log_csv)
    *params.log_csv << "outer,objective,gap_q,gap_z,max_violation,rho,inner\n";

  bool converged = false;
  int outer = 0;
  for (; outer < params.max_outer; ++outer) {
    vi.iterations = inner;
    EquilibriumSolution sol = solve_vi(net, q, &flows, mult, vi);
    const Eigen::VectorXd total = sol.z.total_link_flow(net);

    const FlowState seed =
        objective_seed(net, sol.z, params.paper_simplified_gradient, params.cost);
    Eigen::VectorXd grad;
    if (params.use_full_jacobian) {
      const Eigen::MatrixXd jac = equilibrium_jacobian(
          net, q, sol, JacobianMode::Unrolled, mult, vi);
      grad = jac.transpose() * seed.flatten();
    } else {
      grad = unrolled_gradient(net, sol, seed, mult, vi);
    }

    const Eigen::VectorXd q_prev = q;
    nesterov_update(q, omega, grad, params.alpha, params.beta, q_max);

    double viol = 0;
    for (int lid : net.links_of_kind(LinkKind::MTRegular))
      viol = std::max(viol, total[lid] - net.links()[lid].capacity);
    multiplier_update(mult, net, total, prev_total, params.phi, params.sigma,
                      params.rho_max);

    const auto [gq, gz] = gaps(q, q_prev, sol.z, flows);
    flows = sol.z;
    prev_total = total;
    result.history.push_back({objective(net, flows), gq, gz, viol, mult.rho,
                              static_cast<double>(inner)});
    log_row(params, outer, result.history.back()[0], gq, gz, viol, mult.rho,
            inner);

    result.gap_q = gq;
    result.gap_z = gz;
    if (gq < params.tol_q && gz < params.tol_z && viol < params.capacity_tol) {
      converged = true;
      ++outer;
      break;
    }
    if (!shrink_inner && gq < 10 * params.tol_q && gz < 10 * params.tol_z)
      shrink_inner = true;
    if (shrink_inner) inner = std::max(params.min_inner, inner - 1);
  }

  result.q = q;
  result.flows = flows;
  result.mult = mult;
  result.converged = converged;
  result.outer_iterations = outer;
  finalize(net, params, result);
  return result;
}

}  // namespace maas
