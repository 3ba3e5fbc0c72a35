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

#include "maas/equilibrium.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace maas {

namespace {

void check_finite(const MultiModalNetwork& net, const FlowState& z) {
  if (z.x.allFinite() && z.xt.allFinite()) return;
  for (int j = 0; j < z.x.cols(); ++j)
    for (int i = 0; i < z.x.rows(); ++i)
      if (!std::isfinite(z.x(i, j)))
        throw DivergenceError(
            "non-finite MaaS flow on link " +
            std::to_string(net.maas_space().link_ids[i]));
  for (int j = 0; j < z.xt.cols(); ++j)
    for (int i = 0; i < z.xt.rows(); ++i)
      if (!std::isfinite(z.xt(i, j)))
        throw DivergenceError(
            "non-finite non-MaaS flow on link " +
            std::to_string(net.nonmaas_space().link_ids[i]));
}

double mt_capacity_violation(const MultiModalNetwork& net,
                             const Eigen::VectorXd& total_flow) {
  double v = 0;
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    const Link& link = net.links()[lid];
    v = std::max(v, total_flow[lid] - link.capacity);
  }
  return v;
}

}  // namespace

FlowState project_nonneg(const FlowState& z) {
  return {z.x.cwiseMax(0.0), z.xt.cwiseMax(0.0)};
}

FlowState project_affine(const MultiModalNetwork& net, const FlowState& z,
                         const Demand& demand) {
  const ClassSpace& ms = net.maas_space();
  const ClassSpace& ns = net.nonmaas_space();
  FlowState out = z;
  if (ms.num_links() > 0 && ms.num_origins() > 0)
    out.x -= ms.pinv * (ms.incidence * z.x - demand.maas);
  if (ns.num_links() > 0 && ns.num_origins() > 0)
    out.xt -= ns.pinv * (ns.incidence * z.xt - demand.nonmaas);
  return out;
}

FlowState project_feasible(const MultiModalNetwork& net, const FlowState& z,
                           const Demand& demand, int max_iter, double tol) {
  FlowState x = z;
  FlowState p{Eigen::MatrixXd::Zero(z.x.rows(), z.x.cols()),
              Eigen::MatrixXd::Zero(z.xt.rows(), z.xt.cols())};
  FlowState q = p;
  for (int it = 0; it < max_iter; ++it) {
    const FlowState y1 = project_affine(net, x + p, demand);
    p = (x + p) - y1;
    const FlowState x_new = project_nonneg(y1 + q);
    q = (y1 + q) - x_new;
    const double change = (x_new - x).norm();
    x = x_new;
    if (change < tol) break;
  }
  return x;
}

double davis_yin_step(const MultiModalNetwork& net, SplitState& state,
                      double gamma, const MultiplierState& mult,
                      const Demand& demand, const CostOptions& cost_opts) {
  state.z = project_nonneg(state.u);
  check_finite(net, state.z);

  const Eigen::VectorXd total = state.z.total_link_flow(net);
  const CostEval eval = travel_time(net, total, cost_opts);
  const Eigen::VectorXd t_hat = augmented_time(net, eval, total, mult);
  Eigen::VectorXd cost_m, cost_n;
  class_costs(net, t_hat, cost_m, cost_n);

  FlowState w = {2.0 * state.z.x - state.u.x, 2.0 * state.z.xt - state.u.xt};
  w.x.colwise() -= gamma * cost_m;
  w.xt.colwise() -= gamma * cost_n;

  state.v = project_affine(net, w, demand);
  const double step = (state.v - state.z).norm();
  state.u = state.u + state.v - state.z;
  ++state.iter;
  return step;
}

EquilibriumSolution solve_vi(const MultiModalNetwork& net,
                             const Eigen::VectorXd& q,
                             const FlowState* warm_start,
                             const MultiplierState& mult, const VIOptions& opts) {
  if (opts.iterations < 1) throw DomainError("iteration count must be >= 1");
  EquilibriumSolution sol;
  sol.demand = net.demand_vector(q);
  sol.gamma = opts.gamma;

  SplitState state;
  state.u = warm_start ? *warm_start : FlowState::zero(net);
  state.z = state.u;
  state.v = state.u;

  if (opts.iteration_csv) *opts.iteration_csv << "iteration,residual\n";
  for (int n = 0; n < opts.iterations; ++n) {
    if (opts.keep_trace) sol.trace_u.push_back(state.u);
    const double step = davis_yin_step(net, state, opts.gamma, mult, sol.demand,
                                       opts.cost);
    sol.step_residuals.push_back(step);
    sol.step_residual = step;
    if (opts.iteration_csv) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%d,%.12e\n", n, step);
      *opts.iteration_csv << buf;
    }
  }
  sol.iterations = opts.iterations;
  sol.z = project_nonneg(state.u);
  sol.u = state.u;

  const Eigen::VectorXd total = sol.z.total_link_flow(net);
  sol.max_capacity_violation = mt_capacity_violation(net, total);
  sol.min_flow = std::min(sol.z.x.size() ? sol.z.x.minCoeff() : 0.0,
                          sol.z.xt.size() ? sol.z.xt.minCoeff() : 0.0);
  double affine = 0;
  {
    const ClassSpace& ms = net.maas_space();
    const ClassSpace& ns = net.nonmaas_space();
    if (ms.num_origins() > 0)
      affine = (ms.incidence * sol.z.x - sol.demand.maas).cwiseAbs().maxCoeff();
    if (ns.num_origins() > 0)
      affine = std::max(affine, (ns.incidence * sol.z.xt - sol.demand.nonmaas)
                                    .cwiseAbs()
                                    .maxCoeff());
  }
  sol.affine_violation = affine;

  if (opts.compute_fixed_point_residual) {
    const CostEval eval = travel_time(net, total, opts.cost);
    const Eigen::VectorXd t_hat = augmented_time(net, eval, total, mult);
    Eigen::VectorXd cost_m, cost_n;
    class_costs(net, t_hat, cost_m, cost_n);
    FlowState step = sol.z;
    step.x.colwise() -= opts.gamma * cost_m;
    step.xt.colwise() -= opts.gamma * cost_n;
    sol.residual = (sol.z - project_feasible(net, step, sol.demand)).norm();
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Differentiation through the iterations
// ---------------------------------------------------------------------------

namespace {

struct ActiveMask {
  Eigen::ArrayXXd x, xt;  // 1 where u > 0
};

ActiveMask active_mask(const FlowState& u) {
  return {(u.x.array() > 0.0).cast<double>(),
          (u.xt.array() > 0.0).cast<double>()};
}

FlowState apply_mask(const ActiveMask& m, const FlowState& d) {
  return {(m.x * d.x.array()).matrix(), (m.xt * d.xt.array()).matrix()};
}

// Forward sensitivity of one step for a single direction, sharing the cost
// Jacobian across directions.
struct StepLinearization {
  ActiveMask mask;
  Eigen::SparseMatrix<double> jac;  // augmented link jacobian at z_step
};

StepLinearization linearize_step(const MultiModalNetwork& net,
                                 const FlowState& u_before,
                                 const MultiplierState& mult,
                                 const CostOptions& cost_opts) {
  StepLinearization lin;
  lin.mask = active_mask(u_before);
  const FlowState z = project_nonneg(u_before);
  lin.jac = augmented_jacobian(net, z.total_link_flow(net), mult, cost_opts);
  return lin;
}

}  // namespace

Eigen::MatrixXd equilibrium_jacobian(const MultiModalNetwork& net,
                                     const Eigen::VectorXd& q,
                                     const EquilibriumSolution& solution,
                                     JacobianMode mode,
                                     const MultiplierState& mult,
                                     const VIOptions& opts, double fd_step) {
  const int nq = net.num_ods();
  if (mode == JacobianMode::FiniteDifference) {
    VIOptions fd_opts = opts;
    fd_opts.keep_trace = false;
    fd_opts.compute_fixed_point_residual = false;
    fd_opts.iteration_csv = nullptr;
    const FlowState* warm =
        solution.trace_u.empty() ? nullptr : &solution.trace_u.front();
    Eigen::MatrixXd jac(FlowState::zero(net).flat_size(), nq);
    for (int w = 0; w < nq; ++w) {
      const double h = fd_step * std::max(1.0, std::abs(q[w]));
      const double lo = std::max(0.0, q[w] - h);
      const double hi = std::min(net.od_pairs()[w].demand, q[w] + h);
      Eigen::VectorXd qp = q, qm = q;
      qp[w] = hi;
      qm[w] = lo;
      const auto zp = solve_vi(net, qp, warm, mult, fd_opts).z.flatten();
      const auto zm = solve_vi(net, qm, warm, mult, fd_opts).z.flatten();
      jac.col(w) = (zp - zm) / (hi - lo);
    }
    return jac;
  }

  if (solution.trace_u.empty())
    throw StateError("unrolled jacobian requires a stored iteration trace");

  // Constant per-OD correction injected by the affine projection: the demand
  // derivative enters only the OD's own origin block.
  const ClassSpace& ms = net.maas_space();
  const ClassSpace& ns = net.nonmaas_space();
  std::vector<Eigen::VectorXd> dmaas(nq), dnonmaas(nq);
  std::vector<int> mblock(nq), nblock(nq);
  for (int w = 0; w < nq; ++w) {
    Eigen::VectorXd bm, bn;
    net.demand_derivative(w, bm, mblock[w], bn, nblock[w]);
    dmaas[w] = ms.pinv * bm;
    dnonmaas[w] = ns.pinv * bn;
  }

  std::vector<FlowState> du(nq, FlowState::zero(net));
  for (const FlowState& u_before : solution.trace_u) {
    const StepLinearization lin =
        linearize_step(net, u_before, mult, opts.cost);
    for (int w = 0; w < nq; ++w) {
      const FlowState dz = apply_mask(lin.mask, du[w]);
      FlowState dw = 2.0 * dz - du[w] - opts.gamma * lift_jvp(net, lin.jac, dz);
      FlowState dv = project_affine(net, dw, Demand{
          Eigen::MatrixXd::Zero(net.num_nodes(), ms.num_origins()),
          Eigen::MatrixXd::Zero(net.num_nodes(), ns.num_origins())});
      dv.x.col(mblock[w]) += dmaas[w];
      dv.xt.col(nblock[w]) += dnonmaas[w];
      du[w] = du[w] + dv - dz;
    }
  }
  const ActiveMask final_mask = active_mask(solution.u);
  Eigen::MatrixXd jac(FlowState::zero(net).flat_size(), nq);
  for (int w = 0; w < nq; ++w)
    jac.col(w) = apply_mask(final_mask, du[w]).flatten();
  return jac;
}

Eigen::VectorXd unrolled_gradient(const MultiModalNetwork& net,
                                  const EquilibriumSolution& solution,
                                  const FlowState& seed,
                                  const MultiplierState& mult,
                                  const VIOptions& opts) {
  if (solution.trace_u.empty())
    throw StateError("unrolled gradient requires a stored iteration trace");
  const ClassSpace& ms = net.maas_space();
  const ClassSpace& ns = net.nonmaas_space();
  const int nq = net.num_ods();

  // Adjoint state. dbar accumulates the cotangent of the demand matrices.
  FlowState ubar = apply_mask(active_mask(solution.u), seed);
  Eigen::MatrixXd dbar_m = Eigen::MatrixXd::Zero(net.num_nodes(), ms.num_origins());
  Eigen::MatrixXd dbar_n = Eigen::MatrixXd::Zero(net.num_nodes(), ns.num_origins());

  const Demand zero_demand{
      Eigen::MatrixXd::Zero(net.num_nodes(), ms.num_origins()),
      Eigen::MatrixXd::Zero(net.num_nodes(), ns.num_origins())};

  for (auto it = solution.trace_u.rbegin(); it != solution.trace_u.rend(); ++it) {
    const StepLinearization lin = linearize_step(net, *it, mult, opts.cost);
    // u' = u + v - z; v = (I - PA) w + P d; w = 2z - u - gamma F(z); z = mask u.
    const FlowState vbar = ubar;
    // Adjoint of the affine projection: wbar = (I - PA)^T vbar, dbar += P^T vbar.
    FlowState wbar = vbar;
    wbar.x -= ms.incidence.transpose() * (ms.pinv.transpose() * vbar.x);
    wbar.xt -= ns.incidence.transpose() * (ns.pinv.transpose() * vbar.xt);
    dbar_m += ms.pinv.transpose() * vbar.x;
    dbar_n += ns.pinv.transpose() * vbar.xt;
    // Through w.
    FlowState zbar = 2.0 * wbar - opts.gamma * lift_vjp(net, lin.jac, wbar);
    zbar = zbar - vbar;  // u' = u + v - z contributes -ubar to z
    FlowState unew = ubar - wbar;  // w = ... - u
    unew = unew + apply_mask(lin.mask, zbar);
    ubar = unew;
  }

  // Chain the demand cotangent back to q.
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(nq);
  for (int w = 0; w < nq; ++w) {
    const ODPair& od = net.od_pairs()[w];
    const int rb = ms.origin_block[w];
    const int nb = ns.origin_block[w];
    grad[w] = -dbar_m(od.maas_origin_node, rb) + dbar_m(od.maas_dest_node, rb) +
              dbar_n(od.nonmaas_origin_node, nb) - dbar_n(od.nonmaas_dest_node, nb);
  }
  return grad;
}

double sampled_lipschitz(const MultiModalNetwork& net,
                         const std::vector<Eigen::VectorXd>& flow_points,
                         const MultiplierState& mult,
                         const CostOptions& cost_opts) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  double worst = 0;
  for (const Eigen::VectorXd& flow : flow_points) {
    const Eigen::SparseMatrix<double> jac =
        augmented_jacobian(net, flow, mult, cost_opts);
    FlowState v = FlowState::zero(net);
    for (int j = 0; j < v.x.cols(); ++j)
      for (int i = 0; i < v.x.rows(); ++i) v.x(i, j) = normal(rng);
    for (int j = 0; j < v.xt.cols(); ++j)
      for (int i = 0; i < v.xt.rows(); ++i) v.xt(i, j) = normal(rng);
    double sigma = 0;
    for (int it = 0; it < 30; ++it) {
      const double n = v.norm();
      if (n < 1e-300) break;
      v = lift_vjp(net, jac, lift_jvp(net, jac, (1.0 / n) * v));
      sigma = std::sqrt(v.norm());
    }
    worst = std::max(worst, sigma);
  }
  return worst;
}

}  // namespace maas
