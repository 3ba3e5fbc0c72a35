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

#include "maas/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "maas/paths.hpp"
#include "maas/shortest_path.hpp"

namespace maas {

Eigen::VectorXd lambda_weights(const MultiModalNetwork& net,
                               const Eigen::VectorXd& time, double eta) {
  if (eta < 0) throw DomainError("capacity price factor must be nonnegative");
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(net.num_links());
  for (const Link& link : net.links()) {
    switch (link.kind) {
      case LinkKind::MoDRegular1:
      case LinkKind::MoDRegular2:
        lambda[link.id] = link.fare;
        break;
      case LinkKind::MTRegular:
        lambda[link.id] = eta * link.fare;
        break;
      case LinkKind::MTAccess:
        lambda[link.id] = 0.5 * time[link.id];
        break;
      default:
        break;
    }
  }
  return lambda;
}

Eigen::VectorXd tau_min(const MultiModalNetwork& net, const Eigen::VectorXd& time,
                        const Eigen::VectorXd& mu) {
  Eigen::VectorXd cost(net.num_links());
  for (const Link& l : net.links())
    cost[l.id] = time[l.id] + mu[l.id] + l.planning_cost;
  const ClassSpace& space = net.nonmaas_space();
  Eigen::VectorXd tau(net.num_ods());
  for (int b = 0; b < space.num_origins(); ++b) {
    const auto tree = shortest_paths_from(
        net, space.origins[b], cost, [](const Link& l) { return l.nonmaas_ok; });
    for (int w = 0; w < net.num_ods(); ++w) {
      if (space.origin_block[w] != b) continue;
      tau[w] = tree.dist[net.od_pairs()[w].nonmaas_dest_node];
    }
  }
  return tau;
}

LambdaMinResult lambda_min(const MultiModalNetwork& net, const FlowState& flows,
                           const Eigen::VectorXd& lambda, const Eigen::VectorXd& q,
                           double rel_threshold) {
  const int nw = net.num_ods();
  const ClassSpace& space = net.maas_space();
  LambdaMinResult result;
  result.value = Eigen::VectorXd::Zero(nw);
  result.cyclic.assign(nw, 0);
  result.connected.assign(nw, 1);

  for (int w = 0; w < nw; ++w) {
    if (q[w] <= 0) continue;
    const int block = space.origin_block[w];
    const double threshold = rel_threshold * q[w];
    std::vector<int> used;
    for (int i = 0; i < space.num_links(); ++i)
      if (flows.x(i, block) > threshold) used.push_back(space.link_ids[i]);

    // Positive generalized costs make the used subgraph a bush; verify and
    // fall back to the same shortest-path scan if a cycle slips through.
    std::vector<int> indeg(net.num_nodes(), 0);
    for (int lid : used) indeg[net.links()[lid].head]++;
    std::queue<int> ready;
    for (int v = 0; v < net.num_nodes(); ++v)
      if (indeg[v] == 0) ready.push(v);
    int seen = 0;
    std::vector<std::vector<int>> out(net.num_nodes());
    for (int lid : used) out[net.links()[lid].tail].push_back(lid);
    while (!ready.empty()) {
      const int v = ready.front();
      ready.pop();
      ++seen;
      for (int lid : out[v])
        if (--indeg[net.links()[lid].head] == 0) ready.push(net.links()[lid].head);
    }
    if (seen < net.num_nodes()) result.cyclic[w] = 1;

    std::set<int> used_set(used.begin(), used.end());
    const auto tree = shortest_paths_from(
        net, net.od_pairs()[w].maas_origin_node, lambda,
        [&](const Link& l) { return used_set.count(l.id) > 0; });
    const double dist = tree.dist[net.od_pairs()[w].maas_dest_node];
    if (std::isfinite(dist)) {
      result.value[w] = dist;
    } else {
      result.connected[w] = 0;
      result.value[w] = 0;  // conservative: tightens the fare bound
    }
  }
  return result;
}

double ps_lower_bound(const PricingInputs& inputs, int* binding_op) {
  double bound = 0;
  int op = -1;
  for (size_t m = 0; m < inputs.revenue_floor.size(); ++m) {
    const double gap = inputs.revenue_floor[m] - inputs.nonmaas_revenue[m];
    const double volume = inputs.weighted_maas_volume[m];
    if (gap > 0 && volume <= 1e-12) {
      const std::string id =
          m < inputs.operator_ids.size() ? inputs.operator_ids[m]
                                         : std::to_string(m);
      throw InfeasiblePricingError(
          "operator " + id +
          " has a revenue floor above its non-platform revenue and no "
          "weighted platform volume");
    }
    if (volume > 1e-12) {
      const double ratio = gap / volume;
      if (ratio > bound) {
        bound = ratio;
        op = static_cast<int>(m);
      }
    }
  }
  if (binding_op) *binding_op = op;
  return bound;
}

PricingInputs build_pricing_inputs(const MultiModalNetwork& net,
                                   const AssignmentResult& assignment,
                                   const Eigen::VectorXd& utility, double eta,
                                   const std::vector<double>& floor_override) {
  PricingInputs in;
  in.q = assignment.q;
  in.pi = assignment.potentials.pi;
  in.utility = utility;

  const Eigen::VectorXd lambda = lambda_weights(net, assignment.cost.time, eta);
  in.tau_min = tau_min(net, assignment.cost.time, assignment.mult.mu);
  in.lambda_min =
      lambda_min(net, assignment.flows, lambda, assignment.q).value;

  const Eigen::VectorXd x_maas = assignment.flows.class_link_flow(net, true);
  const Eigen::VectorXd x_non = assignment.flows.class_link_flow(net, false);
  const int nops = static_cast<int>(net.operators().size());
  in.operator_ids.resize(nops);
  in.revenue_floor.resize(nops);
  in.nonmaas_revenue.assign(nops, 0.0);
  in.weighted_maas_volume.assign(nops, 0.0);
  for (int m = 0; m < nops; ++m) {
    in.operator_ids[m] = net.operators()[m].id;
    in.revenue_floor[m] = m < static_cast<int>(floor_override.size())
                              ? floor_override[m]
                              : net.operators()[m].revenue_floor;
    for (int lid : net.operator_regular_links(m)) {
      in.nonmaas_revenue[m] += net.links()[lid].fare * x_non[lid];
      in.weighted_maas_volume[m] += lambda[lid] * x_maas[lid];
    }
  }
  in.total_weighted_volume = lambda.dot(x_maas);
  return in;
}

PricingScheme solve_pricing(const PricingInputs& inputs) {
  const int nw = inputs.num_ods();
  if (inputs.q.sum() <= 0)
    throw DomainError("pricing requires positive served demand");

  PricingScheme scheme;
  int binding_op = -1;
  const double ps_floor = ps_lower_bound(inputs, &binding_op);
  scheme.binding_floor_operator = binding_op;

  auto fare_at = [&](int w, double ps) {
    const double cap_bound = inputs.utility[w] - inputs.pi[w];
    const double stab_bound =
        inputs.tau_min[w] - inputs.pi[w] + ps * inputs.lambda_min[w];
    return std::min(cap_bound, stab_bound);
  };
  auto profit_at = [&](double ps) {
    double profit = -ps * inputs.total_weighted_volume;
    for (int w = 0; w < nw; ++w)
      if (inputs.q[w] > 0) profit += inputs.q[w] * fare_at(w, ps);
    return profit;
  };

  // The profile is concave piecewise-linear in the capacity price; kinks sit
  // where the stability bound overtakes the payoff bound.
  std::vector<double> candidates{ps_floor};
  for (int w = 0; w < nw; ++w) {
    if (inputs.q[w] <= 0 || inputs.lambda_min[w] <= 1e-14) continue;
    const double kink =
        (inputs.utility[w] - inputs.tau_min[w]) / inputs.lambda_min[w];
    if (std::isfinite(kink) && kink > ps_floor) candidates.push_back(kink);
  }
  std::sort(candidates.begin(), candidates.end());

  double best_ps = candidates.front();
  double best_profit = profit_at(best_ps);
  for (size_t i = 1; i < candidates.size(); ++i) {
    const double p = profit_at(candidates[i]);
    if (p > best_profit + 1e-15) {
      best_profit = p;
      best_ps = candidates[i];
    }
  }

  scheme.p_s = best_ps;
  scheme.profit = best_profit;
  scheme.optimum_at_lower_bound = best_ps <= ps_floor + 1e-15;
  scheme.p_d.resize(nw);
  for (int w = 0; w < nw; ++w) scheme.p_d[w] = fare_at(w, best_ps);

  // Uniqueness diagnostics, served ODs only.
  const double mean_volume = inputs.total_weighted_volume / std::max(nw, 1);
  double ratio_lo = kInf, ratio_hi = -kInf;
  for (int w = 0; w < nw; ++w) {
    if (inputs.q[w] <= 0) continue;
    if (std::abs(inputs.q[w] * inputs.lambda_min[w] - mean_volume) >
        1e-9 * std::max(1.0, mean_volume))
      scheme.unique_cond_volume = true;
    if (inputs.lambda_min[w] > 1e-14) {
      const double r =
          (inputs.utility[w] - inputs.tau_min[w]) / inputs.lambda_min[w];
      ratio_lo = std::min(ratio_lo, r);
      ratio_hi = std::max(ratio_hi, r);
    }
  }
  scheme.unique_cond_ratio = ratio_hi - ratio_lo > 1e-9;
  return scheme;
}

namespace {

struct PathEconomics {
  double generalized_cost = 0;  // time + mu
  double nonmaas_fares = 0;     // fares + planning, traveler side
  double operator_fares = 0;    // fares accruing to operators
  double lambda_sum = 0;
};

PathEconomics path_economics(const MultiModalNetwork& net,
                             const std::vector<int>& path,
                             const Eigen::VectorXd& time,
                             const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& lambda) {
  PathEconomics e;
  for (int lid : path) {
    const Link& link = net.links()[lid];
    e.generalized_cost += time[lid] + mu[lid];
    e.nonmaas_fares += link.nonmaas_fare();
    if (link.op >= 0) e.operator_fares += link.fare;
    e.lambda_sum += lambda[lid];
  }
  return e;
}

}  // namespace

StabilityReport check_stability(const MultiModalNetwork& net,
                                const AssignmentResult& assignment,
                                const PricingScheme& scheme,
                                const Eigen::VectorXd& utility, int hop_budget) {
  StabilityReport report;
  const ClassSpace& space = net.maas_space();
  const Eigen::VectorXd& time = assignment.cost.time;
  const Eigen::VectorXd& mu = assignment.mult.mu;
  const Eigen::VectorXd& lambda = scheme.lambda;
  if (lambda.size() != net.num_links())
    throw DomainError("stability check needs per-link lambda weights");

  for (int w = 0; w < net.num_ods(); ++w) {
    if (assignment.q[w] <= 0) continue;
    const PathSet paths = enumerate_paths(net, w, hop_budget);
    report.partial = report.partial || paths.truncated;

    const int block = space.origin_block[w];
    const double threshold = 1e-6 * assignment.q[w];
    auto used = [&](int lid) {
      const int col = space.link_col[lid];
      return col >= 0 && assignment.flows.x(col, block) > threshold;
    };

    double matched_total = kInf;
    double unmatched_total = -kInf;
    bool any_matched = false;
    for (const auto& path : paths.maas) {
      const PathEconomics e = path_economics(net, path, time, mu, lambda);
      const double total = (utility[w] - e.generalized_cost - scheme.p_d[w]) +
                           scheme.p_s * e.lambda_sum;
      const bool is_matched =
          std::all_of(path.begin(), path.end(), used);
      if (is_matched) {
        matched_total = std::min(matched_total, total);
        any_matched = true;
      } else {
        unmatched_total = std::max(unmatched_total, total);
      }
      ++report.paths_checked;
    }
    double outside_total = -kInf;
    for (const auto& path : paths.nonmaas) {
      const PathEconomics e = path_economics(net, path, time, mu, lambda);
      const double total =
          (utility[w] - e.generalized_cost - e.nonmaas_fares) + e.operator_fares;
      outside_total = std::max(outside_total, total);
      ++report.paths_checked;
    }
    if (!any_matched) continue;
    if (std::isfinite(unmatched_total))
      report.worst_within_platform = std::max(
          report.worst_within_platform, unmatched_total - matched_total);
    if (std::isfinite(outside_total))
      report.worst_defection =
          std::max(report.worst_defection, outside_total - matched_total);
  }
  return report;
}

SweepObjective sweep_objective_from_string(const std::string& s) {
  if (s == "platform") return SweepObjective::Platform;
  if (s == "traveler") return SweepObjective::Traveler;
  if (s == "operator") return SweepObjective::Operator;
  throw ConfigError("unknown sweep objective: " + s);
}

SweepResult scenario_sweep(const MultiModalNetwork& net,
                           const AssignmentResult& assignment,
                           const Eigen::VectorXd& utility,
                           const std::vector<double>& eta_grid,
                           SweepObjective objective,
                           const std::vector<double>& floor_override) {
  SweepResult result;
  for (double eta : eta_grid) {
    SweepRow row;
    row.eta = eta;
    try {
      const PricingInputs inputs =
          build_pricing_inputs(net, assignment, utility, eta, floor_override);
      PricingScheme scheme = solve_pricing(inputs);
      scheme.eta = eta;
      scheme.lambda = lambda_weights(net, assignment.cost.time, eta);
      const PayoffReport payoffs =
          compute_payoffs(net, assignment, scheme, utility);
      row.feasible = true;
      row.p_s = scheme.p_s;
      row.profit = scheme.profit;
      row.operator_revenue = payoffs.operator_revenue;
      double cost = 0;
      for (int w = 0; w < net.num_ods(); ++w) {
        const ODPair& od = net.od_pairs()[w];
        cost += assignment.q[w] * payoffs.maas_cost[w] +
                (od.demand - assignment.q[w]) * payoffs.nonmaas_cost[w];
      }
      row.traveler_cost = cost;
    } catch (const Error& e) {
      row.feasible = false;
      row.note = e.what();
    }
    result.rows.push_back(std::move(row));
  }

  auto better = [&](const SweepRow& a, const SweepRow& b) {
    switch (objective) {
      case SweepObjective::Platform:
        return a.profit > b.profit;
      case SweepObjective::Traveler:
        return a.traveler_cost < b.traveler_cost;
      case SweepObjective::Operator: {
        double ra = 0, rb = 0;
        for (double r : a.operator_revenue) ra += r;
        for (double r : b.operator_revenue) rb += r;
        return ra > rb;
      }
    }
    return false;
  };
  for (size_t i = 0; i < result.rows.size(); ++i) {
    const SweepRow& row = result.rows[i];
    if (!row.feasible) continue;
    if (objective != SweepObjective::Platform && row.profit < -1e-9) continue;
    if (result.best < 0 || better(row, result.rows[result.best]))
      result.best = static_cast<int>(i);
  }
  return result;
}

PayoffReport compute_payoffs(const MultiModalNetwork& net,
                             const AssignmentResult& assignment,
                             const PricingScheme& scheme,
                             const Eigen::VectorXd& utility) {
  const int nw = net.num_ods();
  PayoffReport report;
  report.maas_cost.resize(nw);
  report.nonmaas_cost.resize(nw);
  report.maas_saving.resize(nw);
  report.nonmaas_saving.resize(nw);
  report.fare_time_ratio_maas = Eigen::VectorXd::Constant(nw, 0);
  report.fare_time_ratio_nonmaas = Eigen::VectorXd::Constant(nw, 0);

  const Potentials& pot = assignment.potentials;
  for (int w = 0; w < nw; ++w) {
    report.maas_cost[w] = pot.pi[w] + scheme.p_d[w];
    report.nonmaas_cost[w] = pot.pi_tilde[w];
    report.maas_saving[w] = utility[w] - report.maas_cost[w];
    report.nonmaas_saving[w] = utility[w] - report.nonmaas_cost[w];
    if (pot.maas_time[w] > 0 && std::isfinite(pot.maas_time[w]))
      report.fare_time_ratio_maas[w] = scheme.p_d[w] / pot.maas_time[w];
    if (pot.nonmaas_time[w] > 0 && std::isfinite(pot.nonmaas_time[w]))
      report.fare_time_ratio_nonmaas[w] =
          pot.nonmaas_fare[w] / pot.nonmaas_time[w];
    if (scheme.p_d[w] < 0 && assignment.q[w] > 1e-9)
      report.compensated.push_back(w);
  }

  const Eigen::VectorXd x_maas = assignment.flows.class_link_flow(net, true);
  const Eigen::VectorXd x_non = assignment.flows.class_link_flow(net, false);
  report.operator_revenue.assign(net.operators().size(), 0.0);
  for (size_t m = 0; m < net.operators().size(); ++m) {
    double revenue = 0;
    for (int lid : net.operator_links(static_cast<int>(m))) {
      revenue += scheme.p_s * scheme.lambda[lid] * x_maas[lid];
      revenue += net.links()[lid].fare * x_non[lid];
    }
    report.operator_revenue[m] = revenue;
  }
  report.platform_profit =
      assignment.q.dot(scheme.p_d) - scheme.p_s * scheme.lambda.dot(x_maas);
  return report;
}

}  // namespace maas
