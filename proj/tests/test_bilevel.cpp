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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <sstream>

#include "doctest.h"
#include "maas/bilevel.hpp"
#include "maas/verification.hpp"
#include "testutil.hpp"

using namespace maas;

TEST_CASE("objective sums flow-weighted travel times") {
  const auto net = MultiModalNetwork::build(test::single_service_link(5.0, 6.0));
  SUBCASE("zero flows give zero") {
    CHECK(objective(net, FlowState::zero(net)) == 0.0);
  }
  SUBCASE("constant link with total flow ten") {
    FlowState z = FlowState::zero(net);
    z.x(0, 0) = 7.0;
    z.xt(0, 0) = 3.0;
    CHECK(objective(net, z) == doctest::Approx(60.0));
  }
}

TEST_CASE("objective matches the path-based sum at an oracle solution") {
  const auto net = MultiModalNetwork::build(test::parallel_routes());
  Eigen::VectorXd q(1);
  q << 4.0;
  const UEOracleResult oracle = ue_oracle(net, q);
  FlowState z = FlowState::zero(net);
  const auto& ms = net.maas_space();
  const auto& ns = net.nonmaas_space();
  for (int i = 0; i < ms.num_links(); ++i)
    z.x(i, 0) = oracle.maas_link_flow[ms.link_ids[i]];
  for (int i = 0; i < ns.num_links(); ++i)
    z.xt(i, 0) = oracle.nonmaas_link_flow[ns.link_ids[i]];

  const Eigen::VectorXd total = z.total_link_flow(net);
  const CostEval eval = travel_time(net, total);
  double path_sum_value = 0;
  for (int w = 0; w < net.num_ods(); ++w) {
    for (size_t p = 0; p < oracle.paths[w].maas.size(); ++p)
      path_sum_value += oracle.maas_path_flows[w][p] *
                        path_sum(oracle.paths[w].maas[p], eval.time);
    for (size_t p = 0; p < oracle.paths[w].nonmaas.size(); ++p)
      path_sum_value += oracle.nonmaas_path_flows[w][p] *
                        path_sum(oracle.paths[w].nonmaas[p], eval.time);
  }
  CHECK(objective(net, z) == doctest::Approx(path_sum_value).epsilon(1e-8));
}

TEST_CASE("gradient on a constant-time toy is the route time difference") {
  const auto net = MultiModalNetwork::build(test::unit_response_toy());
  Eigen::VectorXd q(1);
  q << 3.0;
  AlgorithmParams params = tuned_toy_params(net);
  VIOptions vi;
  vi.gamma = params.gamma;
  vi.iterations = 300;
  vi.keep_trace = true;
  const MultiplierState mult = MultiplierState::zero(net);
  const EquilibriumSolution sol = solve_vi(net, q, nullptr, mult, vi);

  // Moving one trip onto the platform adds the 5-minute service and removes
  // the 4-minute drive.
  const FlowState seed = objective_seed(net, sol.z, false);
  const Eigen::VectorXd grad = unrolled_gradient(net, sol, seed, mult, vi);
  CHECK(grad[0] == doctest::Approx(5.0 - 4.0).epsilon(1e-6));

  const Eigen::MatrixXd jac =
      equilibrium_jacobian(net, q, sol, JacobianMode::Unrolled, mult, vi);
  const Eigen::VectorXd grad_full = gradient(net, sol.z, jac, false);
  CHECK(grad_full[0] == doctest::Approx(grad[0]).epsilon(1e-10));
}

TEST_CASE("gradient against central differences of the bilevel objective") {
  double worst = 0;
  for (uint64_t seed : {2ull, 5ull, 12ull}) {
    worst = std::max(worst, gradient_agreement_error(seed));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("momentum demand update clamps into the box") {
  Eigen::VectorXd q(2), omega(2), q_max(2);
  q << 2.0, 3.0;
  omega << 0.0, 0.0;
  q_max << 5.0, 5.0;
  SUBCASE("zero gradient leaves the demand unchanged") {
    nesterov_update(q, omega, Eigen::VectorXd::Zero(2), 0.1, 0.5, q_max);
    CHECK(q[0] == doctest::Approx(2.0));
    CHECK(q[1] == doctest::Approx(3.0));
  }
  SUBCASE("large positive gradient clamps at zero") {
    Eigen::VectorXd g(2);
    g << 1e6, 1e6;
    nesterov_update(q, omega, g, 0.1, 0.5, q_max);
    CHECK(q[0] == 0.0);
    CHECK(q[1] == 0.0);
  }
  SUBCASE("large negative gradient clamps at the total demand") {
    Eigen::VectorXd g(2);
    g << -1e6, -1e6;
    nesterov_update(q, omega, g, 0.1, 0.5, q_max);
    CHECK(q[0] == 5.0);
    CHECK(q[1] == 5.0);
  }
  SUBCASE("momentum accumulates") {
    Eigen::VectorXd g(2);
    g << 1.0, -1.0;
    nesterov_update(q, omega, g, 0.1, 0.5, q_max);
    // omega' = -alpha g; q' = q - alpha g + beta omega'
    CHECK(omega[0] == doctest::Approx(-0.1));
    CHECK(q[0] == doctest::Approx(2.0 - 0.1 - 0.05));
    CHECK(q[1] == doctest::Approx(3.0 + 0.1 + 0.05));
  }
}

TEST_CASE("multiplier update follows the clamped rule") {
  const auto net = MultiModalNetwork::build(test::parallel_routes(true));
  const int mt = net.links_of_kind(LinkKind::MTRegular)[0];
  const double cap = net.links()[mt].capacity;

  SUBCASE("no violation leaves everything unchanged") {
    MultiplierState mult = MultiplierState::zero(net, 1.0);
    Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
    flow[mt] = 0.5 * cap;
    multiplier_update(mult, net, flow, flow, 0.1, 0.85, 200.0);
    CHECK(mult.mu[mt] == 0.0);
    CHECK(mult.rho == 1.0);
  }
  SUBCASE("violation of two raises the multiplier by two") {
    MultiplierState mult = MultiplierState::zero(net, 1.0);
    Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
    flow[mt] = cap + 2.0;
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(net.num_links());
    prev[mt] = cap + 10.0;  // decayed enough: rho stays
    multiplier_update(mult, net, flow, prev, 0.1, 0.85, 200.0);
    CHECK(mult.mu[mt] == doctest::Approx(2.0));
    CHECK(mult.rho == 1.0);
  }
  SUBCASE("stagnant violation bumps the penalty by phi") {
    MultiplierState mult = MultiplierState::zero(net, 1.0);
    Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
    flow[mt] = cap + 2.0;
    multiplier_update(mult, net, flow, flow, 0.1, 0.85, 200.0);
    CHECK(mult.rho == doctest::Approx(1.1));
  }
  SUBCASE("the penalty saturates at its cap") {
    MultiplierState mult = MultiplierState::zero(net, 199.95);
    Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
    flow[mt] = cap + 2.0;
    multiplier_update(mult, net, flow, flow, 0.1, 0.85, 200.0);
    CHECK(mult.rho == doctest::Approx(200.0));
  }
}

TEST_CASE("gaps are relative with an absolute fallback") {
  const auto net = MultiModalNetwork::build(test::single_service_link());
  FlowState z = FlowState::zero(net);
  SUBCASE("identical iterates") {
    Eigen::VectorXd q = Eigen::VectorXd::Ones(3);
    const auto [gq, gz] = gaps(q, q, z, z);
    CHECK(gq == 0.0);
    CHECK(gz == 0.0);
  }
  SUBCASE("doubling a uniform vector gives gap one") {
    Eigen::VectorXd q1 = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd q2 = 2.0 * q1;
    const auto [gq, gz] = gaps(q2, q1, z, z);
    CHECK(gq == doctest::Approx(1.0));
  }
  SUBCASE("zero previous iterate falls back to the absolute norm") {
    Eigen::VectorXd q0 = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd q1(2);
    q1 << 3.0, 4.0;
    const auto [gq, gz] = gaps(q1, q0, z, z);
    CHECK(gq == doctest::Approx(5.0));
  }
  SUBCASE("converged-scale gaps survive the arithmetic") {
    Eigen::VectorXd q1 = Eigen::VectorXd::Ones(1);
    Eigen::VectorXd q2 = q1;
    q2[0] += 9.56e-8;
    const auto [gq, gz] = gaps(q2, q1, z, z);
    CHECK(gq == doctest::Approx(9.56e-8).epsilon(1e-10));
  }
}

// At a box-boundary optimum the clamp subderivative convention flips the
// one-sided demand derivative, so the iterates cycle within an alpha-sized
// band around the optimum instead of settling on it. The oracle value is the
// boundary itself; assert the band.
TEST_CASE("platform captures everything when its service dominates") {
  const auto net = MultiModalNetwork::build(test::dominance_toy(true));
  AlgorithmParams params = tuned_toy_params(net);
  params.alpha = 0.05;
  params.beta = 0.2;
  params.max_outer = 400;
  const AssignmentResult result = solve_assignment(
      net, params, Eigen::VectorXd::Zero(net.num_ods()), nullptr);
  const double q_max = net.od_pairs()[0].demand;
  // Independent check: service strictly faster, so total time decreases in q
  // everywhere and the optimum sits at the upper bound.
  CHECK(result.q[0] >= q_max - 10 * params.alpha);
  CHECK(result.q[0] <= q_max + 1e-12);
}

TEST_CASE("no demand moves when driving dominates") {
  const auto net = MultiModalNetwork::build(test::dominance_toy(false));
  AlgorithmParams params = tuned_toy_params(net);
  params.alpha = 0.05;
  params.max_outer = 400;
  const AssignmentResult result = solve_assignment(
      net, params, Eigen::VectorXd::Zero(net.num_ods()), nullptr);
  CHECK(result.q[0] <= 10 * params.alpha);
  CHECK(result.q[0] >= 0.0);
}

TEST_CASE("outer loop keeps the demand split in its box") {
  const auto net =
      MultiModalNetwork::build(random_toy_config(21, ToyOptions{}));
  AlgorithmParams params = tuned_toy_params(net);
  params.alpha = 0.02;
  params.max_outer = 60;
  params.tol_q = 1e-14;  // force all iterations
  params.tol_z = 1e-14;
  std::ostringstream csv;
  params.log_csv = &csv;
  const AssignmentResult result = solve_assignment(
      net, params, Eigen::VectorXd::Zero(net.num_ods()), nullptr);
  CHECK(result.q.minCoeff() >= 0.0);
  for (int w = 0; w < net.num_ods(); ++w)
    CHECK(result.q[w] <= net.od_pairs()[w].demand + 1e-12);
  // One CSV row per outer iteration plus the header.
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        result.outer_iterations + 1);
}

TEST_CASE("smoothed objective trends down over the tail of the run") {
  // Seeds with interior optima and a real descent trajectory; box-boundary
  // instances cycle by construction and are covered elsewhere.
  for (uint64_t seed : {1ull, 2ull, 9ull}) {
    const auto net =
        MultiModalNetwork::build(random_toy_config(seed, ToyOptions{}));
    AlgorithmParams params = tuned_toy_params(net);
    params.alpha = 0.02;
    params.max_outer = 400;
    params.tol_q = 1e-13;
    params.tol_z = 1e-13;
    const AssignmentResult result = solve_assignment(
        net, params, Eigen::VectorXd::Zero(net.num_ods()), nullptr);
    REQUIRE(result.history.size() > 10);
    std::vector<double> ema;
    double value = result.history.front()[0];
    for (const auto& row : result.history) {
      value = 0.9 * value + 0.1 * row[0];
      ema.push_back(value);
    }
    const double scale = std::abs(ema.front()) + 1.0;
    for (size_t k = ema.size() / 2 + 1; k < ema.size(); ++k)
      CHECK(ema[k] <= ema[k - 1] + 1e-6 * scale);
  }
}

TEST_CASE("binding duals imply binding capacity") {
  const auto net = MultiModalNetwork::build(test::parallel_routes(true));
  Eigen::VectorXd q(1);
  q << 10.0;
  const AssignmentResult result =
      solve_fixed_demand(net, q, tuned_toy_params(net));
  const Eigen::VectorXd total = result.flows.total_link_flow(net);
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    if (result.mult.mu[lid] > 1e-6)
      CHECK(total[lid] >= net.links()[lid].capacity - 1e-3);
  }
}

TEST_CASE("node potentials") {
  SUBCASE("single link") {
    const auto net =
        MultiModalNetwork::build(test::single_service_link(5.0, 6.0));
    const Eigen::VectorXd time =
        travel_time(net, Eigen::VectorXd::Zero(1)).time;
    const Potentials pot =
        node_potentials(net, time, Eigen::VectorXd::Zero(1));
    CHECK(pot.pi[0] == doctest::Approx(6.0));
    CHECK(pot.pi_tilde[0] == doctest::Approx(6.0));  // no fare configured
  }
  SUBCASE("equalized parallel routes at a converged solution") {
    NetworkConfig cfg = test::parallel_routes();
    cfg.links[0].capacity = 6.0;
    cfg.links[1].capacity = 6.0;
    const auto net = MultiModalNetwork::build(cfg);
    Eigen::VectorXd q(1);
    q << 10.0;
    const AssignmentResult result =
        solve_fixed_demand(net, q, tuned_toy_params(net));
    CHECK(solver_complementarity(net, result) < 1e-4);
    const Potentials pot =
        node_potentials(net, result.cost.time, result.mult.mu);
    // Both services are used, so each route's cost matches the potential.
    const int cong = net.links_of_kind(LinkKind::MoDRegular1)[0];
    const int flat = net.links_of_kind(LinkKind::MoDRegular2)[0];
    CHECK(result.cost.time[cong] == doctest::Approx(pot.pi[0]).epsilon(1e-4));
    CHECK(result.cost.time[flat] == doctest::Approx(pot.pi[0]).epsilon(1e-4));
  }
  SUBCASE("binding capacity shows up through the dual") {
    const auto net = MultiModalNetwork::build(test::parallel_routes(true));
    Eigen::VectorXd q(1);
    q << 10.0;
    const AssignmentResult result =
        solve_fixed_demand(net, q, tuned_toy_params(net));
    const int mt = net.links_of_kind(LinkKind::MTRegular)[0];
    REQUIRE(result.mult.mu[mt] > 1e-4);
    const Potentials pot =
        node_potentials(net, result.cost.time, result.mult.mu);
    // The transit route is used, so pi carries its time plus the dual.
    CHECK(pot.pi[0] == doctest::Approx(result.cost.time[mt] +
                                       result.mult.mu[mt]).epsilon(1e-3));
  }
  SUBCASE("unreachable destinations get an infinite potential") {
    NetworkConfig cfg = test::unit_response_toy();
    // Make the service non-MaaS only; the platform then has no route, which
    // is legal at build time (driving still connects the OD).
    cfg.links[0].classes = "nonmaas";
    const auto net = MultiModalNetwork::build(cfg);
    const Eigen::VectorXd time =
        travel_time(net, Eigen::VectorXd::Zero(net.num_links())).time;
    const Potentials pot =
        node_potentials(net, time, Eigen::VectorXd::Zero(net.num_links()));
    CHECK(std::isinf(pot.pi[0]));
    CHECK(std::isfinite(pot.pi_tilde[0]));
  }
}

TEST_CASE("purchased capacity equals realized platform flows") {
  const auto net = MultiModalNetwork::build(test::parallel_routes(true));
  Eigen::VectorXd q(1);
  q << 9.0;
  const AssignmentResult result =
      solve_fixed_demand(net, q, tuned_toy_params(net));
  const Eigen::VectorXd maas_flow = result.flows.class_link_flow(net, true);
  double total_mt_capacity = 0, purchased_mt = 0;
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    // Bitwise equality: the purchase is defined as the realized flow.
    CHECK(result.capacity[lid] == maas_flow[lid]);
    total_mt_capacity += net.links()[lid].capacity;
    purchased_mt += result.capacity[lid];
  }
  CHECK(purchased_mt <= total_mt_capacity + 1e-9);
  for (int lid : net.links_of_kind(LinkKind::MoDRegular1)) {
    CHECK(result.capacity[lid] ==
          doctest::Approx(result.cost.time[lid] * maas_flow[lid]));
  }
  SUBCASE("zero flows purchase nothing") {
    CHECK(capacity_purchase(net, FlowState::zero(net), result.cost)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("lemma-2 consistency on path-enumerable instances") {
  for (uint64_t seed : {3ull, 8ull}) {
    ToyOptions topt;
    topt.tight_mt_capacity = seed % 2;
    const auto net = MultiModalNetwork::build(random_toy_config(seed, topt));
    Eigen::VectorXd q(net.num_ods());
    for (int w = 0; w < net.num_ods(); ++w)
      q[w] = 0.5 * net.od_pairs()[w].demand;
    const AssignmentResult result =
        solve_fixed_demand(net, q, tuned_toy_params(net));
    const Potentials pot =
        node_potentials(net, result.cost.time, result.mult.mu);

    Eigen::VectorXd gc(net.num_links());
    for (const Link& l : net.links())
      gc[l.id] = result.cost.time[l.id] + result.mult.mu[l.id];
    const ClassSpace& ms = net.maas_space();
    for (int w = 0; w < net.num_ods(); ++w) {
      const PathSet paths = enumerate_paths(net, w, 10);
      const int block = ms.origin_block[w];
      for (const auto& path : paths.maas) {
        double bottleneck = kInf;
        for (int lid : path)
          bottleneck = std::min(bottleneck,
                                result.flows.x(ms.link_col[lid], block));
        if (bottleneck > 1e-5)
          CHECK(std::abs(path_sum(path, gc) - pot.pi[w]) < 1e-3);
      }
    }
  }
}
