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
#include "doctest.h"
#include "maas/verification.hpp"
#include "testutil.hpp"

using namespace maas;

TEST_CASE("path enumeration") {
  SUBCASE("one link, one path") {
    const auto net = MultiModalNetwork::build(test::single_service_link());
    const PathSet paths = enumerate_paths(net, 0, 4);
    CHECK(paths.maas.size() == 1);
    CHECK(paths.nonmaas.size() == 1);
  }
  SUBCASE("diamond graph has two") {
    NetworkConfig cfg;
    cfg.num_nodes = 4;
    cfg.operators.push_back(
        test::make_operator("bike", OperatorKind::MoDIndependent, 100, 1, 0.1));
    auto svc = [&](int a, int b, double t) {
      cfg.links.push_back(
          test::make_link(a, b, LinkKind::MoDRegular2, "bike", t, kInf, 1));
    };
    svc(0, 1, 2);
    svc(0, 2, 3);
    svc(1, 3, 2);
    svc(2, 3, 3);
    cfg.links.push_back(test::make_link(0, 3, LinkKind::Drive, "", 9, kInf, 0));
    ODSpec od{0, 3, 4.0, 0.0};
    cfg.od_pairs.push_back(od);
    const auto net = MultiModalNetwork::build(cfg);
    const PathSet paths = enumerate_paths(net, 0, 4);
    CHECK(paths.maas.size() == 2);
    CHECK(paths.nonmaas.size() == 3);
  }
  SUBCASE("hop budget truncates with a flag") {
    const auto net = MultiModalNetwork::build(test::three_operator_toy());
    const PathSet paths = enumerate_paths(net, 0, 6, 2);
    CHECK(paths.truncated);
  }
}

TEST_CASE("path-based equilibrium oracle") {
  SUBCASE("single path carries all demand") {
    const auto net = MultiModalNetwork::build(test::single_service_link(5.0));
    Eigen::VectorXd q(1);
    q << 2.0;
    const UEOracleResult r = ue_oracle(net, q);
    CHECK(r.converged);
    CHECK(r.maas_link_flow[0] == doctest::Approx(2.0));
    CHECK(r.nonmaas_link_flow[0] == doctest::Approx(3.0));
    CHECK(r.complementarity < 1e-8);
  }
  SUBCASE("identical parallel congestible links split evenly") {
    NetworkConfig cfg;
    cfg.num_nodes = 2;
    cfg.operators.push_back(
        test::make_operator("hail", OperatorKind::MoDRoadbound, 4000, 1, 0.2));
    cfg.links.push_back(
        test::make_link(0, 1, LinkKind::MoDRegular1, "hail", 4, 10, 2));
    cfg.links.push_back(
        test::make_link(0, 1, LinkKind::MoDRegular1, "hail", 4, 10, 2));
    cfg.links.push_back(test::make_link(0, 1, LinkKind::Drive, "", 6, kInf, 0));
    ODSpec od{0, 1, 8.0, 0.0};
    cfg.od_pairs.push_back(od);
    const auto net = MultiModalNetwork::build(cfg);
    Eigen::VectorXd q(1);
    q << 8.0;  // platform takes everything; symmetry forces a 50/50 split
    const UEOracleResult r = ue_oracle(net, q);
    CHECK(r.maas_link_flow[0] == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(r.maas_link_flow[1] == doctest::Approx(4.0).epsilon(1e-6));
  }
  SUBCASE("capacitated duals match the splitting solver") {
    const auto net = MultiModalNetwork::build(test::parallel_routes(true));
    Eigen::VectorXd q(1);
    q << 10.0;
    const UEOracleResult oracle = ue_oracle(net, q);
    const AssignmentResult solver =
        solve_fixed_demand(net, q, tuned_toy_params(net));
    const int mt = net.links_of_kind(LinkKind::MTRegular)[0];
    CHECK(std::abs(oracle.mu[mt] - solver.mult.mu[mt]) < 1e-3);
  }
}

TEST_CASE("finite differences of the equilibrium objective") {
  const auto net = MultiModalNetwork::build(random_toy_config(4, ToyOptions{}));
  Eigen::VectorXd q(net.num_ods());
  for (int w = 0; w < net.num_ods(); ++w) q[w] = 0.5 * net.od_pairs()[w].demand;
  AlgorithmParams params = tuned_toy_params(net);
  VIOptions vi;
  vi.gamma = params.gamma;
  vi.iterations = 300;
  vi.keep_trace = true;
  const MultiplierState mult = MultiplierState::zero(net);

  SUBCASE("error shrinks quadratically with the step") {
    const EquilibriumSolution sol = solve_vi(net, q, nullptr, mult, vi);
    const FlowState seed = objective_seed(net, sol.z, false);
    const Eigen::VectorXd exact = unrolled_gradient(net, sol, seed, mult, vi);
    const Eigen::VectorXd fd_coarse =
        fd_objective_gradient(net, q, mult, vi, 1e-2);
    const Eigen::VectorXd fd_fine =
        fd_objective_gradient(net, q, mult, vi, 1e-3);
    const double e_coarse = (fd_coarse - exact).cwiseAbs().maxCoeff();
    const double e_fine = (fd_fine - exact).cwiseAbs().maxCoeff();
    // Central differences: two orders of magnitude per decade until roundoff.
    if (e_fine > 1e-11) CHECK(e_coarse / e_fine > 10.0);
    CHECK(e_fine < 1e-4);
  }
  SUBCASE("clamped coordinates use a one-sided difference") {
    Eigen::VectorXd q0 = q;
    q0[0] = 0.0;
    const double h = 1e-5;
    const Eigen::VectorXd fd = fd_objective_gradient(net, q0, mult, vi, h);
    CHECK(std::isfinite(fd[0]));
    // The lower clamp admits only the forward step.
    VIOptions plain = vi;
    plain.keep_trace = false;
    plain.compute_fixed_point_residual = false;
    Eigen::VectorXd qp = q0;
    qp[0] = h;
    const double forward =
        (objective(net, solve_vi(net, qp, nullptr, mult, plain).z) -
         objective(net, solve_vi(net, q0, nullptr, mult, plain).z)) /
        h;
    CHECK(fd[0] == doctest::Approx(forward).epsilon(1e-12));
  }
}

TEST_CASE("vertex oracle") {
  SUBCASE("agrees with the breakpoint method on one OD") {
    PricingInputs in;
    in.q = Eigen::VectorXd::Constant(1, 3.0);
    in.pi = Eigen::VectorXd::Constant(1, 10.0);
    in.utility = Eigen::VectorXd::Constant(1, 18.0);
    in.tau_min = Eigen::VectorXd::Constant(1, 12.0);
    in.lambda_min = Eigen::VectorXd::Constant(1, 2.0);
    in.operator_ids = {"op"};
    in.revenue_floor = {5.0};
    in.nonmaas_revenue = {2.0};
    in.weighted_maas_volume = {4.0};
    in.total_weighted_volume = 5.0;
    const PricingScheme scheme = solve_pricing(in);
    const VertexOracleResult vertex = lp_vertex_oracle(in);
    REQUIRE(vertex.feasible);
    CHECK(scheme.profit == doctest::Approx(vertex.profit).epsilon(1e-10));
    CHECK(scheme.p_s == doctest::Approx(vertex.p_s).epsilon(1e-8));
  }
  SUBCASE("both report infeasible floors") {
    PricingInputs in;
    in.q = Eigen::VectorXd::Constant(1, 3.0);
    in.pi = Eigen::VectorXd::Constant(1, 10.0);
    in.utility = Eigen::VectorXd::Constant(1, 18.0);
    in.tau_min = Eigen::VectorXd::Constant(1, 12.0);
    in.lambda_min = Eigen::VectorXd::Constant(1, 2.0);
    in.operator_ids = {"op"};
    in.revenue_floor = {5.0};
    in.nonmaas_revenue = {2.0};
    in.weighted_maas_volume = {0.0};
    in.total_weighted_volume = 0.0;
    CHECK_THROWS_AS(solve_pricing(in), InfeasiblePricingError);
    CHECK(!lp_vertex_oracle(in).feasible);
  }
  SUBCASE("degenerate lambda_min keeps both methods in agreement") {
    for (uint64_t seed = 30; seed < 40; ++seed) {
      PricingInputs in = random_pricing_inputs(seed);
      in.lambda_min.setZero();
      bool feasible = true;
      PricingScheme scheme;
      try {
        scheme = solve_pricing(in);
      } catch (const InfeasiblePricingError&) {
        feasible = false;
      }
      const VertexOracleResult vertex = lp_vertex_oracle(in);
      REQUIRE(feasible == vertex.feasible);
      if (feasible)
        CHECK(scheme.profit ==
              doctest::Approx(vertex.profit)
                  .epsilon(1e-8 * std::max(1.0, std::abs(vertex.profit))));
    }
  }
  SUBCASE("instance size is capped") {
    PricingInputs in = random_pricing_inputs(1);
    CHECK_THROWS_AS(lp_vertex_oracle(in, 0), DomainError);
  }
}

TEST_CASE("solver and path oracle agree on a seeded batch") {
  // The full 50-instance batch is the acceptance suite; a slice here keeps
  // the unit run fast.
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    ToyOptions topt;
    topt.tight_mt_capacity = seed % 3 == 0;
    const auto net = MultiModalNetwork::build(random_toy_config(seed, topt));
    Eigen::VectorXd q(net.num_ods());
    for (int w = 0; w < net.num_ods(); ++w)
      q[w] = 0.4 * net.od_pairs()[w].demand;
    const AssignmentResult solver =
        solve_fixed_demand(net, q, tuned_toy_params(net));
    const UEOracleResult oracle = ue_oracle(net, q);
    const double dm = (solver.flows.class_link_flow(net, true) -
                       oracle.maas_link_flow).cwiseAbs().maxCoeff();
    const double dn = (solver.flows.class_link_flow(net, false) -
                       oracle.nonmaas_link_flow).cwiseAbs().maxCoeff();
    CHECK(dm < 1e-4);
    CHECK(dn < 1e-4);
    CHECK(solver_complementarity(net, solver) < 1e-4);
  }
}
