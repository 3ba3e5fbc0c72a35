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

#include "doctest.h"
#include "maas/cost.hpp"
#include "maas/verification.hpp"
#include "testutil.hpp"

using namespace maas;

namespace {

// Access-time fixture: one waiting link feeding a congestible service link
// that shares its road with driving.
NetworkConfig access_toy(double fleet, double kappa) {
  NetworkConfig cfg;
  cfg.num_nodes = 3;
  cfg.operators.push_back(
      test::make_operator("hail", OperatorKind::MoDRoadbound, fleet, kappa, 0.5));
  cfg.links.push_back(test::make_link(0, 2, LinkKind::Drive, "", 5, 20, 9));
  cfg.links.push_back(test::make_link(0, 1, LinkKind::MoDAccess, "hail", 0, kInf, 0));
  cfg.links.push_back(test::make_link(1, 2, LinkKind::Drive, "", 4, 15, 7.2));
  cfg.links.push_back(
      test::make_link(1, 2, LinkKind::MoDRegular1, "hail", 4, 15, 2, 2));
  ODSpec od{0, 2, 6.0, 0.0};
  cfg.od_pairs.push_back(od);
  return cfg;
}

}  // namespace

TEST_CASE("constant links keep their free-flow time") {
  const auto net = MultiModalNetwork::build(test::parallel_routes(true));
  Eigen::VectorXd flow = Eigen::VectorXd::Constant(net.num_links(), 57.0);
  const CostEval eval = travel_time(net, flow);
  for (int lid : net.links_of_kind(LinkKind::MTRegular))
    CHECK(eval.time[lid] == doctest::Approx(net.links()[lid].free_flow_time));
  for (int lid : net.links_of_kind(LinkKind::MoDRegular2))
    CHECK(eval.time[lid] == doctest::Approx(net.links()[lid].free_flow_time));
}

TEST_CASE("congestible links follow the quartic curve") {
  const auto net = MultiModalNetwork::build(test::parallel_routes());
  const Link* mod = nullptr;
  for (const Link& l : net.links())
    if (l.kind == LinkKind::MoDRegular1) mod = &l;
  REQUIRE(mod != nullptr);
  const Link& drive = net.links()[mod->paired_road_link];

  Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
  // Split the combined flow across both co-located links; time depends on the sum.
  flow[mod->id] = 0.25 * mod->capacity;
  flow[drive.id] = 0.75 * mod->capacity;
  const CostEval eval = travel_time(net, flow);
  CHECK(eval.time[mod->id] == doctest::Approx(1.15 * mod->free_flow_time));
  CHECK(eval.time[drive.id] == doctest::Approx(1.15 * drive.free_flow_time));
}

TEST_CASE("waiting time is demand over vacant fleet") {
  // Occupied time zero, fleet 1000 => vacant 1000; demand 100 at kappa 26.78.
  const auto net = MultiModalNetwork::build(access_toy(1000.0, 26.78));
  Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
  int access = net.links_of_kind(LinkKind::MoDAccess)[0];
  flow[access] = 100.0;
  const CostEval eval = travel_time(net, flow);
  CHECK(eval.time[access] == doctest::Approx(26.78 * 100.0 / 1000.0));
  CHECK(eval.loads[0].vacant == doctest::Approx(1000.0));

  SUBCASE("vacant fleet shrinks with occupied service time") {
    int svc = net.links_of_kind(LinkKind::MoDRegular1)[0];
    flow[svc] = 10.0;
    const CostEval eval2 = travel_time(net, flow);
    const double t_svc = eval2.time[svc];
    CHECK(eval2.loads[0].occupied == doctest::Approx(t_svc * 10.0));
    CHECK(eval2.loads[0].vacant == doctest::Approx(1000.0 - t_svc * 10.0));
    CHECK(eval2.time[access] ==
          doctest::Approx(26.78 * 100.0 / (1000.0 - t_svc * 10.0)));
  }
}

TEST_CASE("fleet conservation holds exactly") {
  const auto net = MultiModalNetwork::build(access_toy(500.0, 2.0));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd flow(net.num_links());
    for (int i = 0; i < flow.size(); ++i) flow[i] = (rng() % 1000) / 100.0;
    const CostEval eval = travel_time(net, flow);
    const Operator& op = net.operators()[0];
    CHECK(std::abs(eval.loads[0].vacant + eval.loads[0].occupied -
                   op.fleet_time) < 1e-10);
  }
}

TEST_CASE("singular service handling") {
  const auto net = MultiModalNetwork::build(access_toy(10.0, 1.0));
  Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
  const int access = net.links_of_kind(LinkKind::MoDAccess)[0];
  const int svc = net.links_of_kind(LinkKind::MoDRegular1)[0];
  flow[access] = 5.0;
  flow[svc] = 100.0;  // occupied time far beyond the fleet
  CostOptions unguarded;
  unguarded.guard_access_singularity = false;
  CHECK_THROWS_AS(travel_time(net, flow, unguarded), SingularServiceError);
  // The guard extrapolates instead and keeps the time finite.
  const CostEval eval = travel_time(net, flow);
  CHECK(std::isfinite(eval.time[access]));
  CHECK(eval.loads[0].extrapolated);
}

TEST_CASE("jacobian matches the published slopes") {
  const auto net = MultiModalNetwork::build(test::parallel_routes());
  const Link* mod = nullptr;
  for (const Link& l : net.links())
    if (l.kind == LinkKind::MoDRegular1) mod = &l;
  Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
  flow[mod->id] = mod->capacity;  // combined flow equals capacity
  const Eigen::SparseMatrix<double> jac = travel_time_jacobian(net, flow);
  CHECK(Eigen::MatrixXd(jac)(mod->id, mod->id) ==
        doctest::Approx(0.6 * mod->free_flow_time / mod->capacity));
  // Constant links have empty rows.
  for (int lid : net.links_of_kind(LinkKind::MoDRegular2))
    CHECK(Eigen::MatrixXd(jac).row(lid).cwiseAbs().sum() == 0.0);
}

TEST_CASE("jacobian agrees with central differences on the access toy") {
  const auto net = MultiModalNetwork::build(access_toy(300.0, 1.5));
  Eigen::VectorXd flow(net.num_links());
  flow << 3.0, 4.0, 2.0, 5.0;
  const Eigen::MatrixXd jac =
      Eigen::MatrixXd(travel_time_jacobian(net, flow));
  const double h = 1e-6;
  double worst = 0;
  for (int b = 0; b < net.num_links(); ++b) {
    Eigen::VectorXd fp = flow, fm = flow;
    fp[b] += h;
    fm[b] -= h;
    const Eigen::VectorXd tp = travel_time(net, fp).time;
    const Eigen::VectorXd tm = travel_time(net, fm).time;
    for (int a = 0; a < net.num_links(); ++a) {
      const double fd = (tp[a] - tm[a]) / (2 * h);
      const double scale = std::max(1.0, std::abs(fd));
      worst = std::max(worst, std::abs(jac(a, b) - fd) / scale);
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("augmented cost clamps the capacity penalty") {
  const auto net = MultiModalNetwork::build(test::parallel_routes(true));
  const int mt = net.links_of_kind(LinkKind::MTRegular)[0];
  const double cap = net.links()[mt].capacity;
  Eigen::VectorXd flow = Eigen::VectorXd::Zero(net.num_links());
  MultiplierState mult = MultiplierState::zero(net);

  SUBCASE("below capacity with zero multiplier") {
    flow[mt] = 0.5 * cap;
    const CostEval eval = travel_time(net, flow);
    const Eigen::VectorXd t_hat = augmented_time(net, eval, flow, mult);
    CHECK(t_hat[mt] == doctest::Approx(eval.time[mt]));
  }
  SUBCASE("one unit over capacity") {
    mult.mu[mt] = 2.0;
    mult.rho = 1.0;
    flow[mt] = cap + 1.0;
    const CostEval eval = travel_time(net, flow);
    const Eigen::VectorXd t_hat = augmented_time(net, eval, flow, mult);
    CHECK(t_hat[mt] == doctest::Approx(eval.time[mt] + 3.0));
  }
  SUBCASE("slack dominates the multiplier") {
    mult.mu[mt] = 1.0;
    mult.rho = 2.0;
    flow[mt] = cap - 1.0;  // bracket = 1 + 2*(-1) = -1 -> clamp
    const CostEval eval = travel_time(net, flow);
    const Eigen::VectorXd t_hat = augmented_time(net, eval, flow, mult);
    CHECK(t_hat[mt] == doctest::Approx(eval.time[mt]));
  }
}

TEST_CASE("congestible times are nondecreasing in total flow") {
  const auto net = MultiModalNetwork::build(test::parallel_routes());
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd lo(net.num_links()), hi(net.num_links());
    for (int i = 0; i < lo.size(); ++i) {
      lo[i] = (rng() % 1000) / 50.0;
      hi[i] = lo[i] + (rng() % 1000) / 50.0;
    }
    const CostEval a = travel_time(net, lo);
    const CostEval b = travel_time(net, hi);
    for (int lid : net.links_of_kind(LinkKind::MoDRegular1))
      CHECK(b.time[lid] >= a.time[lid] - 1e-12);
    for (int lid : net.links_of_kind(LinkKind::Drive))
      CHECK(b.time[lid] >= a.time[lid] - 1e-12);
  }
}

TEST_CASE("both classes share the cost derivative") {
  // Times depend on total flows only, so a perturbation moved between the
  // class blocks produces the same lifted response.
  const auto net = MultiModalNetwork::build(test::parallel_routes());
  FlowState base = FlowState::zero(net);
  base.x.setConstant(2.0);
  base.xt.setConstant(1.0);
  const Eigen::SparseMatrix<double> jac =
      travel_time_jacobian(net, base.total_link_flow(net));

  const int lid = net.links_of_kind(LinkKind::MoDRegular1)[0];
  FlowState dx = FlowState::zero(net);
  dx.x(net.maas_space().link_col[lid], 0) = 1.0;
  FlowState dxt = FlowState::zero(net);
  dxt.xt(net.nonmaas_space().link_col[lid], 0) = 1.0;
  const FlowState ra = lift_jvp(net, jac, dx);
  const FlowState rb = lift_jvp(net, jac, dxt);
  CHECK((ra.x - rb.x).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((ra.xt - rb.xt).cwiseAbs().maxCoeff() < 1e-14);
}
