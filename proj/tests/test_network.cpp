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
#include "maas/network.hpp"
#include "maas/paths.hpp"
#include "maas/shortest_path.hpp"
#include "testutil.hpp"

using namespace maas;

namespace {

const Link* find_link(const MultiModalNetwork& net, const std::string& tail,
                      const std::string& head, LinkKind kind) {
  for (const Link& l : net.links()) {
    if (l.kind != kind) continue;
    if (net.nodes()[l.tail].name == tail && net.nodes()[l.head].name == head)
      return &l;
  }
  return nullptr;
}

const Link* find_by_physical(const MultiModalNetwork& net, int a, int b,
                             LinkKind kind) {
  for (const Link& l : net.links()) {
    if (l.kind != kind) continue;
    if (net.nodes()[l.tail].physical == a && net.nodes()[l.head].physical == b)
      return &l;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("empty OD list still builds") {
  const auto net = MultiModalNetwork::build(test::two_node_road());
  CHECK(net.num_ods() == 0);
  CHECK(net.num_links() == 1);
  CHECK(net.validate().feasible);
}

TEST_CASE("three-operator toy exposes one path per mode") {
  const auto net = MultiModalNetwork::build(test::three_operator_toy());
  CHECK(net.operators().size() == 3);
  const PathSet paths = enumerate_paths(net, 0, 6);
  // Hand enumeration: transit, road-bound on-demand, independent service.
  CHECK(paths.maas.size() == 3);
  // Outside the platform: the same three, direct driving, and the
  // access-then-drive combination through the on-demand node.
  CHECK(paths.nonmaas.size() == 5);
  CHECK(!paths.truncated);
}

TEST_CASE("sioux falls instance matches the published table") {
  const auto net = build_sioux_falls();
  CHECK(net.num_nodes() == 199);
  CHECK(net.num_links() == 456);
  CHECK(net.num_network_od_pairs() == 1056);
  CHECK(net.num_ods() == 528);
  CHECK(net.total_demand() == doctest::Approx(360600.0));

  const Link* road = find_by_physical(net, 1, 2, LinkKind::Drive);
  REQUIRE(road != nullptr);
  CHECK(road->free_flow_time == doctest::Approx(6.00));
  CHECK(road->capacity == doctest::Approx(19425.15));
  CHECK(road->fare == doctest::Approx(10.80));

  const Link* mod = find_by_physical(net, 1, 2, LinkKind::MoDRegular1);
  REQUIRE(mod != nullptr);
  CHECK(mod->fare == doctest::Approx(6.00));
  CHECK(mod->paired_road_link == road->id);

  const Link* mt = find_by_physical(net, 2, 6, LinkKind::MTRegular);
  REQUIRE(mt != nullptr);
  CHECK(mt->free_flow_time == doctest::Approx(8.00));  // 1.6 x road time
  CHECK(mt->capacity == doctest::Approx(15000.0));
  CHECK(mt->fare == doctest::Approx(2.50));  // 0.5 x road free-flow time

  // Merged transfer time and planning costs on access links.
  for (int lid : net.links_of_kind(LinkKind::MTAccess)) {
    CHECK(net.links()[lid].free_flow_time == doctest::Approx(1.25 + 1.0));
    CHECK(net.links()[lid].planning_cost == doctest::Approx(2.5));
  }
  for (int lid : net.links_of_kind(LinkKind::MoDAccess)) {
    CHECK(net.links()[lid].free_flow_time == doctest::Approx(1.0));
    CHECK(net.links()[lid].planning_cost == doctest::Approx(2.5));
  }
  for (int lid : net.links_of_kind(LinkKind::MTEgress))
    CHECK(net.links()[lid].free_flow_time == doctest::Approx(0.25));

  // MaaS origin dummies offset the merged transfer time.
  int negative_dummies = 0;
  for (int lid : net.links_of_kind(LinkKind::Dummy)) {
    if (net.links()[lid].free_flow_time < 0) {
      CHECK(net.links()[lid].free_flow_time == doctest::Approx(-1.0));
      CHECK(net.links()[lid].maas_ok);
      CHECK(!net.links()[lid].nonmaas_ok);
      ++negative_dummies;
    }
  }
  CHECK(negative_dummies == 24);

  CHECK(find_link(net, "R1", "R2", LinkKind::Drive) != nullptr);
}

TEST_CASE("demand vector assembles the conservation right-hand sides") {
  const auto net = MultiModalNetwork::build(test::parallel_routes());
  SUBCASE("zero split leaves the MaaS side empty") {
    const Demand d = net.demand_vector(Eigen::VectorXd::Zero(1));
    CHECK(d.maas.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.nonmaas(net.od_pairs()[0].nonmaas_origin_node, 0) ==
          doctest::Approx(-10.0));
    CHECK(d.nonmaas(net.od_pairs()[0].nonmaas_dest_node, 0) ==
          doctest::Approx(10.0));
  }
  SUBCASE("single OD entries") {
    Eigen::VectorXd q(1);
    q << 5.0;
    const Demand d = net.demand_vector(q);
    CHECK(d.maas(net.od_pairs()[0].maas_origin_node, 0) == doctest::Approx(-5.0));
    CHECK(d.maas(net.od_pairs()[0].maas_dest_node, 0) == doctest::Approx(5.0));
    CHECK(d.nonmaas(net.od_pairs()[0].nonmaas_origin_node, 0) ==
          doctest::Approx(-5.0));
  }
  SUBCASE("out-of-range split is a domain error") {
    Eigen::VectorXd q(1);
    q << 11.0;
    CHECK_THROWS_AS(net.demand_vector(q), DomainError);
    q << -1.0;
    CHECK_THROWS_AS(net.demand_vector(q), DomainError);
  }
}

TEST_CASE("demand vector sums shared origins") {
  NetworkConfig cfg;
  cfg.num_nodes = 3;
  cfg.operators.push_back(
      test::make_operator("bike", OperatorKind::MoDIndependent, 1000, 1, 0.2));
  cfg.links.push_back(
      test::make_link(0, 1, LinkKind::MoDRegular2, "bike", 3, kInf, 1));
  cfg.links.push_back(
      test::make_link(0, 2, LinkKind::MoDRegular2, "bike", 4, kInf, 1));
  cfg.links.push_back(test::make_link(0, 1, LinkKind::Drive, "", 3, kInf, 1));
  cfg.links.push_back(test::make_link(0, 2, LinkKind::Drive, "", 4, kInf, 1));
  ODSpec od1{0, 1, 4.0, 0.0};
  ODSpec od2{0, 2, 5.0, 0.0};
  cfg.od_pairs = {od1, od2};
  const auto net = MultiModalNetwork::build(cfg);
  Eigen::VectorXd q(2);
  q << 2.0, 3.0;
  const Demand d = net.demand_vector(q);
  REQUIRE(net.maas_space().num_origins() == 1);
  CHECK(d.maas(0, 0) == doctest::Approx(-5.0));
  CHECK(d.maas(1, 0) == doctest::Approx(2.0));
  CHECK(d.maas(2, 0) == doctest::Approx(3.0));
}

TEST_CASE("validation flags capacity shortfalls and fleet bounds") {
  SUBCASE("sioux falls is feasible") {
    const auto net = build_sioux_falls();
    CHECK(net.validate().feasible);
  }
  SUBCASE("undersized transit link without alternatives") {
    NetworkConfig cfg;
    cfg.num_nodes = 2;
    cfg.operators.push_back(test::make_operator("mt", OperatorKind::MassTransit));
    cfg.links.push_back(
        test::make_link(0, 1, LinkKind::MTRegular, "mt", 3, 3.0, 1));
    cfg.links.push_back(test::make_link(0, 1, LinkKind::Drive, "", 4, kInf, 0));
    ODSpec od{0, 1, 5.0, 0.0};
    cfg.od_pairs.push_back(od);
    const auto net = MultiModalNetwork::build(cfg);
    const auto report = net.validate();
    CHECK(!report.feasible);
    CHECK(report.infeasible_ods == std::vector<int>{0});
  }
  SUBCASE("zero demand network is feasible") {
    const auto net = MultiModalNetwork::build(test::two_node_road());
    CHECK(net.validate().feasible);
  }
}

TEST_CASE("build rejects malformed configs") {
  SUBCASE("duplicate link ids") {
    NetworkConfig cfg = test::two_node_road();
    cfg.links[0].id = 7;
    LinkSpec dup = cfg.links[0];
    cfg.links.push_back(dup);
    CHECK_THROWS_AS(MultiModalNetwork::build(cfg), ConfigError);
  }
  SUBCASE("disconnected OD pair") {
    NetworkConfig cfg = test::two_node_road();
    cfg.num_nodes = 3;
    ODSpec od{0, 2, 3.0, 0.0};
    cfg.od_pairs.push_back(od);
    CHECK_THROWS_AS(MultiModalNetwork::build(cfg), ConfigError);
  }
  SUBCASE("bad operator parameters") {
    NetworkConfig cfg = test::single_service_link();
    cfg.operators[0].fleet_time = 0.0;  // must exceed min_vacant
    CHECK_THROWS_AS(MultiModalNetwork::build(cfg), ConfigError);
  }
}

TEST_CASE("incidence SVD reconstructs the matrix") {
  const auto net = MultiModalNetwork::build(test::three_operator_toy());
  for (const ClassSpace* space : {&net.maas_space(), &net.nonmaas_space()}) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(space->incidence);
    const Eigen::MatrixXd rebuilt =
        space->svd_u * space->svd_s.asDiagonal() * space->svd_v.transpose();
    CHECK((dense - rebuilt).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(space->svd_s.minCoeff() > 0.0);
  }
}

TEST_CASE("incidence columns have one tail and one head per origin block") {
  const auto net = MultiModalNetwork::build(test::parallel_routes(true));
  const ClassSpace& space = net.maas_space();
  for (int j = 0; j < space.num_links(); ++j) {
    double neg = 0, pos = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(space.incidence, j); it;
         ++it) {
      if (it.value() < 0) neg += it.value();
      if (it.value() > 0) pos += it.value();
    }
    CHECK(neg == doctest::Approx(-1.0));
    CHECK(pos == doctest::Approx(1.0));
  }
}

TEST_CASE("merging transfer links preserves shortest-path costs") {
  SiouxFallsParams merged_params;
  SiouxFallsParams raw_params;
  raw_params.constants.merge_transfer_links = false;
  const auto merged = build_sioux_falls(merged_params);
  const auto unmerged = build_sioux_falls(raw_params);
  CHECK(!merged.links_of_kind(LinkKind::Transfer).size());
  CHECK(unmerged.links_of_kind(LinkKind::Transfer).size() == 55);

  auto generalized = [](const MultiModalNetwork& net, bool maas) {
    Eigen::VectorXd cost(net.num_links());
    for (const Link& l : net.links())
      cost[l.id] = l.free_flow_time + (maas ? 0.0 : l.nonmaas_fare());
    return cost;
  };
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = static_cast<int>(rng() % merged.num_ods());
    for (bool maas : {true, false}) {
      const Eigen::VectorXd cm = generalized(merged, maas);
      const Eigen::VectorXd cu = generalized(unmerged, maas);
      const ODPair& od_m = merged.od_pairs()[w];
      const ODPair& od_u = unmerged.od_pairs()[w];
      const int src_m = maas ? od_m.maas_origin_node : od_m.nonmaas_origin_node;
      const int dst_m = maas ? od_m.maas_dest_node : od_m.nonmaas_dest_node;
      const int src_u = maas ? od_u.maas_origin_node : od_u.nonmaas_origin_node;
      const int dst_u = maas ? od_u.maas_dest_node : od_u.nonmaas_dest_node;
      const auto tree_m = shortest_paths_from(
          merged, src_m, cm,
          [maas](const Link& l) { return maas ? l.maas_ok : l.nonmaas_ok; });
      const auto tree_u = shortest_paths_from(
          unmerged, src_u, cu,
          [maas](const Link& l) { return maas ? l.maas_ok : l.nonmaas_ok; });
      CHECK(tree_m.dist[dst_m] ==
            doctest::Approx(tree_u.dist[dst_u]).epsilon(1e-9));
    }
  }
}

TEST_CASE("json config round trip") {
  const std::string text = R"({
    "network": {
      "name": "toy",
      "nodes": 2,
      "operators": [
        {"id": "bike", "kind": "mod_independent", "fleet_time": 100,
         "matching_coeff": 1.0, "min_vacant": 0.1}
      ],
      "links": [
        {"tail": 0, "head": 1, "kind": "mod_regular_independent",
         "operator": "bike", "time": 3.0, "fare": 1.0},
        {"tail": 0, "head": 1, "kind": "drive", "time": 4.0, "capacity": 9.0,
         "fare": 7.2}
      ],
      "od_pairs": [{"origin": 0, "destination": 1, "demand": 5.0}]
    }
  })";
  const auto net = MultiModalNetwork::build(load_network_config(text));
  CHECK(net.num_links() == 2);
  CHECK(net.num_ods() == 1);
  CHECK(net.links()[1].capacity == doctest::Approx(9.0));
  CHECK(!net.links()[1].maas_ok);  // driving is never a platform mode
  CHECK_THROWS_AS(load_network_config("{not json"), ConfigError);
}

TEST_CASE("link table dump round trips the physical instance") {
  const auto net = build_sioux_falls();
  std::ostringstream os;
  net.dump_link_table(os);
  const std::string table = os.str();
  CHECK(table.find("1,2,6.00,19425.15,10.80,6.00,,,") != std::string::npos);
  CHECK(table.find("2,6,5.00,3718.64,9.00,5.00,8.00,15000.00,2.50") !=
        std::string::npos);
  // One row per corridor plus the header.
  CHECK(std::count(table.begin(), table.end(), '\n') == 39);

  // Parse back and compare against the configuration.
  std::istringstream is(table);
  std::string line;
  std::getline(is, line);  // header
  int row = 0;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const PhysicalLinkSpec& pl = net.config().physical_links[row];
    CHECK(std::stoi(cells[0]) == pl.a);
    CHECK(std::stoi(cells[1]) == pl.b);
    CHECK(std::stod(cells[2]) == doctest::Approx(pl.road_time));
    CHECK(std::stod(cells[3]) == doctest::Approx(pl.road_capacity));
    if (pl.has_mt) CHECK(std::stod(cells[6]) == doctest::Approx(pl.mt_time));
    ++row;
  }
  CHECK(row == 38);
}
