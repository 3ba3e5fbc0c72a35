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

#include "maas/network.hpp"

namespace maas::test {

inline LinkSpec make_link(int tail, int head, LinkKind kind,
                          const std::string& op, double time, double cap,
                          double fare, int pair = -1, double planning = 0) {
  LinkSpec l;
  l.tail = tail;
  l.head = head;
  l.kind = kind;
  l.op = op;
  l.time = time;
  l.capacity = cap;
  l.fare = fare;
  l.paired_road_link = pair;
  l.planning_cost = planning;
  return l;
}

inline Operator make_operator(const std::string& id, OperatorKind kind,
                              double fleet = 0, double kappa = 0,
                              double min_vacant = 0, double floor = 0) {
  Operator op;
  op.id = id;
  op.kind = kind;
  op.fleet_time = fleet;
  op.matching_coeff = kappa;
  op.min_vacant = min_vacant;
  op.revenue_floor = floor;
  return op;
}

// Two nodes, one road link, no demand.
inline NetworkConfig two_node_road() {
  NetworkConfig cfg;
  cfg.name = "two_node_road";
  cfg.num_nodes = 2;
  cfg.links.push_back(make_link(0, 1, LinkKind::Drive, "", 4.0, 10.0, 7.2));
  return cfg;
}

// One constant service link, both classes; demand 5.
inline NetworkConfig single_service_link(double demand = 5.0, double time = 6.0,
                                         double fare = 0.0) {
  NetworkConfig cfg;
  cfg.name = "single_link";
  cfg.num_nodes = 2;
  cfg.operators.push_back(
      make_operator("bike", OperatorKind::MoDIndependent, 1000, 1.0, 0.2));
  cfg.links.push_back(
      make_link(0, 1, LinkKind::MoDRegular2, "bike", time, kInf, fare));
  ODSpec od;
  od.origin = 0;
  od.destination = 1;
  od.demand = demand;
  cfg.od_pairs.push_back(od);
  return cfg;
}

// Two service routes (one congestible, one constant) plus driving; optional
// tightly capacitated transit route.
inline NetworkConfig parallel_routes(bool with_capacitated_mt = false,
                                     double demand = 10.0) {
  NetworkConfig cfg;
  cfg.name = "parallel_routes";
  cfg.num_nodes = 2;
  cfg.operators.push_back(make_operator("mt", OperatorKind::MassTransit));
  cfg.operators.push_back(
      make_operator("hail", OperatorKind::MoDRoadbound, 2000, 1.0, 0.2));
  cfg.operators.push_back(
      make_operator("bike", OperatorKind::MoDIndependent, 2000, 1.0, 0.2));
  cfg.links.push_back(make_link(0, 1, LinkKind::Drive, "", 4.0, 12.0, 7.2));
  cfg.links.push_back(
      make_link(0, 1, LinkKind::MoDRegular1, "hail", 4.0, 12.0, 2.0, 0));
  cfg.links.push_back(
      make_link(0, 1, LinkKind::MoDRegular2, "bike", 6.0, kInf, 1.0));
  if (with_capacitated_mt) {
    cfg.links.push_back(
        make_link(0, 1, LinkKind::MTRegular, "mt", 3.0, 4.0, 1.0));
  }
  ODSpec od;
  od.origin = 0;
  od.destination = 1;
  od.demand = demand;
  cfg.od_pairs.push_back(od);
  return cfg;
}

// One OD served by transit, road-bound on-demand, and an independent service:
// three operators, one access link each where it matters.
inline NetworkConfig three_operator_toy() {
  NetworkConfig cfg;
  cfg.name = "three_operator_toy";
  cfg.num_nodes = 4;  // 0 origin, 1 transit platform, 2 on-demand node, 3 dest
  cfg.operators.push_back(make_operator("mt", OperatorKind::MassTransit));
  cfg.operators.push_back(
      make_operator("hail", OperatorKind::MoDRoadbound, 500, 1.0, 0.2));
  cfg.operators.push_back(
      make_operator("bike", OperatorKind::MoDIndependent, 500, 1.0, 0.2));
  cfg.links.push_back(make_link(0, 1, LinkKind::MTAccess, "mt", 1.0, kInf, 0.0,
                                -1, 2.5));
  cfg.links.push_back(
      make_link(1, 3, LinkKind::MTRegular, "mt", 5.0, 20.0, 2.0));
  cfg.links.push_back(make_link(0, 2, LinkKind::MoDAccess, "hail", 0.0, kInf,
                                0.0, -1, 2.5));
  cfg.links.push_back(make_link(2, 3, LinkKind::Drive, "", 4.0, 15.0, 7.2));
  cfg.links.push_back(
      make_link(2, 3, LinkKind::MoDRegular1, "hail", 4.0, 15.0, 4.0, 3));
  cfg.links.push_back(
      make_link(0, 3, LinkKind::MoDRegular2, "bike", 7.0, kInf, 1.0));
  cfg.links.push_back(make_link(0, 3, LinkKind::Drive, "", 6.0, 15.0, 10.8));
  ODSpec od;
  od.origin = 0;
  od.destination = 3;
  od.demand = 10.0;
  cfg.od_pairs.push_back(od);
  return cfg;
}

// Constant-time toy where the platform's service is strictly faster (or
// strictly slower) than the driving route the non-MaaS demand uses.
inline NetworkConfig dominance_toy(bool maas_wins) {
  NetworkConfig cfg;
  cfg.name = maas_wins ? "maas_wins" : "maas_loses";
  cfg.num_nodes = 2;
  cfg.operators.push_back(
      make_operator("bike", OperatorKind::MoDIndependent, 4000, 1.0, 0.2));
  const double service_time = maas_wins ? 2.0 : 9.0;
  cfg.links.push_back(make_link(0, 1, LinkKind::MoDRegular2, "bike",
                                service_time, kInf, 8.0));
  cfg.links.push_back(make_link(0, 1, LinkKind::Drive, "", 5.0, kInf, 0.0));
  ODSpec od;
  od.origin = 0;
  od.destination = 1;
  od.demand = 6.0;
  cfg.od_pairs.push_back(od);
  return cfg;
}

// Distinct single-link routes per class, for unit sensitivity checks.
inline NetworkConfig unit_response_toy() {
  NetworkConfig cfg;
  cfg.name = "unit_response";
  cfg.num_nodes = 2;
  cfg.operators.push_back(
      make_operator("bike", OperatorKind::MoDIndependent, 2000, 1.0, 0.2));
  cfg.links.push_back(
      make_link(0, 1, LinkKind::MoDRegular2, "bike", 5.0, kInf, 10.0));
  cfg.links.push_back(make_link(0, 1, LinkKind::Drive, "", 4.0, kInf, 7.2));
  ODSpec od;
  od.origin = 0;
  od.destination = 1;
  od.demand = 8.0;
  cfg.od_pairs.push_back(od);
  return cfg;
}

}  // namespace maas::test
