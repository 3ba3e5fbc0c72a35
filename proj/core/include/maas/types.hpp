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

#include <limits>
#include <stdexcept>
#include <string>

namespace maas {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error hierarchy; the CLI maps these to process exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Bad or inconsistent configuration / network build input (exit code 4).
struct ConfigError : Error {
  using Error::Error;
};
// Argument outside its documented domain.
struct DomainError : Error {
  using Error::Error;
};
// Operation called before its prerequisite state exists.
struct StateError : Error {
  using Error::Error;
};
// MoD vacant time hit zero while access times were requested unguarded.
struct SingularServiceError : Error {
  using Error::Error;
};
// NaN/overflow in the fixed-point iterations.
struct DivergenceError : Error {
  using Error::Error;
};
// Revenue floors admit no capacity price (exit code 3).
struct InfeasiblePricingError : Error {
  using Error::Error;
};
// A verification oracle failed to converge; tests must not treat this as a pass.
struct OracleFailure : Error {
  using Error::Error;
};

enum class LinkKind {
  MTRegular,
  MTAccess,
  MTEgress,
  MoDRegular1,  // road-bound on-demand service, congested jointly with driving
  MoDRegular2,  // road-independent on-demand service, constant time
  MoDAccess,
  MoDEgress,
  Drive,
  Dummy,
  Transfer,  // only present when transfer links were not merged at build
};

enum class OperatorKind { MassTransit, MoDRoadbound, MoDIndependent };

const char* to_string(LinkKind k);
const char* to_string(OperatorKind k);
LinkKind link_kind_from_string(const std::string& s);
OperatorKind operator_kind_from_string(const std::string& s);

inline bool is_mod_regular(LinkKind k) {
  return k == LinkKind::MoDRegular1 || k == LinkKind::MoDRegular2;
}
inline bool is_access(LinkKind k) {
  return k == LinkKind::MTAccess || k == LinkKind::MoDAccess;
}
inline bool is_regular(LinkKind k) {
  return k == LinkKind::MTRegular || is_mod_regular(k);
}

struct Operator {
  std::string id;
  OperatorKind kind = OperatorKind::MassTransit;
  double fleet_time = 0;      // total vehicle-minutes (MoD only)
  double min_vacant = 0;      // lower bound on vacant vehicle-minutes
  double matching_coeff = 0;  // access-time coefficient (MoD only)
  double revenue_floor = 0;   // minimum acceptable revenue, fare-equivalent minutes
};

struct Node {
  int id = -1;
  std::string name;
  int physical = -1;  // physical node this copy belongs to, -1 for raw networks
};

struct Link {
  int id = -1;
  int tail = -1;
  int head = -1;
  LinkKind kind = LinkKind::Dummy;
  int op = -1;                    // operator index, -1 for dummy/drive links
  double free_flow_time = 0;      // constant time part (access: includes merged transfer time)
  double capacity = kInf;         // passengers (MT regular) or vehicles (road links)
  double fare = 0;                // operator fare / driving cost, equivalent minutes
  double planning_cost = 0;       // self-planning cost charged to non-MaaS traversals
  int paired_road_link = -1;      // MoDRegular1 <-> Drive twin sharing the physical road
  bool maas_ok = true;            // usable by MaaS flows
  bool nonmaas_ok = true;         // usable by non-MaaS flows
  bool drive_gateway = false;     // dummy link routing non-MaaS trips onto the road network

  // Fare as experienced by non-MaaS travelers (operator fare plus planning cost).
  double nonmaas_fare() const { return fare + planning_cost; }
};

struct ODPair {
  int origin = -1;       // physical origin (raw networks: the origin node itself)
  int destination = -1;  // physical destination
  double demand = 0;     // total trips Q_w
  double utility = 0;    // trip utility U_w, equivalent minutes

  // Node copies actually used by each traveler class. For raw networks these
  // coincide with origin/destination.
  int maas_origin_node = -1;
  int maas_dest_node = -1;
  int nonmaas_origin_node = -1;
  int nonmaas_dest_node = -1;
};

}  // namespace maas
