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

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "maas/types.hpp"

namespace maas {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// A raw link row as it appears in the config file.
struct LinkSpec {
  std::optional<int> id;
  int tail = -1, head = -1;
  LinkKind kind = LinkKind::Dummy;
  std::string op;  // operator id, may be empty
  double time = 0;
  double capacity = kInf;
  double fare = 0;
  double planning_cost = 0;
  int paired_road_link = -1;
  std::string classes = "auto";  // "auto" | "both" | "maas" | "nonmaas"
};

struct ODSpec {
  int origin = -1, destination = -1;
  double demand = 0;
  double utility = 0;
};

// One bidirectional physical corridor: a road link, its on-demand twin, and
// optionally a mass-transit line segment on top.
struct PhysicalLinkSpec {
  int a = -1, b = -1;
  double road_time = 0;
  double road_capacity = 0;
  double car_fare = 0;   // driving cost per traversal
  double mod_fare = 0;   // on-demand service fare
  bool has_mt = false;
  double mt_time = 0;
  double mt_capacity = 0;
  double mt_fare = 0;
};

struct NetworkConstants {
  double transfer_time = 1.0;    // added to every access link when merging
  double planning_cost = 2.5;    // charged to non-MaaS access traversals
  double mt_access_time = 1.25;  // raw MT access time, before merging
  double mt_egress_time = 0.25;
  double mod_egress_time = 0.0;
  bool merge_transfer_links = true;
};

struct NetworkConfig {
  std::string name = "network";
  std::vector<Operator> operators;

  // Raw mode: explicit links on integer node ids.
  int num_nodes = 0;
  std::vector<LinkSpec> links;

  // Physical mode: corridors plus transit lines; node copies are built.
  std::vector<PhysicalLinkSpec> physical_links;
  std::vector<std::vector<int>> mt_lines;  // node sequences, one per line
  std::vector<std::string> mt_line_operator;  // operator id per line (optional)
  NetworkConstants constants;

  std::vector<ODSpec> od_pairs;

  bool physical_mode() const { return !physical_links.empty(); }
};

NetworkConfig load_network_config(const std::string& json_text);
NetworkConfig load_network_config_file(const std::string& path);

// ---------------------------------------------------------------------------
// Per-class flow space
// ---------------------------------------------------------------------------

// Flow variables are origin-indexed per traveler class. All origin blocks of a
// class share one incidence matrix over the class-usable links, so flows are
// stored as (usable links) x (origins) matrices and the affine projection is a
// pair of dense products with the cached SVD factors.
struct ClassSpace {
  std::vector<int> link_ids;      // usable global link ids, ascending
  std::vector<int> link_col;      // global link id -> column, -1 if unusable
  std::vector<int> origins;       // origin node ids, one block per entry
  std::vector<int> origin_block;  // od index -> origin block
  Eigen::SparseMatrix<double> incidence;  // nodes x usable links
  // Compact SVD of the incidence matrix: incidence = U * S.asDiagonal() * V^T.
  Eigen::MatrixXd svd_u;  // nodes x rank
  Eigen::MatrixXd svd_v;  // links x rank
  Eigen::VectorXd svd_s;  // rank, strictly positive
  Eigen::MatrixXd pinv;   // V * S^-1 * U^T, used by the affine projection

  int num_links() const { return static_cast<int>(link_ids.size()); }
  int num_origins() const { return static_cast<int>(origins.size()); }
};

// Right-hand sides of the flow-conservation systems, one column per origin.
struct Demand {
  Eigen::MatrixXd maas;     // nodes x maas origins
  Eigen::MatrixXd nonmaas;  // nodes x nonmaas origins
};

struct ValidationReport {
  bool feasible = true;  // every OD individually routable at full MaaS demand
  std::vector<int> infeasible_ods;
  std::vector<bool> fleet_bound_ok;      // per operator, conservative bound
  std::vector<double> fleet_bound_need;  // per operator
  std::vector<std::string> messages;
};

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

class MultiModalNetwork {
 public:
  static MultiModalNetwork build(const NetworkConfig& config);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Operator>& operators() const { return operators_; }
  const std::vector<ODPair>& od_pairs() const { return od_pairs_; }
  const NetworkConfig& config() const { return config_; }
  const std::string& name() const { return config_.name; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  int num_ods() const { return static_cast<int>(od_pairs_.size()); }
  // Every OD pair appears once per traveler class in the assignment problem.
  int num_network_od_pairs() const { return 2 * num_ods(); }

  const ClassSpace& maas_space() const { return maas_; }
  const ClassSpace& nonmaas_space() const { return nonmaas_; }

  const std::vector<int>& links_of_kind(LinkKind k) const;
  const std::vector<int>& operator_regular_links(int op) const;
  const std::vector<int>& operator_links(int op) const;
  const std::vector<int>& out_links(int node) const { return out_links_[node]; }
  const std::vector<int>& in_links(int node) const { return in_links_[node]; }
  int find_operator(const std::string& id) const;

  // b / b-tilde right-hand sides for a given MaaS demand split q (size W).
  Demand demand_vector(const Eigen::VectorXd& q) const;
  // Derivative helper: column increments of the rhs per unit of q_w.
  void demand_derivative(int od, Eigen::VectorXd& db_maas, int& maas_block,
                         Eigen::VectorXd& db_nonmaas, int& nonmaas_block) const;

  ValidationReport validate() const;

  // Table-form dump of the physical instance (physical mode only).
  void dump_link_table(std::ostream& os) const;

  double total_demand() const;

 private:
  MultiModalNetwork() = default;

  NetworkConfig config_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<Operator> operators_;
  std::vector<ODPair> od_pairs_;
  ClassSpace maas_, nonmaas_;
  std::vector<std::vector<int>> out_links_, in_links_;
  std::vector<std::vector<int>> kind_index_;  // per LinkKind
  std::vector<std::vector<int>> op_regular_links_, op_all_links_;
};

// Reference instance: the benchmark grid extended with transit lines, an
// e-hailing subnetwork, and per-node trip copies.
struct SiouxFallsParams {
  double mt_time_factor = 1.6;      // MT time = factor * road free-flow time
  double mt_line_capacity = 15000;  // passengers per regular link
  double mod_fleet_time = 2e6;      // vehicle-minutes
  double mod_matching_coeff = 26.78;
  double mod_min_vacant = 0.5;
  double mt_fare_factor = 0.5;    // of road free-flow time
  double car_fare_factor = 1.8;   // of road free-flow time
  double mod_fare_factor = 1.0;   // of road free-flow time
  double demand_scale = 1.0;
  NetworkConstants constants;     // transfer_time=1.0, planning_cost=2.5, ...
};

NetworkConfig sioux_falls_config(const SiouxFallsParams& params = {});
MultiModalNetwork build_sioux_falls(const SiouxFallsParams& params = {});

}  // namespace maas
