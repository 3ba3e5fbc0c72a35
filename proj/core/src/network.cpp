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

#include "maas/network.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"
#include "maas/shortest_path.hpp"

namespace maas {

using nlohmann::json;

const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::MTRegular: return "mt_regular";
    case LinkKind::MTAccess: return "mt_access";
    case LinkKind::MTEgress: return "mt_egress";
    case LinkKind::MoDRegular1: return "mod_regular_road";
    case LinkKind::MoDRegular2: return "mod_regular_independent";
    case LinkKind::MoDAccess: return "mod_access";
    case LinkKind::MoDEgress: return "mod_egress";
    case LinkKind::Drive: return "drive";
    case LinkKind::Dummy: return "dummy";
    case LinkKind::Transfer: return "transfer";
  }
  return "unknown";
}

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::MassTransit: return "mass_transit";
    case OperatorKind::MoDRoadbound: return "mod_roadbound";
    case OperatorKind::MoDIndependent: return "mod_independent";
  }
  return "unknown";
}

LinkKind link_kind_from_string(const std::string& s) {
  for (LinkKind k : {LinkKind::MTRegular, LinkKind::MTAccess, LinkKind::MTEgress,
                     LinkKind::MoDRegular1, LinkKind::MoDRegular2,
                     LinkKind::MoDAccess, LinkKind::MoDEgress, LinkKind::Drive,
                     LinkKind::Dummy, LinkKind::Transfer}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown link kind: " + s);
}

OperatorKind operator_kind_from_string(const std::string& s) {
  for (OperatorKind k : {OperatorKind::MassTransit, OperatorKind::MoDRoadbound,
                         OperatorKind::MoDIndependent}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown operator kind: " + s);
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

Operator parse_operator(const json& j) {
  Operator op;
  op.id = j.at("id").get<std::string>();
  op.kind = operator_kind_from_string(j.at("kind").get<std::string>());
  op.fleet_time = get_or(j, "fleet_time", 0.0);
  op.min_vacant = get_or(j, "min_vacant", 0.0);
  op.matching_coeff = get_or(j, "matching_coeff", 0.0);
  op.revenue_floor = get_or(j, "revenue_floor", 0.0);
  return op;
}

LinkSpec parse_link(const json& j) {
  LinkSpec l;
  if (j.contains("id")) l.id = j.at("id").get<int>();
  l.tail = j.at("tail").get<int>();
  l.head = j.at("head").get<int>();
  l.kind = link_kind_from_string(j.at("kind").get<std::string>());
  l.op = get_or<std::string>(j, "operator", "");
  l.time = get_or(j, "time", 0.0);
  l.capacity = get_or(j, "capacity", kInf);
  l.fare = get_or(j, "fare", 0.0);
  l.planning_cost = get_or(j, "planning_cost", 0.0);
  l.paired_road_link = get_or(j, "pair", -1);
  l.classes = get_or<std::string>(j, "classes", "auto");
  return l;
}

PhysicalLinkSpec parse_physical_link(const json& j) {
  PhysicalLinkSpec p;
  p.a = j.at("a").get<int>();
  p.b = j.at("b").get<int>();
  p.road_time = j.at("road_time").get<double>();
  p.road_capacity = j.at("road_capacity").get<double>();
  p.car_fare = get_or(j, "car_fare", 0.0);
  p.mod_fare = get_or(j, "mod_fare", 0.0);
  p.has_mt = j.contains("mt_time") && !j.at("mt_time").is_null();
  if (p.has_mt) {
    p.mt_time = j.at("mt_time").get<double>();
    p.mt_capacity = j.at("mt_capacity").get<double>();
    p.mt_fare = get_or(j, "mt_fare", 0.0);
  }
  return p;
}

}  // namespace

NetworkConfig load_network_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    const json& net = doc.contains("network") ? doc.at("network") : doc;
    NetworkConfig cfg;
    cfg.name = get_or<std::string>(net, "name", "network");
    const std::string type = get_or<std::string>(net, "type", "custom");
    if (type == "sioux_falls") {
      SiouxFallsParams params;
      params.demand_scale = get_or(net, "demand_scale", 1.0);
      NetworkConfig sf = sioux_falls_config(params);
      sf.name = cfg.name == "network" ? sf.name : cfg.name;
      return sf;
    }
    if (net.contains("constants")) {
      const json& c = net.at("constants");
      cfg.constants.transfer_time = get_or(c, "transfer_time", 1.0);
      cfg.constants.planning_cost = get_or(c, "planning_cost", 2.5);
      cfg.constants.mt_access_time = get_or(c, "mt_access_time", 1.25);
      cfg.constants.mt_egress_time = get_or(c, "mt_egress_time", 0.25);
      cfg.constants.mod_egress_time = get_or(c, "mod_egress_time", 0.0);
      cfg.constants.merge_transfer_links = get_or(c, "merge_transfer_links", true);
    }
    for (const auto& j : net.value("operators", json::array()))
      cfg.operators.push_back(parse_operator(j));
    cfg.num_nodes = get_or(net, "nodes", 0);
    for (const auto& j : net.value("links", json::array()))
      cfg.links.push_back(parse_link(j));
    for (const auto& j : net.value("physical_links", json::array()))
      cfg.physical_links.push_back(parse_physical_link(j));
    for (const auto& j : net.value("mt_lines", json::array()))
      cfg.mt_lines.push_back(j.get<std::vector<int>>());
    for (const auto& j : net.value("mt_line_operators", json::array()))
      cfg.mt_line_operator.push_back(j.get<std::string>());
    for (const auto& j : net.value("od_pairs", json::array())) {
      ODSpec od;
      od.origin = j.at("origin").get<int>();
      od.destination = j.at("destination").get<int>();
      od.demand = j.at("demand").get<double>();
      od.utility = get_or(j, "utility", 0.0);
      cfg.od_pairs.push_back(od);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

NetworkConfig load_network_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_network_config(ss.str());
}

// ---------------------------------------------------------------------------
// Build
// ---------------------------------------------------------------------------

namespace {

// Expands a physical-mode config into a raw link list with per-role node
// copies. Returns the raw config plus node names.
struct ExpandedNetwork {
  NetworkConfig raw;
  std::vector<Node> nodes;
};

class PhysicalExpander {
 public:
  PhysicalExpander(const NetworkConfig& cfg) : cfg_(cfg) {}

  ExpandedNetwork run() {
    collect_physical_nodes();
    find_operators();
    make_nodes();
    make_links();
    make_ods();
    out_.raw.name = cfg_.name;
    out_.raw.operators = cfg_.operators;
    out_.raw.constants = cfg_.constants;
    out_.raw.num_nodes = static_cast<int>(out_.nodes.size());
    return std::move(out_);
  }

 private:
  int new_node(const std::string& name, int physical) {
    Node n;
    n.id = static_cast<int>(out_.nodes.size());
    n.name = name;
    n.physical = physical;
    out_.nodes.push_back(n);
    return n.id;
  }

  void collect_physical_nodes() {
    std::set<int> ids;
    for (const auto& pl : cfg_.physical_links) {
      ids.insert(pl.a);
      ids.insert(pl.b);
    }
    for (const auto& od : cfg_.od_pairs) {
      ids.insert(od.origin);
      ids.insert(od.destination);
    }
    for (const auto& line : cfg_.mt_lines)
      for (int n : line) ids.insert(n);
    physical_.assign(ids.begin(), ids.end());
    for (const auto& line : cfg_.mt_lines) {
      for (size_t i = 0; i + 1 < line.size(); ++i) {
        if (!find_corridor(line[i], line[i + 1]))
          throw ConfigError("mt line uses corridor without physical link: " +
                            std::to_string(line[i]) + "-" +
                            std::to_string(line[i + 1]));
      }
    }
  }

  const PhysicalLinkSpec* find_corridor(int a, int b) const {
    for (const auto& pl : cfg_.physical_links) {
      if ((pl.a == a && pl.b == b) || (pl.a == b && pl.b == a)) return &pl;
    }
    return nullptr;
  }

  void find_operators() {
    for (size_t i = 0; i < cfg_.operators.size(); ++i) {
      if (cfg_.operators[i].kind == OperatorKind::MoDRoadbound && mod_op_ < 0)
        mod_op_ = static_cast<int>(i);
      if (cfg_.operators[i].kind == OperatorKind::MassTransit && mt_op_ < 0)
        mt_op_ = static_cast<int>(i);
    }
    if (!cfg_.physical_links.empty() && mod_op_ < 0)
      throw ConfigError("physical network requires a mod_roadbound operator");
    if (!cfg_.mt_lines.empty() && mt_op_ < 0)
      throw ConfigError("mt lines require a mass_transit operator");
    line_op_.assign(cfg_.mt_lines.size(), mt_op_);
    for (size_t i = 0; i < cfg_.mt_line_operator.size() && i < line_op_.size(); ++i) {
      for (size_t j = 0; j < cfg_.operators.size(); ++j)
        if (cfg_.operators[j].id == cfg_.mt_line_operator[i])
          line_op_[i] = static_cast<int>(j);
    }
  }

  void make_nodes() {
    std::set<int> od_nodes;
    for (const auto& od : cfg_.od_pairs) {
      od_nodes.insert(od.origin);
      od_nodes.insert(od.destination);
    }
    for (int p : physical_) {
      road_[p] = new_node("R" + std::to_string(p), p);
      mod_[p] = new_node("M" + std::to_string(p), p);
      transfer_[p] = new_node("TR" + std::to_string(p), p);
      if (od_nodes.count(p)) {
        maas_o_[p] = new_node("O+" + std::to_string(p), p);
        maas_d_[p] = new_node("D+" + std::to_string(p), p);
        nonmaas_o_[p] = new_node("O-" + std::to_string(p), p);
        nonmaas_d_[p] = new_node("D-" + std::to_string(p), p);
      }
    }
    for (size_t l = 0; l < cfg_.mt_lines.size(); ++l) {
      for (int p : cfg_.mt_lines[l]) {
        platform_[{static_cast<int>(l), p}] =
            new_node("L" + std::to_string(l) + ":" + std::to_string(p), p);
      }
    }
  }

  LinkSpec link(int tail, int head, LinkKind kind, int op, double time,
                double cap, double fare, double planning,
                const std::string& classes) {
    LinkSpec l;
    l.tail = tail;
    l.head = head;
    l.kind = kind;
    l.op = op >= 0 ? cfg_.operators[op].id : "";
    l.time = time;
    l.capacity = cap;
    l.fare = fare;
    l.planning_cost = planning;
    l.classes = classes;
    return l;
  }

  // Access links get the transfer time and the non-MaaS planning cost when
  // merging; otherwise an explicit transfer link is inserted in front.
  void add_access(int from, int to, LinkKind kind, int op, double raw_time,
                  int physical) {
    const auto& c = cfg_.constants;
    if (c.merge_transfer_links) {
      out_.raw.links.push_back(link(from, to, kind, op,
                                    raw_time + c.transfer_time, kInf, 0.0,
                                    c.planning_cost, "auto"));
    } else {
      const int mid = new_node("X" + std::to_string(out_.nodes.size()), physical);
      out_.raw.links.push_back(link(from, mid, LinkKind::Transfer, -1,
                                    c.transfer_time, kInf, 0.0,
                                    c.planning_cost, "auto"));
      out_.raw.links.push_back(
          link(mid, to, kind, op, raw_time, kInf, 0.0, 0.0, "auto"));
    }
  }

  void make_links() {
    const auto& c = cfg_.constants;
    // Road corridors: one driving link and one on-demand twin per direction.
    for (const auto& pl : cfg_.physical_links) {
      for (auto [a, b] : {std::pair{pl.a, pl.b}, std::pair{pl.b, pl.a}}) {
        const int drive_idx = static_cast<int>(out_.raw.links.size());
        out_.raw.links.push_back(link(road_[a], road_[b], LinkKind::Drive, -1,
                                      pl.road_time, pl.road_capacity,
                                      pl.car_fare, 0.0, "auto"));
        LinkSpec mod = link(mod_[a], mod_[b], LinkKind::MoDRegular1, mod_op_,
                            pl.road_time, pl.road_capacity, pl.mod_fare, 0.0,
                            "auto");
        mod.paired_road_link = drive_idx;
        out_.raw.links.push_back(mod);
      }
    }
    // Transit lines: per-line platform nodes chained by regular links.
    for (size_t l = 0; l < cfg_.mt_lines.size(); ++l) {
      const auto& line = cfg_.mt_lines[l];
      const int op = line_op_[l];
      for (size_t i = 0; i + 1 < line.size(); ++i) {
        const PhysicalLinkSpec* pl = find_corridor(line[i], line[i + 1]);
        if (!pl->has_mt)
          throw ConfigError("mt line uses corridor without transit data");
        const int u = platform_[{static_cast<int>(l), line[i]}];
        const int v = platform_[{static_cast<int>(l), line[i + 1]}];
        out_.raw.links.push_back(link(u, v, LinkKind::MTRegular, op, pl->mt_time,
                                      pl->mt_capacity, pl->mt_fare, 0.0, "auto"));
        out_.raw.links.push_back(link(v, u, LinkKind::MTRegular, op, pl->mt_time,
                                      pl->mt_capacity, pl->mt_fare, 0.0, "auto"));
      }
      for (int p : line) {
        const int plat = platform_[{static_cast<int>(l), p}];
        add_access(transfer_[p], plat, LinkKind::MTAccess, op, c.mt_access_time, p);
        out_.raw.links.push_back(link(plat, transfer_[p], LinkKind::MTEgress, op,
                                      c.mt_egress_time, kInf, 0.0, 0.0, "auto"));
      }
    }
    // On-demand access/egress at every physical node on the road network.
    for (int p : physical_) {
      add_access(transfer_[p], mod_[p], LinkKind::MoDAccess, mod_op_, 0.0, p);
      out_.raw.links.push_back(link(mod_[p], transfer_[p], LinkKind::MoDEgress,
                                    mod_op_, c.mod_egress_time, kInf, 0.0, 0.0,
                                    "auto"));
    }
    // Trip endpoints.
    for (int p : physical_) {
      if (!maas_o_.count(p)) continue;
      out_.raw.links.push_back(link(maas_o_[p], transfer_[p], LinkKind::Dummy, -1,
                                    -c.transfer_time, kInf, 0.0, 0.0, "maas"));
      out_.raw.links.push_back(link(transfer_[p], maas_d_[p], LinkKind::Dummy, -1,
                                    0.0, kInf, 0.0, 0.0, "maas"));
      out_.raw.links.push_back(link(nonmaas_o_[p], transfer_[p], LinkKind::Dummy,
                                    -1, 0.0, kInf, 0.0, 0.0, "nonmaas"));
      out_.raw.links.push_back(link(transfer_[p], nonmaas_d_[p], LinkKind::Dummy,
                                    -1, 0.0, kInf, 0.0, 0.0, "nonmaas"));
      LinkSpec to_road = link(nonmaas_o_[p], road_[p], LinkKind::Dummy, -1, 0.0,
                              kInf, 0.0, 0.0, "nonmaas");
      LinkSpec from_road = link(road_[p], nonmaas_d_[p], LinkKind::Dummy, -1, 0.0,
                                kInf, 0.0, 0.0, "nonmaas");
      to_road.paired_road_link = -1;
      out_.raw.links.push_back(to_road);
      drive_gateways_.push_back(static_cast<int>(out_.raw.links.size()) - 1);
      out_.raw.links.push_back(from_road);
      drive_gateways_.push_back(static_cast<int>(out_.raw.links.size()) - 1);
    }
    for (int idx : drive_gateways_) gateway_set_.insert(idx);
  }

  void make_ods() {
    for (const auto& od : cfg_.od_pairs) {
      ODSpec o = od;
      out_.raw.od_pairs.push_back(o);
    }
  }

 public:
  // Lookup tables consumed by MultiModalNetwork::build after expansion.
  std::map<int, int> maas_o_, maas_d_, nonmaas_o_, nonmaas_d_;
  std::set<int> gateway_set_;

 private:
  const NetworkConfig& cfg_;
  ExpandedNetwork out_;
  std::vector<int> physical_;
  std::map<int, int> road_, mod_, transfer_;
  std::map<std::pair<int, int>, int> platform_;
  int mod_op_ = -1, mt_op_ = -1;
  std::vector<int> line_op_;
  std::vector<int> drive_gateways_;
};

void compute_class_usability(Link& link, const std::string& classes) {
  if (classes == "maas") {
    link.maas_ok = true;
    link.nonmaas_ok = false;
  } else if (classes == "nonmaas") {
    link.maas_ok = false;
    link.nonmaas_ok = true;
  } else if (classes == "both") {
    link.maas_ok = link.nonmaas_ok = true;
  } else {  // auto
    link.maas_ok = link.kind != LinkKind::Drive;
    link.nonmaas_ok = true;
  }
}

ClassSpace build_class_space(const std::vector<Node>& nodes,
                             const std::vector<Link>& links,
                             const std::vector<ODPair>& ods, bool maas) {
  ClassSpace space;
  space.link_col.assign(links.size(), -1);
  for (const auto& link : links) {
    const bool ok = maas ? link.maas_ok : link.nonmaas_ok;
    if (!ok) continue;
    space.link_col[link.id] = static_cast<int>(space.link_ids.size());
    space.link_ids.push_back(link.id);
  }
  std::map<int, int> origin_index;
  for (const auto& od : ods) {
    const int o = maas ? od.maas_origin_node : od.nonmaas_origin_node;
    auto [it, inserted] = origin_index.try_emplace(
        o, static_cast<int>(space.origins.size()));
    if (inserted) space.origins.push_back(o);
    space.origin_block.push_back(it->second);
  }

  const int n = static_cast<int>(nodes.size());
  const int m = space.num_links();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * m);
  for (int j = 0; j < m; ++j) {
    const Link& link = links[space.link_ids[j]];
    triplets.emplace_back(link.tail, j, -1.0);
    triplets.emplace_back(link.head, j, 1.0);
  }
  space.incidence.resize(n, m);
  space.incidence.setFromTriplets(triplets.begin(), triplets.end());

  if (m > 0) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(space.incidence);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-10 * sv(0) : 0.0;
    int rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    if (rank == 0) throw ConfigError("incidence matrix is numerically zero");
    space.svd_u = svd.matrixU().leftCols(rank);
    space.svd_v = svd.matrixV().leftCols(rank);
    space.svd_s = sv.head(rank);
    space.pinv = space.svd_v * space.svd_s.cwiseInverse().asDiagonal() *
                 space.svd_u.transpose();
  }
  return space;
}

}  // namespace

MultiModalNetwork MultiModalNetwork::build(const NetworkConfig& config) {
  MultiModalNetwork net;
  NetworkConfig raw = config;
  std::vector<Node> nodes;
  std::map<int, int> maas_o, maas_d, nonmaas_o, nonmaas_d;
  std::set<int> gateways;

  if (config.physical_mode()) {
    PhysicalExpander expander(config);
    ExpandedNetwork expanded = expander.run();
    raw = std::move(expanded.raw);
    nodes = std::move(expanded.nodes);
    maas_o = expander.maas_o_;
    maas_d = expander.maas_d_;
    nonmaas_o = expander.nonmaas_o_;
    nonmaas_d = expander.nonmaas_d_;
    gateways = expander.gateway_set_;
  } else {
    nodes.resize(raw.num_nodes);
    for (int i = 0; i < raw.num_nodes; ++i) {
      nodes[i].id = i;
      nodes[i].name = std::to_string(i);
    }
  }
  net.config_ = config;
  net.config_.name = raw.name;

  // Operators.
  net.operators_ = raw.operators;
  std::map<std::string, int> op_index;
  for (size_t i = 0; i < net.operators_.size(); ++i) {
    const Operator& op = net.operators_[i];
    if (op_index.count(op.id)) throw ConfigError("duplicate operator id: " + op.id);
    op_index[op.id] = static_cast<int>(i);
    if (op.kind != OperatorKind::MassTransit) {
      if (!(op.fleet_time > op.min_vacant) || op.min_vacant < 0)
        throw ConfigError("operator " + op.id + ": requires fleet_time > min_vacant >= 0");
      if (!(op.matching_coeff > 0))
        throw ConfigError("operator " + op.id + ": requires matching_coeff > 0");
    }
    if (op.revenue_floor < 0)
      throw ConfigError("operator " + op.id + ": negative revenue floor");
  }

  // Links.
  std::set<int> seen_ids;
  for (size_t i = 0; i < raw.links.size(); ++i) {
    const LinkSpec& spec = raw.links[i];
    Link link;
    link.id = static_cast<int>(i);
    if (spec.id) {
      if (!seen_ids.insert(*spec.id).second)
        throw ConfigError("duplicate link id: " + std::to_string(*spec.id));
    }
    link.tail = spec.tail;
    link.head = spec.head;
    if (link.tail < 0 || link.head < 0 || link.tail >= static_cast<int>(nodes.size()) ||
        link.head >= static_cast<int>(nodes.size()))
      throw ConfigError("link endpoint out of range");
    link.kind = spec.kind;
    if (!spec.op.empty()) {
      auto it = op_index.find(spec.op);
      if (it == op_index.end()) throw ConfigError("unknown operator id: " + spec.op);
      link.op = it->second;
    }
    link.free_flow_time = spec.time;
    if (link.free_flow_time < 0 && link.kind != LinkKind::Dummy)
      throw ConfigError("negative time on non-dummy link");
    link.capacity = spec.capacity;
    if (!(link.capacity > 0)) throw ConfigError("link capacity must be positive");
    link.fare = spec.fare;
    if (link.fare < 0) throw ConfigError("negative link fare");
    link.planning_cost = spec.planning_cost;
    link.paired_road_link = spec.paired_road_link;
    compute_class_usability(link, spec.classes);
    link.drive_gateway = gateways.count(static_cast<int>(i)) > 0;
    net.links_.push_back(link);
  }
  for (const Link& link : net.links_) {
    if (link.paired_road_link >= 0) {
      if (link.paired_road_link >= static_cast<int>(net.links_.size()))
        throw ConfigError("paired road link out of range");
      net.links_[link.paired_road_link].paired_road_link = link.id;
    }
    if (is_regular(link.kind) && link.op < 0 && link.kind != LinkKind::MTRegular)
      throw ConfigError("on-demand regular link without operator");
  }

  // Prune isolated node copies and reindex.
  {
    std::vector<char> touched(nodes.size(), 0);
    for (const Link& l : net.links_) touched[l.tail] = touched[l.head] = 1;
    for (const auto& od : raw.od_pairs) {
      // endpoints must stay even if a toy leaves them unconnected; the
      // connectivity check below reports them
      if (config.physical_mode()) continue;
      if (od.origin >= 0 && od.origin < static_cast<int>(nodes.size()))
        touched[od.origin] = 1;
      if (od.destination >= 0 && od.destination < static_cast<int>(nodes.size()))
        touched[od.destination] = 1;
    }
    std::vector<int> remap(nodes.size(), -1);
    std::vector<Node> kept;
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (!touched[i]) continue;
      remap[i] = static_cast<int>(kept.size());
      Node n = nodes[i];
      n.id = remap[i];
      kept.push_back(n);
    }
    nodes = std::move(kept);
    for (Link& l : net.links_) {
      l.tail = remap[l.tail];
      l.head = remap[l.head];
    }
    auto remap_map = [&](std::map<int, int>& m) {
      for (auto& [k, v] : m) v = remap[v];
    };
    remap_map(maas_o);
    remap_map(maas_d);
    remap_map(nonmaas_o);
    remap_map(nonmaas_d);
    if (!config.physical_mode()) {
      for (auto& od : raw.od_pairs) {
        od.origin = remap[od.origin];
        od.destination = remap[od.destination];
      }
    }
  }
  net.nodes_ = nodes;

  // Adjacency and kind indexes.
  net.out_links_.assign(net.nodes_.size(), {});
  net.in_links_.assign(net.nodes_.size(), {});
  net.kind_index_.assign(10, {});
  net.op_regular_links_.assign(net.operators_.size(), {});
  net.op_all_links_.assign(net.operators_.size(), {});
  for (const Link& l : net.links_) {
    net.out_links_[l.tail].push_back(l.id);
    net.in_links_[l.head].push_back(l.id);
    net.kind_index_[static_cast<int>(l.kind)].push_back(l.id);
    if (l.op >= 0) {
      net.op_all_links_[l.op].push_back(l.id);
      if (is_regular(l.kind)) net.op_regular_links_[l.op].push_back(l.id);
    }
  }
  if (!net.links_of_kind(LinkKind::Transfer).empty() &&
      raw.constants.merge_transfer_links && config.physical_mode())
    throw ConfigError("merged network must not contain transfer links");

  // OD pairs.
  for (const auto& spec : raw.od_pairs) {
    if (spec.demand < 0) throw ConfigError("negative OD demand");
    if (spec.demand == 0) continue;
    ODPair od;
    od.origin = spec.origin;
    od.destination = spec.destination;
    if (od.origin == od.destination)
      throw ConfigError("OD pair with identical endpoints");
    od.demand = spec.demand;
    od.utility = spec.utility;
    if (config.physical_mode()) {
      od.maas_origin_node = maas_o.at(spec.origin);
      od.maas_dest_node = maas_d.at(spec.destination);
      od.nonmaas_origin_node = nonmaas_o.at(spec.origin);
      od.nonmaas_dest_node = nonmaas_d.at(spec.destination);
    } else {
      od.maas_origin_node = od.nonmaas_origin_node = spec.origin;
      od.maas_dest_node = od.nonmaas_dest_node = spec.destination;
    }
    net.od_pairs_.push_back(od);
  }

  // Every OD pair must be routable outside the platform (driving included).
  for (size_t w = 0; w < net.od_pairs_.size(); ++w) {
    const ODPair& od = net.od_pairs_[w];
    Eigen::VectorXd unit = Eigen::VectorXd::Ones(net.num_links());
    auto tree = shortest_paths_from(net, od.nonmaas_origin_node, unit,
                                    [](const Link& l) { return l.nonmaas_ok; });
    if (std::isinf(tree.dist[od.nonmaas_dest_node]))
      throw ConfigError("disconnected OD pair " + std::to_string(od.origin) +
                        "->" + std::to_string(od.destination));
  }

  net.maas_ = build_class_space(net.nodes_, net.links_, net.od_pairs_, true);
  net.nonmaas_ = build_class_space(net.nodes_, net.links_, net.od_pairs_, false);
  return net;
}

const std::vector<int>& MultiModalNetwork::links_of_kind(LinkKind k) const {
  return kind_index_[static_cast<int>(k)];
}

const std::vector<int>& MultiModalNetwork::operator_regular_links(int op) const {
  return op_regular_links_[op];
}

const std::vector<int>& MultiModalNetwork::operator_links(int op) const {
  return op_all_links_[op];
}

int MultiModalNetwork::find_operator(const std::string& id) const {
  for (size_t i = 0; i < operators_.size(); ++i)
    if (operators_[i].id == id) return static_cast<int>(i);
  return -1;
}

double MultiModalNetwork::total_demand() const {
  double total = 0;
  for (const auto& od : od_pairs_) total += od.demand;
  return total;
}

Demand MultiModalNetwork::demand_vector(const Eigen::VectorXd& q) const {
  if (q.size() != num_ods()) throw DomainError("demand vector size mismatch");
  Demand d;
  d.maas = Eigen::MatrixXd::Zero(num_nodes(), maas_.num_origins());
  d.nonmaas = Eigen::MatrixXd::Zero(num_nodes(), nonmaas_.num_origins());
  for (int w = 0; w < num_ods(); ++w) {
    const ODPair& od = od_pairs_[w];
    if (q[w] < -1e-12 || q[w] > od.demand + 1e-12)
      throw DomainError("MaaS demand outside [0, Q] for OD " + std::to_string(w));
    const double qw = std::min(std::max(q[w], 0.0), od.demand);
    const double rest = od.demand - qw;
    const int rb = maas_.origin_block[w];
    d.maas(od.maas_origin_node, rb) -= qw;
    d.maas(od.maas_dest_node, rb) += qw;
    const int nb = nonmaas_.origin_block[w];
    d.nonmaas(od.nonmaas_origin_node, nb) -= rest;
    d.nonmaas(od.nonmaas_dest_node, nb) += rest;
  }
  return d;
}

void MultiModalNetwork::demand_derivative(int od_index, Eigen::VectorXd& db_maas,
                                          int& maas_block,
                                          Eigen::VectorXd& db_nonmaas,
                                          int& nonmaas_block) const {
  const ODPair& od = od_pairs_[od_index];
  db_maas = Eigen::VectorXd::Zero(num_nodes());
  db_nonmaas = Eigen::VectorXd::Zero(num_nodes());
  db_maas(od.maas_origin_node) = -1.0;
  db_maas(od.maas_dest_node) = 1.0;
  db_nonmaas(od.nonmaas_origin_node) = 1.0;
  db_nonmaas(od.nonmaas_dest_node) = -1.0;
  maas_block = maas_.origin_block[od_index];
  nonmaas_block = nonmaas_.origin_block[od_index];
}

ValidationReport MultiModalNetwork::validate() const {
  ValidationReport report;
  // Feasibility of an all-MaaS split: each OD must be able to push its whole
  // demand through the MaaS-usable network, transit capacities binding and
  // everything else uncapacitated.
  std::vector<std::array<int, 2>> arcs;
  std::vector<double> caps;
  for (const Link& l : links_) {
    if (!l.maas_ok) continue;
    arcs.push_back({l.tail, l.head});
    caps.push_back(l.kind == LinkKind::MTRegular ? l.capacity : 1e18);
  }
  for (int w = 0; w < num_ods(); ++w) {
    const ODPair& od = od_pairs_[w];
    const double flow =
        max_flow(num_nodes(), arcs, caps, od.maas_origin_node, od.maas_dest_node);
    if (flow + 1e-9 < od.demand) {
      report.feasible = false;
      report.infeasible_ods.push_back(w);
    }
  }
  // Conservative fleet sufficiency: service times evaluated at total demand.
  const double total = total_demand();
  report.fleet_bound_ok.assign(operators_.size(), true);
  report.fleet_bound_need.assign(operators_.size(), 0.0);
  for (size_t m = 0; m < operators_.size(); ++m) {
    const Operator& op = operators_[m];
    if (op.kind == OperatorKind::MassTransit) continue;
    double need = op.min_vacant;
    for (int lid : op_regular_links_[m]) {
      const Link& l = links_[lid];
      double t = l.free_flow_time;
      if (l.kind == LinkKind::MoDRegular1 && std::isfinite(l.capacity))
        t = l.free_flow_time *
            (1.0 + 0.15 * std::pow(total / l.capacity, 4.0));
      need += t * total;
    }
    report.fleet_bound_need[m] = need;
    report.fleet_bound_ok[m] = op.fleet_time >= need;
    if (!report.fleet_bound_ok[m])
      report.messages.push_back("operator " + op.id +
                                ": fleet below the conservative sufficiency bound (" +
                                std::to_string(need) + ")");
  }
  return report;
}

void MultiModalNetwork::dump_link_table(std::ostream& os) const {
  if (!config_.physical_mode())
    throw StateError("link table dump requires a physical-mode network");
  os << "link_a,link_b,road_time,road_capacity,car_fare,mod_fare,mt_time,"
        "mt_capacity,mt_fare\n";
  char buf[256];
  for (const auto& pl : config_.physical_links) {
    if (pl.has_mt) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f\n",
                    pl.a, pl.b, pl.road_time, pl.road_capacity, pl.car_fare,
                    pl.mod_fare, pl.mt_time, pl.mt_capacity, pl.mt_fare);
    } else {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,,,\n", pl.a,
                    pl.b, pl.road_time, pl.road_capacity, pl.car_fare,
                    pl.mod_fare);
    }
    os << buf;
  }
}

}  // namespace maas
