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

#include "maas/metrics.hpp"

#include <cmath>
#include <map>
#include <ostream>

namespace maas {

namespace {

char row_buf[512];

void emit(std::ostream& os, const char* fmt, auto... args) {
  std::snprintf(row_buf, sizeof(row_buf), fmt, args...);
  os << row_buf;
}

}  // namespace

ScenarioMetrics compute_metrics(const MultiModalNetwork& net,
                                const AssignmentResult& result,
                                double op_cost_per_trip) {
  ScenarioMetrics m;
  m.total_trips = net.total_demand();
  const double maas_trips = result.q.sum();
  m.maas_share = maas_trips / m.total_trips;
  m.nonmaas_share = 1.0 - m.maas_share;

  // Non-MaaS trips that start on the road network are driving trips; the rest
  // board a service from the transfer node.
  const ClassSpace& ns = net.nonmaas_space();
  double drive_trips = 0;
  for (int b = 0; b < ns.num_origins(); ++b) {
    const int origin = ns.origins[b];
    for (int lid : net.out_links(origin)) {
      const Link& link = net.links()[lid];
      if (link.kind != LinkKind::Drive && !link.drive_gateway) continue;
      const int col = ns.link_col[lid];
      if (col >= 0) drive_trips += result.flows.xt(col, b);
    }
  }
  const double nonmaas_trips = m.total_trips - maas_trips;
  drive_trips = std::min(drive_trips, nonmaas_trips);
  m.nonmaas_drive_share = drive_trips / m.total_trips;
  m.nonmaas_service_share = (nonmaas_trips - drive_trips) / m.total_trips;

  // Every service boarding beyond the first of a trip is a transfer, so the
  // transfer count is access-link flow minus service trips.
  const Eigen::VectorXd x_maas = result.flows.class_link_flow(net, true);
  const Eigen::VectorXd x_non = result.flows.class_link_flow(net, false);
  double access_maas = 0, access_non = 0;
  for (const Link& link : net.links()) {
    if (!is_access(link.kind)) continue;
    access_maas += x_maas[link.id];
    access_non += x_non[link.id];
  }
  const double nonmaas_service_trips = nonmaas_trips - drive_trips;
  const double transfers_maas = std::max(0.0, access_maas - maas_trips);
  const double transfers_non = std::max(0.0, access_non - nonmaas_service_trips);
  m.transfers_per_trip = (transfers_maas + transfers_non) / m.total_trips;
  m.transfers_maas = maas_trips > 0 ? transfers_maas / maas_trips : 0;
  m.transfers_nonmaas = nonmaas_trips > 0 ? transfers_non / nonmaas_trips : 0;

  double mt_cap = 0, mt_maas = 0, mt_non = 0;
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    mt_cap += net.links()[lid].capacity;
    mt_maas += x_maas[lid];
    mt_non += x_non[lid];
  }
  if (mt_cap > 0) {
    m.mt_util_maas = mt_maas / mt_cap;
    m.mt_util_nonmaas = mt_non / mt_cap;
    m.mt_utilization = m.mt_util_maas + m.mt_util_nonmaas;
  }

  double fleet = 0, occ_maas = 0, occ_non = 0;
  for (size_t op = 0; op < net.operators().size(); ++op) {
    if (net.operators()[op].kind == OperatorKind::MassTransit) continue;
    fleet += net.operators()[op].fleet_time;
    for (int lid : net.operator_regular_links(static_cast<int>(op))) {
      occ_maas += result.cost.time[lid] * x_maas[lid];
      occ_non += result.cost.time[lid] * x_non[lid];
    }
  }
  if (fleet > 0) {
    m.mod_util_maas = occ_maas / fleet;
    m.mod_util_nonmaas = occ_non / fleet;
    m.mod_utilization = m.mod_util_maas + m.mod_util_nonmaas;
  }

  m.travel_time_per_trip = result.objective / m.total_trips;
  m.social_cost_per_trip = m.travel_time_per_trip + op_cost_per_trip;
  return m;
}

VocComparison voc_groups(const MultiModalNetwork& net,
                         const AssignmentResult& base,
                         const AssignmentResult& scenario) {
  // Road links are matched to transit flow through the physical corridor of
  // their endpoints.
  std::map<std::pair<int, int>, double> mt_flow_base, mt_flow_now, mt_cap;
  const Eigen::VectorXd base_total = base.flows.total_link_flow(net);
  const Eigen::VectorXd now_total = scenario.flows.total_link_flow(net);
  for (int lid : net.links_of_kind(LinkKind::MTRegular)) {
    const Link& l = net.links()[lid];
    const auto key = std::make_pair(net.nodes()[l.tail].physical,
                                    net.nodes()[l.head].physical);
    mt_flow_base[key] += base_total[lid];
    mt_flow_now[key] += now_total[lid];
    mt_cap[key] += l.capacity;
  }

  VocTable table_base, table_now;
  auto add = [](VocGroup& g, double car_voc, double car_flow, double mt_voc,
                double mt_flow) {
    ++g.links;
    g.car_flow += car_flow;
    g.mt_flow += mt_flow;
    g.avg_voc_car += car_voc;
    g.avg_voc_mt += mt_voc;
    g.max_voc_car = std::max(g.max_voc_car, car_voc);
    g.max_voc_mt = std::max(g.max_voc_mt, mt_voc);
  };

  for (int lid : net.links_of_kind(LinkKind::Drive)) {
    const Link& l = net.links()[lid];
    const auto key = std::make_pair(net.nodes()[l.tail].physical,
                                    net.nodes()[l.head].physical);
    if (!mt_cap.count(key)) continue;  // no transit on this corridor
    const double pair_base =
        l.paired_road_link >= 0 ? base_total[l.paired_road_link] : 0.0;
    const double pair_now =
        l.paired_road_link >= 0 ? now_total[l.paired_road_link] : 0.0;
    const double car_flow_base = base_total[lid] + pair_base;
    const double car_flow_now = now_total[lid] + pair_now;
    const double voc_base = car_flow_base / l.capacity;
    const double voc_now = car_flow_now / l.capacity;
    const double mt_voc_base = mt_flow_base[key] / mt_cap[key];
    const double mt_voc_now = mt_flow_now[key] / mt_cap[key];
    const bool congested = voc_base >= 1.0;
    add(congested ? table_base.congested : table_base.uncongested, voc_base,
        car_flow_base, mt_voc_base, mt_flow_base[key]);
    add(congested ? table_now.congested : table_now.uncongested, voc_now,
        car_flow_now, mt_voc_now, mt_flow_now[key]);
  }
  for (VocTable* t : {&table_base, &table_now}) {
    for (VocGroup* g : {&t->congested, &t->uncongested}) {
      if (g->links > 0) {
        g->avg_voc_car /= g->links;
        g->avg_voc_mt /= g->links;
      }
    }
  }
  return {table_base, table_now};
}

void write_metrics_csv(std::ostream& os, const ScenarioMetrics& base,
                       const std::optional<ScenarioMetrics>& scenario) {
  os << "metric,base" << (scenario ? ",with_platform" : "") << "\n";
  auto row = [&](const char* name, double b, double s) {
    if (scenario)
      emit(os, "%s,%.6f,%.6f\n", name, b, s);
    else
      emit(os, "%s,%.6f\n", name, b);
  };
  const ScenarioMetrics& s = scenario ? *scenario : base;
  row("total_trips", base.total_trips, s.total_trips);
  row("maas_share", base.maas_share, s.maas_share);
  row("nonmaas_share", base.nonmaas_share, s.nonmaas_share);
  row("nonmaas_service_share", base.nonmaas_service_share,
      s.nonmaas_service_share);
  row("nonmaas_drive_share", base.nonmaas_drive_share, s.nonmaas_drive_share);
  row("transfers_per_trip", base.transfers_per_trip, s.transfers_per_trip);
  row("transfers_maas", base.transfers_maas, s.transfers_maas);
  row("transfers_nonmaas", base.transfers_nonmaas, s.transfers_nonmaas);
  row("mt_utilization", base.mt_utilization, s.mt_utilization);
  row("mt_util_maas", base.mt_util_maas, s.mt_util_maas);
  row("mt_util_nonmaas", base.mt_util_nonmaas, s.mt_util_nonmaas);
  row("mod_utilization", base.mod_utilization, s.mod_utilization);
  row("mod_util_maas", base.mod_util_maas, s.mod_util_maas);
  row("mod_util_nonmaas", base.mod_util_nonmaas, s.mod_util_nonmaas);
  row("travel_time_per_trip", base.travel_time_per_trip,
      s.travel_time_per_trip);
  row("social_cost_per_trip", base.social_cost_per_trip,
      s.social_cost_per_trip);
}

void write_voc_csv(std::ostream& os, const VocTable& base, const VocTable& now) {
  os << "group,scenario,links,car_flow,mt_flow,avg_voc_car,avg_voc_mt,"
        "max_voc_car,max_voc_mt\n";
  auto row = [&](const char* group, const char* scen, const VocGroup& g) {
    emit(os, "%s,%s,%d,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n", group, scen, g.links,
         g.car_flow, g.mt_flow, g.avg_voc_car, g.avg_voc_mt, g.max_voc_car,
         g.max_voc_mt);
  };
  row("congested", "base", base.congested);
  row("congested", "with_platform", now.congested);
  row("uncongested", "base", base.uncongested);
  row("uncongested", "with_platform", now.uncongested);
}

void write_od_pricing_csv(std::ostream& os, const MultiModalNetwork& net,
                          const AssignmentResult& assignment,
                          const PricingScheme& scheme, const PayoffReport& pay) {
  os << "origin,destination,demand,maas_demand,fare,maas_cost,nonmaas_cost,"
        "maas_saving,nonmaas_saving\n";
  for (int w = 0; w < net.num_ods(); ++w) {
    const ODPair& od = net.od_pairs()[w];
    emit(os, "%d,%d,%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", od.origin,
         od.destination, od.demand, assignment.q[w], scheme.p_d[w],
         pay.maas_cost[w], pay.nonmaas_cost[w], pay.maas_saving[w],
         pay.nonmaas_saving[w]);
  }
}

void write_pricing_summary_csv(std::ostream& os, const MultiModalNetwork& net,
                               const AssignmentResult& assignment,
                               const PricingScheme& scheme,
                               const PayoffReport& pay) {
  double fare_min = kInf, fare_max = -kInf, fare_sum = 0;
  double comp_min = kInf, comp_max = -kInf, comp_sum = 0;
  int fares = 0, comps = 0;
  double ratio_m_min = kInf, ratio_m_max = -kInf, ratio_m_sum = 0;
  double ratio_n_min = kInf, ratio_n_max = -kInf, ratio_n_sum = 0;
  int ratio_m_n = 0, ratio_n_n = 0;
  for (int w = 0; w < net.num_ods(); ++w) {
    if (assignment.q[w] <= 1e-9) continue;
    const double fare = scheme.p_d[w];
    if (fare >= 0) {
      fare_min = std::min(fare_min, fare);
      fare_max = std::max(fare_max, fare);
      fare_sum += fare;
      ++fares;
      if (fare > 0) {
        const double r = pay.fare_time_ratio_maas[w];
        ratio_m_min = std::min(ratio_m_min, r);
        ratio_m_max = std::max(ratio_m_max, r);
        ratio_m_sum += r;
        ++ratio_m_n;
      }
    } else {
      comp_min = std::min(comp_min, -fare);
      comp_max = std::max(comp_max, -fare);
      comp_sum += -fare;
      ++comps;
    }
    const double rn = pay.fare_time_ratio_nonmaas[w];
    if (rn > 0) {
      ratio_n_min = std::min(ratio_n_min, rn);
      ratio_n_max = std::max(ratio_n_max, rn);
      ratio_n_sum += rn;
      ++ratio_n_n;
    }
  }
  os << "quantity,min,avg,max,count\n";
  auto row = [&](const char* name, double lo, double sum, double hi, int n) {
    if (n > 0)
      emit(os, "%s,%.6f,%.6f,%.6f,%d\n", name, lo, sum / n, hi, n);
    else
      emit(os, "%s,,,,0\n", name);
  };
  row("fare", fare_min, fare_sum, fare_max, fares);
  row("compensation", comp_min, comp_sum, comp_max, comps);
  row("fare_to_time_maas", ratio_m_min, ratio_m_sum, ratio_m_max, ratio_m_n);
  row("fare_to_time_nonmaas", ratio_n_min, ratio_n_sum, ratio_n_max, ratio_n_n);
  emit(os, "eta,%.6f,%.6f,%.6f,1\n", scheme.eta, scheme.eta, scheme.eta);
  emit(os, "capacity_price,%.6f,%.6f,%.6f,1\n", scheme.p_s, scheme.p_s,
       scheme.p_s);
  emit(os, "profit,%.4f,%.4f,%.4f,1\n", scheme.profit, scheme.profit,
       scheme.profit);
  for (size_t m = 0; m < pay.operator_revenue.size(); ++m) {
    const std::string name = "revenue_" + net.operators()[m].id;
    emit(os, "%s,%.4f,%.4f,%.4f,1\n", name.c_str(), pay.operator_revenue[m],
         pay.operator_revenue[m], pay.operator_revenue[m]);
  }
}

void write_sweep_csv(std::ostream& os, const MultiModalNetwork& net,
                     const SweepResult& sweep) {
  os << "eta,feasible,capacity_price,profit,traveler_cost";
  for (const auto& op : net.operators()) os << ",revenue_" << op.id;
  os << ",best,note\n";
  for (size_t i = 0; i < sweep.rows.size(); ++i) {
    const SweepRow& r = sweep.rows[i];
    emit(os, "%.4f,%d,%.6f,%.4f,%.4f", r.eta, r.feasible ? 1 : 0, r.p_s,
         r.profit, r.traveler_cost);
    for (size_t m = 0; m < net.operators().size(); ++m) {
      const double rev =
          m < r.operator_revenue.size() ? r.operator_revenue[m] : 0.0;
      emit(os, ",%.4f", rev);
    }
    os << "," << (static_cast<int>(i) == sweep.best ? 1 : 0) << ","
       << r.note << "\n";
  }
}

void write_convergence_csv(std::ostream& os, const AssignmentResult& result) {
  os << "outer,objective,gap_q,gap_z,max_violation,rho,inner\n";
  for (size_t k = 0; k < result.history.size(); ++k) {
    const auto& h = result.history[k];
    emit(os, "%zu,%.10e,%.6e,%.6e,%.6e,%.3f,%d\n", k, h[0], h[1], h[2], h[3],
         h[4], static_cast<int>(h[5]));
  }
}

}  // namespace maas
