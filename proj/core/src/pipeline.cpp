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

#include "maas/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "maas/verification.hpp"

namespace maas {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (int j = 0; j < m.cols(); ++j) arr.push_back(vector_to_json(m.col(j)));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& arr, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  if (static_cast<int>(arr.size()) != cols)
    throw StateError("stored matrix has unexpected shape");
  for (int j = 0; j < cols; ++j) m.col(j) = vector_from_json(arr[j]);
  return m;
}

json result_to_json(const MultiModalNetwork& net, const AssignmentResult& r) {
  json j;
  j["q"] = vector_to_json(r.q);
  j["x"] = matrix_to_json(r.flows.x);
  j["xt"] = matrix_to_json(r.flows.xt);
  j["mu"] = vector_to_json(r.mult.mu);
  j["rho"] = r.mult.rho;
  j["objective"] = r.objective;
  j["converged"] = r.converged;
  j["outer_iterations"] = r.outer_iterations;
  j["gap_q"] = r.gap_q;
  j["gap_z"] = r.gap_z;
  j["max_violation"] = r.max_violation;
  (void)net;
  return j;
}

AssignmentResult result_from_json(const MultiModalNetwork& net, const json& j) {
  AssignmentResult r;
  r.q = vector_from_json(j.at("q"));
  FlowState zero = FlowState::zero(net);
  r.flows.x = matrix_from_json(j.at("x"), zero.x.rows(), zero.x.cols());
  r.flows.xt = matrix_from_json(j.at("xt"), zero.xt.rows(), zero.xt.cols());
  r.mult.mu = vector_from_json(j.at("mu"));
  r.mult.rho = j.at("rho").get<double>();
  r.objective = j.at("objective").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.outer_iterations = j.at("outer_iterations").get<int>();
  r.gap_q = j.at("gap_q").get<double>();
  r.gap_z = j.at("gap_z").get<double>();
  r.max_violation = j.at("max_violation").get<double>();
  // Recompute the derived fields.
  const Eigen::VectorXd total = r.flows.total_link_flow(net);
  r.cost = travel_time(net, total);
  r.potentials = node_potentials(net, r.cost.time, r.mult.mu);
  r.capacity = capacity_purchase(net, r.flows, r.cost);
  return r;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StateError("cannot write " + path);
  out << contents;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateError("missing state file: " + path +
                            " (run the earlier pipeline stages first)");
  json j;
  in >> j;
  return j;
}

std::vector<double> default_eta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(0.60 + 0.05 * i);
  return grid;
}

}  // namespace

AlgorithmParams params_from_options(const PipelineOptions& opts) {
  AlgorithmParams p;
  if (opts.max_outer > 0) p.max_outer = opts.max_outer;
  if (opts.inner_iterations > 0) p.inner_iterations = opts.inner_iterations;
  if (opts.tol_q > 0) p.tol_q = opts.tol_q;
  if (opts.tol_z > 0) p.tol_z = opts.tol_z;
  if (opts.alpha > 0) p.alpha = opts.alpha;
  if (opts.gamma > 0) p.gamma = opts.gamma;
  p.log = opts.log;
  return p;
}

void save_base_state(const std::string& path, const MultiModalNetwork& net,
                     const BaseState& state) {
  json j;
  j["network"] = net.name();
  j["utility"] = vector_to_json(state.utility);
  j["base_revenue"] = state.base_revenue;
  j["result"] = result_to_json(net, state.result);
  write_file(path, j.dump());
}

BaseState load_base_state(const std::string& path, const MultiModalNetwork& net) {
  const json j = read_json_file(path);
  BaseState state;
  state.utility = vector_from_json(j.at("utility"));
  state.base_revenue = j.at("base_revenue").get<std::vector<double>>();
  state.result = result_from_json(net, j.at("result"));
  if (state.utility.size() != net.num_ods())
    throw StateError("base state does not match the configured network");
  return state;
}

void save_assign_state(const std::string& path, const MultiModalNetwork& net,
                       const AssignState& state) {
  json j;
  j["network"] = net.name();
  j["result"] = result_to_json(net, state.result);
  write_file(path, j.dump());
}

AssignState load_assign_state(const std::string& path,
                              const MultiModalNetwork& net) {
  const json j = read_json_file(path);
  AssignState state;
  state.result = result_from_json(net, j.at("result"));
  return state;
}

namespace {

struct PipelineContext {
  const PipelineOptions& opts;
  MultiModalNetwork net;
  std::ostream& log;

  std::string out_path(const std::string& name) const {
    return (fs::path(opts.out_dir) / name).string();
  }
};

std::vector<double> base_operator_revenue(const MultiModalNetwork& net,
                                          const AssignmentResult& base) {
  const Eigen::VectorXd x_non = base.flows.class_link_flow(net, false);
  std::vector<double> revenue(net.operators().size(), 0.0);
  for (size_t m = 0; m < net.operators().size(); ++m)
    for (int lid : net.operator_regular_links(static_cast<int>(m)))
      revenue[m] += net.links()[lid].fare * x_non[lid];
  return revenue;
}

int cmd_base(PipelineContext& ctx) {
  AlgorithmParams params = params_from_options(ctx.opts);
  std::ofstream conv(ctx.out_path("convergence_base.csv"));
  params.log_csv = &conv;
  const AssignmentResult base = solve_base(ctx.net, params);

  BaseState state;
  state.result = base;
  state.utility = base.potentials.pi_tilde;
  for (int w = 0; w < ctx.net.num_ods(); ++w) {
    if (!std::isfinite(state.utility[w]))
      throw StateError("base scenario leaves an OD without a finite cost");
  }
  state.base_revenue = base_operator_revenue(ctx.net, base);
  save_base_state(ctx.out_path("base_state.json"), ctx.net, state);

  const ScenarioMetrics metrics =
      compute_metrics(ctx.net, base, ctx.opts.op_cost_per_trip);
  std::ofstream mcsv(ctx.out_path("base_metrics.csv"));
  write_metrics_csv(mcsv, metrics, std::nullopt);
  ctx.log << "base: objective " << base.objective << ", time/trip "
          << metrics.travel_time_per_trip << ", service share "
          << metrics.nonmaas_service_share << ", converged "
          << (base.converged ? "yes" : "no") << "\n";
  return base.converged ? kExitOk : kExitNotConverged;
}

int cmd_assign(PipelineContext& ctx) {
  const BaseState base =
      load_base_state(ctx.out_path("base_state.json"), ctx.net);
  AlgorithmParams params = params_from_options(ctx.opts);
  std::ofstream conv(ctx.out_path("convergence_assign.csv"));
  params.log_csv = &conv;

  const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(ctx.net.num_ods());
  const AssignmentResult result =
      solve_assignment(ctx.net, params, q0, &base.result.flows);

  AssignState state;
  state.result = result;
  save_assign_state(ctx.out_path("assign_state.json"), ctx.net, state);
  const ScenarioMetrics metrics =
      compute_metrics(ctx.net, result, ctx.opts.op_cost_per_trip);
  std::ofstream mcsv(ctx.out_path("assign_metrics.csv"));
  write_metrics_csv(mcsv, metrics, std::nullopt);
  ctx.log << "assign: MaaS share " << 100 * metrics.maas_share
          << "%, objective " << result.objective << ", outer iterations "
          << result.outer_iterations << ", converged "
          << (result.converged ? "yes" : "no") << "\n";
  return result.converged ? kExitOk : kExitNotConverged;
}

PricingScheme price_at(PipelineContext& ctx, const BaseState& base,
                       const AssignmentResult& assignment, double eta) {
  const PricingInputs inputs = build_pricing_inputs(
      ctx.net, assignment, base.utility, eta, base.base_revenue);
  PricingScheme scheme = solve_pricing(inputs);
  scheme.eta = eta;
  scheme.lambda = lambda_weights(ctx.net, assignment.cost.time, eta);
  return scheme;
}

void write_pricing_artifacts(PipelineContext& ctx, const BaseState& base,
                             const AssignmentResult& assignment,
                             const PricingScheme& scheme) {
  const PayoffReport pay =
      compute_payoffs(ctx.net, assignment, scheme, base.utility);
  std::ofstream od_csv(ctx.out_path("od_pricing.csv"));
  write_od_pricing_csv(od_csv, ctx.net, assignment, scheme, pay);
  std::ofstream sum_csv(ctx.out_path("pricing_summary.csv"));
  write_pricing_summary_csv(sum_csv, ctx.net, assignment, scheme, pay);

  json j;
  j["eta"] = scheme.eta;
  j["capacity_price"] = scheme.p_s;
  j["profit"] = scheme.profit;
  j["p_d"] = vector_to_json(scheme.p_d);
  j["lambda"] = vector_to_json(scheme.lambda);
  j["binding_floor_operator"] =
      scheme.binding_floor_operator >= 0
          ? ctx.net.operators()[scheme.binding_floor_operator].id
          : "";
  j["optimum_at_lower_bound"] = scheme.optimum_at_lower_bound;
  j["operator_revenue"] = pay.operator_revenue;
  json comp = json::array();
  for (int w : pay.compensated) {
    comp.push_back({{"origin", ctx.net.od_pairs()[w].origin},
                    {"destination", ctx.net.od_pairs()[w].destination},
                    {"fare", scheme.p_d[w]}});
  }
  j["compensated"] = comp;
  if (ctx.net.num_links() <= 64) {
    const StabilityReport stab =
        check_stability(ctx.net, assignment, scheme, base.utility,
                        ctx.opts.stability_hop_budget);
    j["stability_worst_within"] = stab.worst_within_platform;
    j["stability_worst_defection"] = stab.worst_defection;
  }
  write_file(ctx.out_path("price_state.json"), j.dump());
}

int cmd_price(PipelineContext& ctx) {
  const BaseState base =
      load_base_state(ctx.out_path("base_state.json"), ctx.net);
  const AssignState assign =
      load_assign_state(ctx.out_path("assign_state.json"), ctx.net);
  const PricingScheme scheme =
      price_at(ctx, base, assign.result, ctx.opts.eta);
  write_pricing_artifacts(ctx, base, assign.result, scheme);
  ctx.log << "price: eta " << scheme.eta << ", capacity price " << scheme.p_s
          << ", profit " << scheme.profit << "\n";
  return kExitOk;
}

int cmd_sweep(PipelineContext& ctx) {
  const BaseState base =
      load_base_state(ctx.out_path("base_state.json"), ctx.net);
  const AssignState assign =
      load_assign_state(ctx.out_path("assign_state.json"), ctx.net);
  const std::vector<double> grid =
      ctx.opts.eta_grid.empty() ? default_eta_grid() : ctx.opts.eta_grid;
  const SweepObjective objective =
      sweep_objective_from_string(ctx.opts.objective);
  const SweepResult sweep = scenario_sweep(ctx.net, assign.result, base.utility,
                                           grid, objective, base.base_revenue);
  std::ofstream csv(ctx.out_path("sweep_curve.csv"));
  write_sweep_csv(csv, ctx.net, sweep);
  if (sweep.best < 0) {
    ctx.log << "sweep: no feasible eta in the grid\n";
    for (const SweepRow& row : sweep.rows)
      ctx.log << "  eta " << row.eta << ": "
              << (row.note.empty() ? "objective constraint unmet" : row.note)
              << "\n";
    return kExitInfeasiblePricing;
  }
  const SweepRow& best = sweep.rows[sweep.best];
  const PricingScheme scheme =
      price_at(ctx, base, assign.result, best.eta);
  write_pricing_artifacts(ctx, base, assign.result, scheme);
  ctx.log << "sweep: best eta " << best.eta << " (objective "
          << ctx.opts.objective << "), capacity price " << best.p_s
          << ", profit " << best.profit << "\n";
  return kExitOk;
}

int cmd_report(PipelineContext& ctx) {
  const BaseState base =
      load_base_state(ctx.out_path("base_state.json"), ctx.net);
  const AssignState assign =
      load_assign_state(ctx.out_path("assign_state.json"), ctx.net);

  const ScenarioMetrics base_metrics =
      compute_metrics(ctx.net, base.result, ctx.opts.op_cost_per_trip);
  const ScenarioMetrics now_metrics =
      compute_metrics(ctx.net, assign.result, ctx.opts.op_cost_per_trip);
  std::ofstream mcsv(ctx.out_path("report_metrics.csv"));
  write_metrics_csv(mcsv, base_metrics, now_metrics);

  const VocComparison voc = voc_groups(ctx.net, base.result, assign.result);
  std::ofstream vcsv(ctx.out_path("report_voc.csv"));
  write_voc_csv(vcsv, voc.base, voc.scenario);

  json j;
  j["network"] = ctx.net.name();
  j["nodes"] = ctx.net.num_nodes();
  j["links"] = ctx.net.num_links();
  j["od_pairs"] = ctx.net.num_network_od_pairs();
  j["base"] = {{"objective", base.result.objective},
               {"travel_time_per_trip", base_metrics.travel_time_per_trip},
               {"service_share", base_metrics.nonmaas_service_share},
               {"drive_share", base_metrics.nonmaas_drive_share},
               {"transfers_per_trip", base_metrics.transfers_per_trip}};
  j["with_platform"] = {
      {"objective", assign.result.objective},
      {"travel_time_per_trip", now_metrics.travel_time_per_trip},
      {"maas_share", now_metrics.maas_share},
      {"drive_share", now_metrics.nonmaas_drive_share},
      {"transfers_per_trip", now_metrics.transfers_per_trip},
      {"converged", assign.result.converged}};
  if (fs::exists(ctx.out_path("price_state.json"))) {
    j["pricing"] = json::parse(std::ifstream(ctx.out_path("price_state.json")));
  }
  write_file(ctx.out_path("summary.json"), j.dump(2));
  ctx.log << "report: written to " << ctx.opts.out_dir << "\n";
  return kExitOk;
}

int cmd_dump(PipelineContext& ctx) {
  std::ostringstream table;
  ctx.net.dump_link_table(table);
  write_file(ctx.out_path("link_table.csv"), table.str());
  ctx.log << table.str();
  return kExitOk;
}

}  // namespace

int run_pipeline(const std::string& command, const PipelineOptions& opts) {
  std::ostream& log = opts.log ? *opts.log : std::cout;
  try {
    if (command == "verify") {
      return verify_suite(log) ? kExitOk : 1;
    }
    if (opts.config_path.empty()) throw ConfigError("missing --config");
    PipelineContext ctx{opts,
                        MultiModalNetwork::build(
                            load_network_config_file(opts.config_path)),
                        log};
    fs::create_directories(opts.out_dir);
    if (command == "base") return cmd_base(ctx);
    if (command == "assign") return cmd_assign(ctx);
    if (command == "price") return cmd_price(ctx);
    if (command == "sweep") return cmd_sweep(ctx);
    if (command == "report") return cmd_report(ctx);
    if (command == "dump") return cmd_dump(ctx);
    throw ConfigError("unknown command: " + command);
  } catch (const InfeasiblePricingError& e) {
    log << "error: " << e.what() << "\n";
    return kExitInfeasiblePricing;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StateError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    log << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace maas
