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

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "maas/pipeline.hpp"

namespace {

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) grid.push_back(std::stod(item));
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assignment and pricing solver for platform-brokered "
               "multi-modal trips"};
  app.require_subcommand(1);

  maas::PipelineOptions opts;
  std::string eta_grid_spec;

  app.add_option("--config", opts.config_path, "network config file (JSON)");
  app.add_option("--out-dir", opts.out_dir, "output directory");
  app.add_option("--eta", opts.eta, "transit capacity price factor");
  app.add_option("--eta-grid", eta_grid_spec,
                 "comma-separated eta values for sweeps");
  app.add_option("--objective", opts.objective,
                 "sweep objective: platform|traveler|operator");
  app.add_option("--seed", opts.seed, "random seed for randomized utilities");
  app.add_option("--max-outer", opts.max_outer, "outer iteration cap");
  app.add_option("--inner", opts.inner_iterations, "inner iterations per solve");
  app.add_option("--tol-q", opts.tol_q, "demand gap tolerance");
  app.add_option("--tol-z", opts.tol_z, "flow gap tolerance");
  app.add_option("--alpha", opts.alpha, "demand step size");
  app.add_option("--gamma", opts.gamma, "inner step size");
  app.add_option("--op-cost", opts.op_cost_per_trip,
                 "operation cost constant added per trip in reports");

  for (const char* name :
       {"base", "assign", "price", "sweep", "report", "verify", "dump"}) {
    app.add_subcommand(name)->silent(false);
  }

  CLI11_PARSE(app, argc, argv);

  if (!eta_grid_spec.empty()) opts.eta_grid = parse_grid(eta_grid_spec);
  // The output directory may come from the environment when no flag is given.
  if (opts.out_dir == "out") {
    if (const char* env = std::getenv("MAAS_OUT_DIR")) opts.out_dir = env;
  }
  opts.log = &std::cout;

  const std::string command = app.get_subcommands().front()->get_name();
  return maas::run_pipeline(command, opts);
}
