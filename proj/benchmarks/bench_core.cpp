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

#include <benchmark/benchmark.h>

#include "maas/bilevel.hpp"
#include "maas/pricing.hpp"
#include "maas/verification.hpp"

namespace {

const maas::MultiModalNetwork& sioux_falls() {
  static const maas::MultiModalNetwork net = maas::build_sioux_falls();
  return net;
}

void BM_TravelTime(benchmark::State& state) {
  const auto& net = sioux_falls();
  const Eigen::VectorXd flow =
      Eigen::VectorXd::Constant(net.num_links(), 1000.0);
  for (auto _ : state) {
    auto eval = maas::travel_time(net, flow);
    benchmark::DoNotOptimize(eval.time.data());
  }
}
BENCHMARK(BM_TravelTime);

void BM_AffineProjection(benchmark::State& state) {
  const auto& net = sioux_falls();
  const maas::Demand demand =
      net.demand_vector(Eigen::VectorXd::Zero(net.num_ods()));
  maas::FlowState z = maas::FlowState::zero(net);
  z.x.setConstant(3.0);
  z.xt.setConstant(5.0);
  for (auto _ : state) {
    auto p = maas::project_affine(net, z, demand);
    benchmark::DoNotOptimize(p.x.data());
  }
}
BENCHMARK(BM_AffineProjection);

void BM_DavisYinStep(benchmark::State& state) {
  const auto& net = sioux_falls();
  const maas::Demand demand =
      net.demand_vector(Eigen::VectorXd::Zero(net.num_ods()));
  const maas::MultiplierState mult = maas::MultiplierState::zero(net);
  maas::SplitState split;
  split.u = maas::FlowState::zero(net);
  split.z = split.u;
  split.v = split.u;
  for (auto _ : state) {
    maas::davis_yin_step(net, split, 2.5e-4, mult, demand);
    benchmark::DoNotOptimize(split.u.x.data());
  }
}
BENCHMARK(BM_DavisYinStep);

void BM_NodePotentials(benchmark::State& state) {
  const auto& net = sioux_falls();
  const Eigen::VectorXd flow = Eigen::VectorXd::Constant(net.num_links(), 500.0);
  const auto eval = maas::travel_time(net, flow);
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(net.num_links());
  for (auto _ : state) {
    auto pot = maas::node_potentials(net, eval.time, mu);
    benchmark::DoNotOptimize(pot.pi.data());
  }
}
BENCHMARK(BM_NodePotentials);

void BM_SolvePricing(benchmark::State& state) {
  const maas::PricingInputs inputs = maas::random_pricing_inputs(7);
  for (auto _ : state) {
    try {
      auto scheme = maas::solve_pricing(inputs);
      benchmark::DoNotOptimize(scheme.profit);
    } catch (const maas::Error&) {
    }
  }
}
BENCHMARK(BM_SolvePricing);

}  // namespace

BENCHMARK_MAIN();
