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

#include <array>

#include "maas/network.hpp"

namespace maas {

namespace {

struct SFRow {
  int a, b;
  double road_time;
  double road_capacity;  // vehicles, after the 25% background-traffic reduction
  bool has_mt;
};

// Bidirectional corridors of the extended instance. Mass-transit lines run on
// the corridors flagged below; their times/fares derive from the road time.
constexpr std::array<SFRow, 38> kRows{{
    {1, 2, 6.00, 19425.15, false},  {1, 3, 4.00, 17552.60, false},
    {2, 6, 5.00, 3718.64, true},    {3, 4, 4.00, 12832.89, true},
    {3, 12, 4.00, 17552.60, false}, {4, 5, 2.00, 13337.10, true},
    {4, 11, 6.00, 3681.62, true},   {5, 6, 4.00, 3711.00, true},
    {5, 9, 5.00, 7500.00, true},    {6, 8, 2.00, 3673.94, true},
    {7, 8, 3.00, 5881.36, false},   {7, 18, 2.00, 17552.60, false},
    {8, 9, 10.00, 3787.64, false},  {8, 16, 5.00, 3784.37, true},
    {9, 10, 3.00, 10436.84, true},  {10, 11, 5.00, 7500.00, true},
    {10, 15, 6.00, 10134.00, true}, {10, 16, 4.00, 3641.19, true},
    {10, 17, 8.00, 3745.13, false}, {11, 12, 6.00, 3681.62, true},
    {11, 14, 4.00, 3657.38, true},  {12, 13, 3.00, 19425.15, false},
    {13, 24, 4.00, 3818.44, true},  {14, 15, 5.00, 3845.64, false},
    {14, 23, 4.00, 3693.59, true},  {15, 19, 3.00, 10923.56, false},
    {15, 22, 3.00, 7199.39, true},  {16, 17, 2.00, 3922.43, true},
    {16, 18, 3.00, 14759.92, true}, {17, 19, 2.00, 3617.96, true},
    {18, 20, 4.00, 17552.60, false},{19, 20, 4.00, 3751.96, true},
    {20, 21, 6.00, 3794.93, true},  {20, 22, 5.00, 3806.77, false},
    {21, 22, 2.00, 3922.43, true},  {21, 24, 3.00, 3664.02, true},
    {22, 23, 4.00, 3750.00, false}, {23, 24, 2.00, 3808.88, true},
}};

// Transit lines (metro + bus). Each line is a simple path over corridors with
// transit service; every stop gets its own platform node, so changing lines
// costs an egress, a transfer, and a fresh access.
const std::vector<std::vector<int>> kLines{
    {3, 4, 5, 6, 2},                        // west trunk
    {12, 11, 10, 9, 5},                     // east trunk
    {18, 16, 8, 6},                         // north crosstown
    {13, 24, 21, 20, 19, 17, 16, 10, 15, 22},  // orbital
    {4, 11, 14, 23, 24},                    // south diagonal
    {21, 22},                               // shuttle
};

// Benchmark trip table, trips per origin-destination pair (24 x 24).
constexpr std::array<std::array<int, 24>, 24> kDemand{{
    {0, 100, 100, 500, 200, 300, 500, 800, 500, 1300, 500, 200, 500, 300, 500, 500, 400, 100, 300, 300, 100, 400, 300, 100},
    {100, 0, 100, 200, 100, 400, 200, 400, 200, 600, 200, 100, 300, 100, 100, 400, 200, 0, 100, 100, 0, 100, 0, 0},
    {100, 100, 0, 200, 100, 300, 100, 200, 100, 300, 300, 200, 100, 100, 100, 200, 100, 0, 0, 0, 0, 100, 100, 0},
    {500, 200, 200, 0, 500, 400, 400, 700, 700, 1200, 1400, 600, 600, 500, 500, 800, 500, 100, 200, 300, 200, 400, 500, 200},
    {200, 100, 100, 500, 0, 200, 200, 500, 800, 1000, 500, 200, 200, 100, 200, 500, 200, 0, 100, 100, 100, 200, 100, 0},
    {300, 400, 300, 400, 200, 0, 400, 800, 400, 800, 400, 200, 200, 100, 200, 900, 500, 100, 200, 300, 100, 200, 100, 100},
    {500, 200, 100, 400, 200, 400, 0, 1000, 600, 1900, 500, 700, 400, 200, 500, 1400, 1000, 200, 400, 500, 200, 500, 200, 100},
    {800, 400, 200, 700, 500, 800, 1000, 0, 800, 1600, 800, 600, 600, 400, 600, 2200, 1400, 300, 700, 900, 400, 500, 300, 200},
    {500, 200, 100, 700, 800, 400, 600, 800, 0, 2800, 1400, 600, 600, 600, 900, 1400, 900, 200, 400, 600, 300, 700, 500, 200},
    {1300, 600, 300, 1200, 1000, 800, 1900, 1600, 2800, 0, 4000, 2000, 1900, 2100, 4000, 4400, 3900, 700, 1800, 2500, 1200, 2600, 1800, 800},
    {500, 200, 300, 1400, 500, 400, 500, 800, 1400, 3900, 0, 1400, 1000, 1600, 1400, 1400, 1000, 100, 400, 600, 400, 1100, 1300, 600},
    {200, 100, 200, 600, 200, 200, 700, 600, 600, 2000, 1400, 0, 1300, 700, 700, 700, 600, 200, 300, 400, 300, 700, 700, 500},
    {500, 300, 100, 600, 200, 200, 400, 600, 600, 1900, 1000, 1300, 0, 600, 700, 600, 500, 100, 300, 600, 600, 1300, 800, 800},
    {300, 100, 100, 500, 100, 100, 200, 400, 600, 2100, 1600, 700, 600, 0, 1300, 700, 700, 100, 300, 500, 400, 1200, 1100, 400},
    {500, 100, 100, 500, 200, 200, 500, 600, 1000, 4000, 1400, 700, 700, 1300, 0, 1200, 1500, 200, 800, 1100, 800, 2600, 1000, 400},
    {500, 400, 200, 800, 500, 900, 1400, 2200, 1400, 4400, 1400, 700, 600, 700, 1200, 0, 2800, 500, 1300, 1600, 600, 1200, 500, 300},
    {400, 200, 100, 500, 200, 500, 1000, 1400, 900, 3900, 1000, 600, 500, 700, 1500, 2800, 0, 600, 1700, 1700, 600, 1700, 600, 300},
    {100, 0, 0, 100, 0, 100, 200, 300, 200, 700, 200, 200, 100, 100, 200, 500, 600, 0, 300, 400, 100, 300, 100, 0},
    {300, 100, 0, 200, 100, 200, 400, 700, 400, 1800, 400, 300, 300, 300, 800, 1300, 1700, 300, 0, 1200, 400, 1200, 300, 100},
    {300, 100, 0, 300, 100, 300, 500, 900, 600, 2500, 600, 500, 600, 500, 1100, 1600, 1700, 400, 1200, 0, 1200, 2400, 700, 400},
    {100, 0, 0, 200, 100, 100, 200, 400, 300, 1200, 400, 300, 600, 400, 800, 600, 600, 100, 400, 1200, 0, 1800, 700, 500},
    {400, 100, 100, 400, 200, 200, 500, 500, 700, 2600, 1100, 700, 1300, 1200, 2600, 1200, 1700, 300, 1200, 2400, 1800, 0, 2100, 1100},
    {300, 0, 100, 500, 100, 100, 200, 300, 500, 1800, 1300, 700, 800, 1100, 1000, 500, 600, 100, 300, 700, 700, 2100, 0, 700},
    {100, 0, 0, 200, 0, 100, 100, 200, 200, 800, 600, 500, 800, 400, 400, 300, 300, 0, 100, 400, 500, 1100, 700, 0},
}};

}  // namespace

NetworkConfig sioux_falls_config(const SiouxFallsParams& params) {
  NetworkConfig cfg;
  cfg.name = "sioux_falls";
  cfg.constants = params.constants;

  Operator mt;
  mt.id = "mt";
  mt.kind = OperatorKind::MassTransit;
  cfg.operators.push_back(mt);

  Operator mod;
  mod.id = "mod";
  mod.kind = OperatorKind::MoDRoadbound;
  mod.fleet_time = params.mod_fleet_time;
  mod.min_vacant = params.mod_min_vacant;
  mod.matching_coeff = params.mod_matching_coeff;
  cfg.operators.push_back(mod);

  for (const SFRow& row : kRows) {
    PhysicalLinkSpec pl;
    pl.a = row.a;
    pl.b = row.b;
    pl.road_time = row.road_time;
    pl.road_capacity = row.road_capacity;
    pl.car_fare = params.car_fare_factor * row.road_time;
    pl.mod_fare = params.mod_fare_factor * row.road_time;
    pl.has_mt = row.has_mt;
    if (row.has_mt) {
      pl.mt_time = params.mt_time_factor * row.road_time;
      pl.mt_capacity = params.mt_line_capacity;
      pl.mt_fare = params.mt_fare_factor * row.road_time;
    }
    cfg.physical_links.push_back(pl);
  }
  cfg.mt_lines = kLines;

  for (int o = 0; o < 24; ++o) {
    for (int d = 0; d < 24; ++d) {
      const double demand = params.demand_scale * kDemand[o][d];
      if (demand <= 0) continue;
      ODSpec od;
      od.origin = o + 1;
      od.destination = d + 1;
      od.demand = demand;
      cfg.od_pairs.push_back(od);
    }
  }
  return cfg;
}

MultiModalNetwork build_sioux_falls(const SiouxFallsParams& params) {
  return MultiModalNetwork::build(sioux_falls_config(params));
}

}  // namespace maas
