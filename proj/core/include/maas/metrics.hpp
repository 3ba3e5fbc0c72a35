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

#include <iosfwd>
#include <optional>

#include "maas/pricing.hpp"

namespace maas {

// Scenario-level aggregates: demand split, multi-modal trip intensity,
// capacity use, and per-trip travel time.
struct ScenarioMetrics {
  double total_trips = 0;
  double maas_share = 0;             // of all trips
  double nonmaas_share = 0;
  double nonmaas_service_share = 0;  // transit/on-demand outside the platform
  double nonmaas_drive_share = 0;
  double transfers_per_trip = 0;
  double transfers_maas = 0;     // per MaaS trip
  double transfers_nonmaas = 0;  // per non-MaaS service trip basis: all non-MaaS trips
  double mt_utilization = 0, mt_util_maas = 0, mt_util_nonmaas = 0;
  double mod_utilization = 0, mod_util_maas = 0, mod_util_nonmaas = 0;
  double travel_time_per_trip = 0;
  double social_cost_per_trip = 0;  // travel time plus an optional constant
};

ScenarioMetrics compute_metrics(const MultiModalNetwork& net,
                                const AssignmentResult& result,
                                double op_cost_per_trip = 0);

// Directed road links that share a corridor with transit, grouped by the base
// scenario's volume-over-capacity classification.
struct VocGroup {
  int links = 0;
  double car_flow = 0, mt_flow = 0;
  double avg_voc_car = 0, avg_voc_mt = 0;
  double max_voc_car = 0, max_voc_mt = 0;
};

struct VocTable {
  VocGroup congested, uncongested;  // classification frozen at the base
};

struct VocComparison {
  VocTable base, scenario;
};

VocComparison voc_groups(const MultiModalNetwork& net,
                         const AssignmentResult& base,
                         const AssignmentResult& scenario);

// CSV emitters; formats are frozen so identical inputs give identical bytes.
void write_metrics_csv(std::ostream& os, const ScenarioMetrics& base,
                       const std::optional<ScenarioMetrics>& scenario);
void write_voc_csv(std::ostream& os, const VocTable& base, const VocTable& now);
void write_od_pricing_csv(std::ostream& os, const MultiModalNetwork& net,
                          const AssignmentResult& assignment,
                          const PricingScheme& scheme, const PayoffReport& pay);
void write_pricing_summary_csv(std::ostream& os, const MultiModalNetwork& net,
                               const AssignmentResult& assignment,
                               const PricingScheme& scheme,
                               const PayoffReport& pay);
void write_sweep_csv(std::ostream& os, const MultiModalNetwork& net,
                     const SweepResult& sweep);
void write_convergence_csv(std::ostream& os, const AssignmentResult& result);

}  // namespace maas
