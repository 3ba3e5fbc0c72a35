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
#include <vector>

#include "maas/network.hpp"

namespace maas {

// Enumerated simple paths for one OD pair, split by traveler class.
struct PathSet {
  std::vector<std::vector<int>> maas;     // link id sequences
  std::vector<std::vector<int>> nonmaas;  // may include driving
  bool truncated = false;
};

// All simple paths within a hop budget. Verification-scale only.
PathSet enumerate_paths(const MultiModalNetwork& net, int od_index,
                        int hop_budget, std::size_t max_paths = 20000);

inline double path_sum(const std::vector<int>& path,
                       const Eigen::VectorXd& per_link) {
  double s = 0;
  for (int lid : path) s += per_link[lid];
  return s;
}

}  // namespace maas
