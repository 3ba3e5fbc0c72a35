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
#include <functional>
#include <vector>

#include "maas/network.hpp"

namespace maas {

struct ShortestPathTree {
  Eigen::VectorXd dist;          // per node, +inf if unreachable
  std::vector<int> parent_link;  // incoming link on the shortest path, -1 at source
};

// One-to-all shortest paths under an arbitrary per-link cost vector. Uses a
// label-correcting scan so mildly negative link costs (merged origin dummies)
// are handled; the network carries no negative cycles.
ShortestPathTree shortest_paths_from(
    const MultiModalNetwork& net, int source, const Eigen::VectorXd& link_cost,
    const std::function<bool(const Link&)>& usable);

// Link sequence from `source` to `node` out of a tree, empty if unreachable.
std::vector<int> extract_path(const ShortestPathTree& tree,
                              const MultiModalNetwork& net, int node);

// Max-flow between two nodes with per-link capacities (Dinic). Used by the
// network validator; not performance critical.
double max_flow(int num_nodes, const std::vector<std::array<int, 2>>& arcs,
                const std::vector<double>& capacity, int source, int sink);

}  // namespace maas
