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

#include "maas/paths.hpp"

namespace maas {

namespace {

void dfs_paths(const MultiModalNetwork& net, int node, int dest, int budget,
               bool maas, std::vector<char>& visited, std::vector<int>& stack,
               std::vector<std::vector<int>>& out, std::size_t max_paths,
               bool& truncated) {
  if (node == dest) {
    if (out.size() >= max_paths) {
      truncated = true;
      return;
    }
    out.push_back(stack);
    return;
  }
  if (static_cast<int>(stack.size()) >= budget || truncated) return;
  visited[node] = 1;
  for (int lid : net.out_links(node)) {
    const Link& link = net.links()[lid];
    if (maas ? !link.maas_ok : !link.nonmaas_ok) continue;
    if (visited[link.head]) continue;
    stack.push_back(lid);
    dfs_paths(net, link.head, dest, budget, maas, visited, stack, out,
              max_paths, truncated);
    stack.pop_back();
  }
  visited[node] = 0;
}

}  // namespace

PathSet enumerate_paths(const MultiModalNetwork& net, int od_index,
                        int hop_budget, std::size_t max_paths) {
  if (hop_budget < 1) throw DomainError("hop budget must be >= 1");
  const ODPair& od = net.od_pairs()[od_index];
  PathSet set;
  std::vector<char> visited(net.num_nodes(), 0);
  std::vector<int> stack;
  dfs_paths(net, od.maas_origin_node, od.maas_dest_node, hop_budget, true,
            visited, stack, set.maas, max_paths, set.truncated);
  std::fill(visited.begin(), visited.end(), 0);
  stack.clear();
  dfs_paths(net, od.nonmaas_origin_node, od.nonmaas_dest_node, hop_budget,
            false, visited, stack, set.nonmaas, max_paths, set.truncated);
  return set;
}

}  // namespace maas
