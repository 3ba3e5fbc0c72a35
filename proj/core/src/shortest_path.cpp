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

#include "maas/shortest_path.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <queue>

namespace maas {

ShortestPathTree shortest_paths_from(
    const MultiModalNetwork& net, int source, const Eigen::VectorXd& link_cost,
    const std::function<bool(const Link&)>& usable) {
  const int n = net.num_nodes();
  ShortestPathTree tree;
  tree.dist = Eigen::VectorXd::Constant(n, kInf);
  tree.parent_link.assign(n, -1);
  tree.dist[source] = 0.0;

  std::deque<int> queue{source};
  std::vector<char> in_queue(n, 0);
  in_queue[source] = 1;
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    in_queue[i] = 0;
    const double di = tree.dist[i];
    for (int lid : net.out_links(i)) {
      const Link& link = net.links()[lid];
      if (!usable(link)) continue;
      const double dj = di + link_cost[lid];
      if (dj < tree.dist[link.head] - 1e-15) {
        tree.dist[link.head] = dj;
        tree.parent_link[link.head] = lid;
        if (!in_queue[link.head]) {
          // SLF heuristic: promising labels go to the front.
          if (!queue.empty() && dj < tree.dist[queue.front()])
            queue.push_front(link.head);
          else
            queue.push_back(link.head);
          in_queue[link.head] = 1;
        }
      }
    }
  }
  return tree;
}

std::vector<int> extract_path(const ShortestPathTree& tree,
                              const MultiModalNetwork& net, int node) {
  std::vector<int> path;
  int cur = node;
  while (tree.parent_link[cur] >= 0) {
    const int lid = tree.parent_link[cur];
    path.push_back(lid);
    cur = net.links()[lid].tail;
    if (path.size() > net.links().size()) return {};  // defend against cycles
  }
  std::reverse(path.begin(), path.end());
  if (path.empty() && std::isinf(tree.dist[node])) return {};
  return path;
}

namespace {

struct DinicEdge {
  int to;
  double cap;
  int rev;
};

class Dinic {
 public:
  explicit Dinic(int n) : graph_(n), level_(n), iter_(n) {}

  void add_edge(int from, int to, double cap) {
    graph_[from].push_back({to, cap, static_cast<int>(graph_[to].size())});
    graph_[to].push_back({from, 0.0, static_cast<int>(graph_[from].size()) - 1});
  }

  double run(int s, int t) {
    double flow = 0;
    while (bfs(s, t)) {
      std::fill(iter_.begin(), iter_.end(), 0);
      double f;
      while ((f = dfs(s, t, kInf)) > 1e-12) flow += f;
    }
    return flow;
  }

 private:
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& e : graph_[v]) {
        if (e.cap > 1e-12 && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double f) {
    if (v == t) return f;
    for (int& i = iter_[v]; i < static_cast<int>(graph_[v].size()); ++i) {
      DinicEdge& e = graph_[v][i];
      if (e.cap > 1e-12 && level_[v] < level_[e.to]) {
        double d = dfs(e.to, t, std::min(f, e.cap));
        if (d > 1e-12) {
          e.cap -= d;
          graph_[e.to][e.rev].cap += d;
          return d;
        }
      }
    }
    return 0;
  }

  std::vector<std::vector<DinicEdge>> graph_;
  std::vector<int> level_, iter_;
};

}  // namespace

double max_flow(int num_nodes, const std::vector<std::array<int, 2>>& arcs,
                const std::vector<double>& capacity, int source, int sink) {
  Dinic dinic(num_nodes);
  for (size_t i = 0; i < arcs.size(); ++i)
    dinic.add_edge(arcs[i][0], arcs[i][1], capacity[i]);
  return dinic.run(source, sink);
}

}  // namespace maas
