// Copyright (c) The Streamcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

#include "streamcap/core.hpp"

#include <algorithm>
#include <set>

namespace streamcap {

namespace {

struct NodeIndex {
  std::vector<OperatorId> nodes;  // source, operators..., sink
  std::map<OperatorId, int> index;
};

NodeIndex index_nodes(const JobGraph& graph) {
  NodeIndex ni;
  ni.nodes.push_back(graph.source);
  for (const auto& op : graph.operators) ni.nodes.push_back(op);
  ni.nodes.push_back(graph.sink);
  for (int i = 0; i < static_cast<int>(ni.nodes.size()); ++i) {
    if (!ni.index.emplace(ni.nodes[i], i).second) {
      throw std::invalid_argument("duplicate node id '" + ni.nodes[i] + "'");
    }
  }
  return ni;
}

}  // namespace

void validate_graph(const JobGraph& graph) {
  if (graph.source.empty() || graph.sink.empty()) {
    throw std::invalid_argument("graph needs a source and a sink");
  }
  NodeIndex ni = index_nodes(graph);
  const int n = static_cast<int>(ni.nodes.size());
  const int src = 0;
  const int sink = n - 1;

  std::vector<std::vector<int>> out(n), in(n);
  for (const auto& [from, to] : graph.edges) {
    auto fi = ni.index.find(from);
    auto ti = ni.index.find(to);
    if (fi == ni.index.end()) {
      // An undeclared origin is a second injection point.
      throw MultipleSources("edge origin '" + from +
                            "' is not the declared source or an operator");
    }
    if (ti == ni.index.end()) {
      throw std::invalid_argument("edge references unknown node '" + to + "'");
    }
    int f = fi->second, t = ti->second;
    if (f == t) throw std::invalid_argument("self-loop on '" + from + "'");
    if (t == src) {
      throw MultipleSources("edge into the source makes '" + from +
                            "' a second injection point");
    }
    if (f == sink) throw std::invalid_argument("edge out of the sink");
    out[f].push_back(t);
    in[t].push_back(f);
  }

  // Kahn's algorithm; leftovers mean a cycle.
  std::vector<int> indeg(n);
  for (int i = 0; i < n; ++i) indeg[i] = static_cast<int>(in[i].size());
  std::vector<int> queue{src};
  int visited = 0;
  while (!queue.empty()) {
    int v = queue.back();
    queue.pop_back();
    ++visited;
    for (int w : out[v]) {
      if (--indeg[w] == 0) queue.push_back(w);
    }
  }
  if (visited != n) {
    throw CyclicGraph("graph contains a cycle");
  }

  // Reachability from source and co-reachability to sink.
  auto reach = [&](int start, const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  std::vector<char> from_src = reach(src, out);
  std::vector<char> to_sink = reach(sink, in);
  for (int i = 1; i < sink; ++i) {
    if (!from_src[i] || !to_sink[i]) {
      throw DisconnectedOperator("operator '" + ni.nodes[i] +
                                 "' is not on any source-to-sink path");
    }
  }
  if (!from_src[sink]) {
    throw DisconnectedOperator("sink is unreachable from the source");
  }
}

bool valid_profile(const ResourceProfile& profile, int granularity_mb) {
  return granularity_mb > 0 && profile.memory_mb > 0 &&
         profile.memory_mb % granularity_mb == 0;
}

int total_slots(const Configuration& config) {
  int sum = 0;
  for (const auto& [op, pi] : config) sum += pi;
  return sum;
}

double max_task_busyness(const OperatorMetrics& metrics) {
  double m = 0.0;
  for (double b : metrics.per_task_busyness) m = std::max(m, b);
  return m;
}

}  // namespace streamcap
