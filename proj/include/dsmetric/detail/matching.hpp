#pragma once
// Bipartite matching utilities: Hopcroft–Karp maximum matching and the
// bottleneck assignment it powers (smallest threshold whose edge set admits
// a perfect matching).

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "dsmetric/core.hpp"

namespace dsmetric::detail {

constexpr std::size_t kNoMatch = std::numeric_limits<std::size_t>::max();

// Hopcroft–Karp maximum matching; `adj[u]` lists right-side neighbours of
// left vertex u.  Fills match_left/match_right (kNoMatch = unmatched) and
// returns the matching size.
inline std::size_t max_bipartite_matching(const std::vector<std::vector<std::size_t>>& adj,
                                          std::size_t nright,
                                          std::vector<std::size_t>& match_left,
                                          std::vector<std::size_t>& match_right) {
  const std::size_t nl = adj.size();
  const std::size_t INF = kNoMatch;
  match_left.assign(nl, kNoMatch);
  match_right.assign(nright, kNoMatch);
  std::vector<std::size_t> dist(nl, INF);

  auto bfs = [&]() -> bool {
    std::queue<std::size_t> q;
    for (std::size_t u = 0; u < nl; ++u) {
      if (match_left[u] == kNoMatch) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = INF;
      }
    }
    bool reached_free = false;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj[u]) {
        std::size_t w = match_right[v];
        if (w == kNoMatch) {
          reached_free = true;
        } else if (dist[w] == INF) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return reached_free;
  };

  auto dfs = [&](auto&& self, std::size_t u) -> bool {
    for (std::size_t v : adj[u]) {
      std::size_t w = match_right[v];
      if (w == kNoMatch || (dist[w] == dist[u] + 1 && self(self, w))) {
        match_left[u] = v;
        match_right[v] = u;
        return true;
      }
    }
    dist[u] = INF;
    return false;
  };

  std::size_t size = 0;
  while (bfs())
    for (std::size_t u = 0; u < nl; ++u)
      if (match_left[u] == kNoMatch && dfs(dfs, u)) ++size;
  return size;
}

struct BottleneckAssignment {
  double value = 0;                 // smallest feasible threshold
  std::vector<std::size_t> assign;  // assign[i] = matched column of row i
};

// Exact bottleneck assignment on a square cost matrix: binary search over
// the sorted distinct costs, feasibility by maximum matching.
inline BottleneckAssignment bottleneck_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  BottleneckAssignment out;
  if (n == 0) return out;
  for (const auto& row : cost)
    if (row.size() != n) fail(Err::BadShape, "bottleneck cost matrix must be square");

  std::vector<double> vals;
  vals.reserve(n * n);
  for (const auto& row : cost) vals.insert(vals.end(), row.begin(), row.end());
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

  std::vector<std::size_t> ml, mr;
  auto feasible = [&](double t) -> bool {
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (cost[i][j] <= t) adj[i].push_back(j);
    return max_bipartite_matching(adj, n, ml, mr) == n;
  };

  std::size_t lo = 0, hi = vals.size() - 1;  // vals.back() is always feasible
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(vals[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  feasible(vals[lo]);  // rebuild the matching at the optimum
  out.value = vals[lo];
  out.assign = ml;
  return out;
}

}  // namespace dsmetric::detail
