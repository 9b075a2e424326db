#pragma once
// Clopen partition trees over a finite metric space (finite stand-ins for
// Cantor sets), near-isometric leaf matchings with certified error bounds,
// and extraction of almost-conjugating point maps from two nearby systems.
//
// The matching guarantee: whenever cantor_match returns, the leaf bijection
// h satisfies  d_H(leaves A, leaves B) <= ||h|| <= d_H + 3*delta,  where
// ||h|| is the largest displacement d(x, h(x)).  The lower bound holds for
// every bijection; the upper bound is re-verified numerically before the
// result is returned.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dsmetric/core.hpp"
#include "dsmetric/detail/matching.hpp"
#include "dsmetric/metric_space.hpp"
#include "dsmetric/relation.hpp"

namespace dsmetric {

struct CantorCell {
  double declared_diam = 0;           // stated diameter bound for the cell
  std::vector<std::size_t> leaves;    // ambient ids below this cell, sorted
  std::size_t rep = 0;                // designated representative: first leaf
  std::vector<std::size_t> children;  // indices into the next level
};

struct CantorTree {
  std::shared_ptr<const FiniteMetricSpace> ambient;
  std::vector<std::vector<CantorCell>> levels;  // levels[0] is the single root

  const FiniteMetricSpace& S() const { return *ambient; }
  std::size_t depth() const { return levels.empty() ? 0 : levels.size() - 1; }
  const std::vector<std::size_t>& leaf_ids() const { return levels.at(0).at(0).leaves; }
};

inline double realized_diam(const CantorTree& T, const CantorCell& c) {
  double d = 0;
  for (std::size_t a = 0; a < c.leaves.size(); ++a)
    for (std::size_t b = a + 1; b < c.leaves.size(); ++b)
      d = std::max(d, T.S().dist(c.leaves[a], c.leaves[b]));
  return d;
}

inline double realized_mesh(const CantorTree& T, std::size_t level) {
  double m = 0;
  for (const auto& c : T.levels.at(level)) m = std::max(m, realized_diam(T, c));
  return m;
}

// ---------------------------------------------------------------------------
// Validation.

struct CantorIssue {
  Err code;
  std::size_t level = 0, cell = 0;
  std::string msg;
};

struct CantorReport {
  std::vector<CantorIssue> issues;
  bool ok() const { return issues.empty(); }
};

inline CantorReport validate_cantor(const CantorTree& T, bool require_branching = false) {
  CantorReport rep;
  auto bad = [&rep](Err c, std::size_t lv, std::size_t ce, std::string m) {
    rep.issues.push_back({c, lv, ce, std::move(m)});
  };
  if (!T.ambient) {
    bad(Err::BadShape, 0, 0, "tree has no ambient space");
    return rep;
  }
  if (T.levels.empty() || T.levels[0].size() != 1) {
    bad(Err::BadShape, 0, 0, "tree must have a single root cell");
    return rep;
  }
  const std::size_t n = T.S().size();
  for (std::size_t lv = 0; lv < T.levels.size(); ++lv) {
    std::vector<std::size_t> child_seen(lv + 1 < T.levels.size() ? T.levels[lv + 1].size() : 0, 0);
    for (std::size_t ce = 0; ce < T.levels[lv].size(); ++ce) {
      const CantorCell& c = T.levels[lv][ce];
      if (c.leaves.empty()) {
        bad(Err::BadShape, lv, ce, "cell has no leaves");
        continue;
      }
      if (!std::is_sorted(c.leaves.begin(), c.leaves.end()) ||
          std::adjacent_find(c.leaves.begin(), c.leaves.end()) != c.leaves.end())
        bad(Err::BadShape, lv, ce, "cell leaves must be sorted and distinct");
      for (std::size_t id : c.leaves)
        if (id >= n) bad(Err::IndexOutOfRange, lv, ce, "leaf id outside the ambient space");
      if (c.rep != c.leaves.front())
        bad(Err::BadShape, lv, ce, "designated representative must be the first leaf");
      if (!(c.declared_diam >= 0) || !std::isfinite(c.declared_diam))
        bad(Err::BadShape, lv, ce, "declared diameter must be finite and nonnegative");
      else if (realized_diam(T, c) > c.declared_diam + 1e-12)
        bad(Err::BadShape, lv, ce, "declared diameter is below the realized diameter");
      if (lv + 1 < T.levels.size()) {
        if (c.children.empty()) {
          bad(Err::BadShape, lv, ce, "interior cell has no children");
          continue;
        }
        if (require_branching && c.children.size() < 2)
          bad(Err::BadShape, lv, ce, "cell does not branch");
        std::vector<std::size_t> merged;
        for (std::size_t ch : c.children) {
          if (ch >= T.levels[lv + 1].size()) {
            bad(Err::IndexOutOfRange, lv, ce, "child index outside the next level");
            continue;
          }
          ++child_seen[ch];
          const auto& cl = T.levels[lv + 1][ch].leaves;
          merged.insert(merged.end(), cl.begin(), cl.end());
        }
        std::sort(merged.begin(), merged.end());
        if (merged != c.leaves)
          bad(Err::BadShape, lv, ce, "children do not partition the cell's leaves");
      } else if (!c.children.empty()) {
        bad(Err::BadShape, lv, ce, "deepest-level cell must not have children");
      }
    }
    for (std::size_t ch = 0; ch < child_seen.size(); ++ch)
      if (child_seen[ch] != 1)
        bad(Err::BadShape, lv + 1, ch, "cell is not the child of exactly one parent");
  }
  return rep;
}

inline void require_valid_cantor(const CantorTree& T, bool require_branching = false) {
  auto rep = validate_cantor(T, require_branching);
  if (!rep.ok()) {
    const auto& f = rep.issues.front();
    fail(f.code, "level " + std::to_string(f.level) + " cell " + std::to_string(f.cell) + ": " +
                     f.msg);
  }
}

// ---------------------------------------------------------------------------
// Builders.

// Middle-gap construction on the line: the root interval splits into two
// children of length len*(1-gap)/2 at either end, recursively; leaves are
// the centers of the deepest intervals.
inline CantorTree dyadic_cantor(std::size_t depth, double origin = 0.0, double scale = 1.0,
                                double gap = 1.0 / 3.0) {
  if (depth > 16) fail(Err::BudgetExceeded, "tree depth too large");
  if (!(scale > 0) || !(gap > 0) || !(gap < 1))
    fail(Err::BadShape, "scale must be positive and the gap fraction inside (0,1)");
  const std::size_t nl = std::size_t{1} << depth;
  std::vector<double> xs(nl);
  for (std::size_t i = 0; i < nl; ++i) {
    double s = origin, len = scale;
    for (std::size_t b = depth; b-- > 0;) {
      double child = len * (1.0 - gap) / 2.0;
      if ((i >> b) & 1u) s += len - child;
      len = child;
    }
    xs[i] = s + len / 2.0;
  }
  CantorTree T;
  T.ambient = std::make_shared<const FiniteMetricSpace>(line_space(xs));
  T.levels.resize(depth + 1);
  double len = scale;
  for (std::size_t lv = 0; lv <= depth; ++lv) {
    const std::size_t cells = std::size_t{1} << lv;
    const std::size_t span = nl >> lv;
    T.levels[lv].resize(cells);
    for (std::size_t ce = 0; ce < cells; ++ce) {
      CantorCell& c = T.levels[lv][ce];
      c.declared_diam = len;
      for (std::size_t i = 0; i < span; ++i) c.leaves.push_back(ce * span + i);
      c.rep = c.leaves.front();
      if (lv < depth) c.children = {2 * ce, 2 * ce + 1};
    }
    len *= (1.0 - gap) / 2.0;
  }
  return T;
}

// Two-level tree over an explicit point set: root above one singleton cell
// per point.  The finest level always has mesh zero.
inline CantorTree discrete_tree(std::shared_ptr<const FiniteMetricSpace> ambient,
                                SubsetIndex ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  require_subset(*ambient, ids, "tree point set");
  CantorTree T;
  T.ambient = std::move(ambient);
  CantorCell root;
  root.leaves = ids;
  root.rep = ids.front();
  T.levels.resize(2);
  T.levels[1].resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    T.levels[1][i].declared_diam = 0;
    T.levels[1][i].leaves = {ids[i]};
    T.levels[1][i].rep = ids[i];
    root.children.push_back(i);
  }
  root.declared_diam = realized_diam(T, root);
  T.levels[0].push_back(std::move(root));
  return T;
}

// Re-homes two trees over coordinate ambients into one shared union space
// (first tree's points first).
struct TreePair {
  std::shared_ptr<const FiniteMetricSpace> ambient;
  CantorTree a, b;
};

inline TreePair join_trees(const CantorTree& A, const CantorTree& B) {
  TreePair out;
  out.ambient =
      std::make_shared<const FiniteMetricSpace>(union_space(A.S(), B.S()));
  out.a = A;
  out.a.ambient = out.ambient;
  out.b = B;
  out.b.ambient = out.ambient;
  const std::size_t shift = A.S().size();
  for (auto& lv : out.b.levels)
    for (auto& c : lv) {
      for (auto& id : c.leaves) id += shift;
      c.rep += shift;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Leaf matching.

struct LeafMatch {
  double value = 0;               // optimal bottleneck displacement
  std::vector<IndexPair> pairs;   // leaf bijection, ambient ids, sorted by source
};

namespace detail_cantor {

inline void check_matchable(const CantorTree& A, const CantorTree& B) {
  if (!same_space(A.S(), B.S()))
    fail(Err::SpaceMismatch, "trees must share one ambient space (join them first)");
  if (A.leaf_ids().size() != B.leaf_ids().size())
    fail(Err::LeafCountMismatch,
         "leaf counts differ: " + std::to_string(A.leaf_ids().size()) + " vs " +
             std::to_string(B.leaf_ids().size()));
}

}  // namespace detail_cantor

// Optimum of max-displacement over all leaf bijections.  Every bijection h
// satisfies ||h|| >= d_H(leaves A, leaves B), so this is a certified lower
// bound for what any matching can achieve.
inline LeafMatch best_matching_lower_bound(const CantorTree& A, const CantorTree& B) {
  detail_cantor::check_matchable(A, B);
  const auto& la = A.leaf_ids();
  const auto& lb = B.leaf_ids();
  std::vector<std::vector<double>> cost(la.size(), std::vector<double>(lb.size(), 0.0));
  for (std::size_t i = 0; i < la.size(); ++i)
    for (std::size_t j = 0; j < lb.size(); ++j) cost[i][j] = A.S().dist(la[i], lb[j]);
  auto bn = detail::bottleneck_assignment(cost);
  LeafMatch out;
  out.value = bn.value;
  for (std::size_t i = 0; i < la.size(); ++i) out.pairs.emplace_back(la[i], lb[bn.assign[i]]);
  return out;
}

struct MatchResult {
  double rho = 0;        // exact Hausdorff distance between the leaf sets
  double delta = 0;      // quality parameter
  double norm = 0;       // largest leaf displacement of the returned bijection
  double bound = 0;      // rho + 3*delta, the certified ceiling for norm
  std::size_t level_a = 0, level_b = 0;  // accepted levels (see leaf_fallback)
  double mesh_a = 0, mesh_b = 0;         // realized meshes at those levels
  double bottleneck = 0;                 // representative-level bottleneck value
  bool leaf_fallback = false;            // matched leaves directly, ignoring levels
  std::vector<IndexPair> pairs;          // leaf bijection, ambient ids, sorted
};

// Near-isometric leaf bijection between two partition trees at quality
// delta.  Descends the trees in lockstep from the shallowest levels whose
// realized mesh is at most delta, matching designated representatives by
// bottleneck assignment and expanding matched cells to their leaves; falls
// back to a direct leaf-level bottleneck matching.  Fails with
// RefinementImpossible when no stage meets the certified bound rho+3*delta.
inline MatchResult cantor_match(const CantorTree& A, const CantorTree& B, double delta) {
  detail_cantor::check_matchable(A, B);
  if (!(delta > 0)) fail(Err::BadShape, "quality parameter must be positive");
  const FiniteMetricSpace& S = A.S();
  const auto& la = A.leaf_ids();
  const auto& lb = B.leaf_ids();

  MatchResult res;
  res.delta = delta;
  res.rho = hausdorff_distance(S, la, lb).value;
  res.bound = res.rho + 3.0 * delta;

  auto finest = [&](const CantorTree& T, const char* which) {
    for (std::size_t lv = 0; lv < T.levels.size(); ++lv)
      if (realized_mesh(T, lv) <= delta) return lv;
    fail(Err::MeshTooCoarse,
         std::string(which) + " tree has no level with realized mesh at most " +
             std::to_string(delta));
    return std::size_t{0};
  };
  const std::size_t qa = finest(A, "first");
  const std::size_t qb = finest(B, "second");

  auto try_levels = [&](std::size_t a, std::size_t b) -> bool {
    const auto& ca = A.levels[a];
    const auto& cb = B.levels[b];
    if (ca.size() != cb.size()) return false;
    for (std::size_t i = 0; i < ca.size(); ++i) {
      bool some = false;
      for (std::size_t j = 0; j < cb.size(); ++j)
        some |= ca[i].leaves.size() == cb[j].leaves.size();
      if (!some) return false;  // no cell of equal weight anywhere: expansion impossible
    }
    double mesh_a = realized_mesh(A, a), mesh_b = realized_mesh(B, b);
    std::vector<std::vector<double>> cost(ca.size(), std::vector<double>(cb.size(), 0.0));
    for (std::size_t i = 0; i < ca.size(); ++i)
      for (std::size_t j = 0; j < cb.size(); ++j) {
        // cells of different weight cannot be paired; bar them from the search
        cost[i][j] = ca[i].leaves.size() == cb[j].leaves.size()
                         ? S.dist(ca[i].rep, cb[j].rep)
                         : std::numeric_limits<double>::infinity();
      }
    auto bn = detail::bottleneck_assignment(cost);
    if (!std::isfinite(bn.value)) return false;
    if (bn.value + mesh_a + mesh_b > res.bound) return false;
    std::vector<IndexPair> pairs;
    double norm = 0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
      const auto& li = ca[i].leaves;
      const auto& lj = cb[bn.assign[i]].leaves;
      for (std::size_t t = 0; t < li.size(); ++t) {
        pairs.emplace_back(li[t], lj[t]);
        norm = std::max(norm, S.dist(li[t], lj[t]));
      }
    }
    if (norm > res.bound) return false;  // certificate must hold numerically
    std::sort(pairs.begin(), pairs.end());
    res.level_a = a;
    res.level_b = b;
    res.mesh_a = mesh_a;
    res.mesh_b = mesh_b;
    res.bottleneck = bn.value;
    res.norm = norm;
    res.pairs = std::move(pairs);
    return true;
  };

  for (std::size_t t = 0; qa + t < A.levels.size() && qb + t < B.levels.size(); ++t)
    if (try_levels(qa + t, qb + t)) return res;

  // direct leaf-level fallback: singleton cells, mesh zero
  auto lm = best_matching_lower_bound(A, B);
  if (lm.value <= res.bound) {
    res.leaf_fallback = true;
    res.level_a = A.depth();
    res.level_b = B.depth();
    res.mesh_a = res.mesh_b = 0;
    res.bottleneck = lm.value;
    res.norm = lm.value;
    res.pairs = std::move(lm.pairs);
    std::sort(res.pairs.begin(), res.pairs.end());
    return res;
  }
  fail(Err::RefinementImpossible,
       "no matching stage achieves the certified bound " + std::to_string(res.bound));
}

// ---------------------------------------------------------------------------
// Almost-conjugating maps between two nearby bijective systems on one space.
//
// With rho = D(g, j) < delta, matches the two graphs inside their combined
// product-metric space at quality (delta - rho)/4 and splits the graph
// bijection into coordinate maps h1, h2.  By construction h2(g(x)) =
// j(h1(x)) holds exactly for every carrier point, and every displacement is
// below delta.

struct ConjugatingPair {
  double rho = 0;        // D(g, j)
  double delta_eff = 0;  // (delta - rho) / 4, quality used for the graph match
  double norm = 0;       // max displacement of h1 and h2 together
  std::vector<IndexPair> h1, h2;  // carrier bijections, ambient ids
  MatchResult match;              // underlying matching of the graphs
};

inline ConjugatingPair conjugating_pair(const DynamicalRelation& g, const DynamicalRelation& j,
                                        double delta) {
  if (!same_space(g.S(), j.S()))
    fail(Err::SpaceMismatch, "systems must live on one ambient space");
  if (classify(g) != RelationClass::BijectionAnalog)
    fail(Err::NotBijection, "first system is not a bijection");
  if (classify(j) != RelationClass::BijectionAnalog)
    fail(Err::NotBijection, "second system is not a bijection");

  ConjugatingPair out;
  out.rho = ds_distance(g, j).value;
  if (!(out.rho < delta))
    fail(Err::DistanceNotBelowDelta, "system distance " + std::to_string(out.rho) +
                                         " is not below delta " + std::to_string(delta));
  out.delta_eff = (delta - out.rho) / 4.0;

  // combined graph space under the product max metric
  std::vector<IndexPair> P = g.pairs;
  P.insert(P.end(), j.pairs.begin(), j.pairs.end());
  std::sort(P.begin(), P.end());
  P.erase(std::unique(P.begin(), P.end()), P.end());
  const std::size_t m = P.size();
  std::vector<std::vector<double>> mat(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) mat[a][b] = d2(g.S(), P[a], P[b]);
  auto gsp = std::make_shared<const FiniteMetricSpace>(matrix_space(std::move(mat)));

  auto locate = [&P](const IndexPair& p) {
    return static_cast<std::size_t>(
        std::lower_bound(P.begin(), P.end(), p) - P.begin());
  };
  SubsetIndex ig, ij;
  for (const auto& p : g.pairs) ig.push_back(locate(p));
  for (const auto& p : j.pairs) ij.push_back(locate(p));

  out.match = cantor_match(discrete_tree(gsp, ig), discrete_tree(gsp, ij), out.delta_eff);

  for (const auto& pr : out.match.pairs) {
    const IndexPair& from = P[pr.first];   // (x, g x)
    const IndexPair& to = P[pr.second];    // (u, j u)
    out.h1.emplace_back(from.first, to.first);
    out.h2.emplace_back(from.second, to.second);
  }
  std::sort(out.h1.begin(), out.h1.end());
  std::sort(out.h2.begin(), out.h2.end());
  out.norm = out.match.norm;

  // both coordinate maps must come out bijective; the graph matching
  // guarantees it because g and j are bijections
  for (std::size_t t = 1; t < out.h1.size(); ++t)
    if (out.h1[t].first == out.h1[t - 1].first || out.h2[t].first == out.h2[t - 1].first)
      fail(Err::BadShape, "coordinate maps failed to separate (internal)");
  return out;
}

}  // namespace dsmetric
