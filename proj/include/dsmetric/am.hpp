#pragma once
// Almost-conjugacy distance between function-like systems: the best pair of
// carrier maps (one each way) judged by the worst of three defects --
// metric distortion, covering of the target carrier, and the failure of the
// maps to intertwine the two dynamics.  Small cases are solved exactly by
// exhaustive enumeration; larger ones fall back to a seeded coordinate
// descent whose result is still a valid upper bound, and the seed map is
// extracted from a correspondence respecting both dynamics so the classical
// factor-two comparison with the gluing distance survives the fallback.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "iso_quotient.hpp"
#include "metric_space.hpp"
#include "relation.hpp"

namespace dsmetric {

// ---------------------------------------------------------------------------
// Defect report for one map between subsets of two spaces.

struct IsometryReport {
  double distortion = 0.0;  // worst change of a pairwise distance
  double covering = 0.0;    // Hausdorff gap between the image and the target
  double eps = 0.0;         // max of the two
};

inline IsometryReport eps_isometry_report(const FiniteMetricSpace& SX, const SubsetIndex& X,
                                          const FiniteMetricSpace& SY, const SubsetIndex& Y,
                                          const std::vector<IndexPair>& phi) {
  require_subset(SX, X, "map domain");
  require_subset(SY, Y, "map target");
  if (phi.size() != X.size())
    fail(Err::PartialMap, "map must assign every domain point exactly once");
  std::vector<char> seen(X.size(), 0);
  for (const auto& p : phi) {
    auto it = std::lower_bound(X.begin(), X.end(), p.first);
    if (it == X.end() || *it != p.first)
      fail(Err::PartialMap, "map defined at " + std::to_string(p.first) + ", not a domain point");
    const std::size_t pos = static_cast<std::size_t>(it - X.begin());
    if (seen[pos]) fail(Err::PartialMap, "map assigns " + std::to_string(p.first) + " twice");
    seen[pos] = 1;
    if (!std::binary_search(Y.begin(), Y.end(), p.second))
      fail(Err::PartialMap, "map sends " + std::to_string(p.first) + " outside the target");
  }
  IsometryReport rep;
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t j = i + 1; j < phi.size(); ++j)
      rep.distortion = std::max(
          rep.distortion, std::abs(SY.dist(phi[i].second, phi[j].second) -
                                   SX.dist(phi[i].first, phi[j].first)));
  SubsetIndex img;
  img.reserve(phi.size());
  for (const auto& p : phi) img.push_back(p.second);
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  rep.covering = hausdorff_distance(SY, img, Y).value;
  rep.eps = std::max(rep.distortion, rep.covering);
  return rep;
}

// ---------------------------------------------------------------------------
// The two-sided distance.

namespace detail_am {

struct Side {
  const FiniteMetricSpace* S = nullptr;
  SubsetIndex ids;                 // carrier, sorted
  std::vector<std::size_t> next;  // local successor under the (function) dynamics
};

inline std::size_t pos_of(const SubsetIndex& A, std::size_t id) {
  return static_cast<std::size_t>(std::lower_bound(A.begin(), A.end(), id) - A.begin());
}

inline Side side_of(const DynamicalRelation& f, const char* which) {
  if (classify(f) == RelationClass::SetValued)
    fail(Err::NotAFunction, std::string("the ") + which + " system is not function-like");
  Side s;
  s.S = &f.S();
  s.ids = carrier(f);
  s.next.assign(s.ids.size(), 0);
  for (const auto& p : f.pairs) s.next[pos_of(s.ids, p.first)] = pos_of(s.ids, p.second);
  return s;
}

// Worst of the three defects of one map `assign` (domain position -> target
// position) from side a to side b.
inline double map_term(const Side& a, const Side& b, const std::vector<std::size_t>& assign) {
  const std::size_t n = a.ids.size(), m = b.ids.size();
  double term = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      term = std::max(term, std::abs(b.S->dist(b.ids[assign[i]], b.ids[assign[j]]) -
                                     a.S->dist(a.ids[i], a.ids[j])));
  for (std::size_t y = 0; y < m; ++y) {
    double near = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      near = std::min(near, b.S->dist(b.ids[assign[i]], b.ids[y]));
    term = std::max(term, near);
  }
  for (std::size_t i = 0; i < n; ++i)
    term = std::max(term, b.S->dist(b.ids[b.next[assign[i]]], b.ids[assign[a.next[i]]]));
  return term;
}

// Exhaustive minimum over all |b|^|a| maps; ties keep the lexicographically
// smallest assignment.
inline double best_map_exact(const Side& a, const Side& b, std::vector<std::size_t>& out) {
  const std::size_t n = a.ids.size(), m = b.ids.size();
  std::vector<std::size_t> assign(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    const double t = map_term(a, b, assign);
    if (t < best) {
      best = t;
      out = assign;
    }
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++assign[k] < m) break;
      assign[k] = 0;
      if (k == 0) return best;
    }
  }
}

// Seed a map from a correspondence that respects both dynamics: send each
// point through the pair of the target dynamics that shadows its own step,
// which keeps the intertwining defect inside the correspondence distortion.
inline std::vector<std::size_t> cover_seed(const Side& a, const Side& b,
                                           const std::vector<IndexPair>& corr,
                                           const std::vector<IndexPair>& b_pairs,
                                           bool swap_corr) {
  auto related = [&corr, swap_corr](std::size_t xa, std::size_t yb) {
    for (const auto& p : corr) {
      const std::size_t u = swap_corr ? p.second : p.first;
      const std::size_t v = swap_corr ? p.first : p.second;
      if (u == xa && v == yb) return true;
    }
    return false;
  };
  const std::size_t n = a.ids.size();
  std::vector<std::size_t> assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = a.ids[i];
    const std::size_t fx = a.ids[a.next[i]];
    bool done = false;
    for (const auto& gp : b_pairs) {
      if (related(x, gp.first) && related(fx, gp.second)) {
        assign[i] = pos_of(b.ids, gp.first);
        done = true;
        break;
      }
    }
    if (!done) {
      for (std::size_t y = 0; y < b.ids.size() && !done; ++y)
        if (related(x, b.ids[y])) {
          assign[i] = y;
          done = true;
        }
    }
  }
  return assign;
}

// Coordinate descent from a seed; strictly improving, deterministic.
inline double best_map_descent(const Side& a, const Side& b, std::vector<std::size_t>& assign) {
  const std::size_t n = a.ids.size(), m = b.ids.size();
  double best = map_term(a, b, assign);
  for (int pass = 0; pass < 50; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t keep = assign[i];
      std::size_t choose = keep;
      for (std::size_t y = 0; y < m; ++y) {
        if (y == keep) continue;
        assign[i] = y;
        const double t = map_term(a, b, assign);
        if (t < best) {
          best = t;
          choose = y;
          improved = true;
        }
      }
      assign[i] = choose;
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace detail_am

struct AmResult {
  double value = std::numeric_limits<double>::infinity();
  bool exact = false;           // both directions were minimized exhaustively
  double term_fwd = std::numeric_limits<double>::infinity();
  double term_bwd = std::numeric_limits<double>::infinity();
  std::vector<IndexPair> phi;   // carrier of f -> carrier of g, ambient ids
  std::vector<IndexPair> psi;   // carrier of g -> carrier of f, ambient ids
};

inline AmResult am_distance(const DynamicalRelation& f, const DynamicalRelation& g,
                            double budget = 1e8) {
  using detail_am::Side;
  const Side a = detail_am::side_of(f, "first");
  const Side b = detail_am::side_of(g, "second");
  const double work = std::pow(static_cast<double>(b.ids.size()),
                               static_cast<double>(a.ids.size())) *
                      std::pow(static_cast<double>(a.ids.size()),
                               static_cast<double>(b.ids.size()));
  AmResult res;
  std::vector<std::size_t> fwd, bwd;
  if (work <= budget) {
    res.term_fwd = detail_am::best_map_exact(a, b, fwd);
    res.term_bwd = detail_am::best_map_exact(b, a, bwd);
    res.exact = true;
  } else {
    DghResult bracket = dgh(f, g, 200'000);
    fwd = detail_am::cover_seed(a, b, bracket.corr, g.pairs, false);
    bwd = detail_am::cover_seed(b, a, bracket.corr, f.pairs, true);
    res.term_fwd = detail_am::best_map_descent(a, b, fwd);
    res.term_bwd = detail_am::best_map_descent(b, a, bwd);
    res.exact = false;
  }
  res.value = std::max(res.term_fwd, res.term_bwd);
  res.phi.reserve(a.ids.size());
  for (std::size_t i = 0; i < a.ids.size(); ++i) res.phi.emplace_back(a.ids[i], b.ids[fwd[i]]);
  res.psi.reserve(b.ids.size());
  for (std::size_t j = 0; j < b.ids.size(); ++j) res.psi.emplace_back(b.ids[j], a.ids[bwd[j]]);
  return res;
}

// ---------------------------------------------------------------------------
// Maps extracted from two nearby systems on one space.  When the system
// distance is at most delta, projecting each graph point to its best graph
// neighbour yields carrier maps that move no point farther than delta and
// whose distortion, covering and intertwining defects stay within 2*delta.
// Every bound is recomputed before returning.

struct ClosePairMaps {
  double delta = 0.0;     // requested closeness budget
  double distance = 0.0;  // certified distance between the systems
  std::vector<IndexPair> phi, psi;  // carrier maps, ambient ids, both directions
  double phi_displacement = 0.0, phi_distortion = 0.0, phi_covering = 0.0, phi_defect = 0.0;
  double psi_displacement = 0.0, psi_distortion = 0.0, psi_covering = 0.0, psi_defect = 0.0;
};

namespace detail_am {

// phi(x) = first coordinate of the graph pair of `to` minimizing the max of
// the two coordinate distances from (x, fx); ties keep the earliest pair.
inline std::vector<IndexPair> project_graph(const DynamicalRelation& from,
                                            const DynamicalRelation& to) {
  const FiniteMetricSpace& S = from.S();
  std::vector<IndexPair> out;
  const SubsetIndex X = relation_carrier(from.pairs);
  out.reserve(X.size());
  for (const auto& p : from.pairs) {
    // one entry per domain point: function relations list each x once
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (const auto& q : to.pairs) {
      const double v = std::max(S.dist(p.first, q.first), S.dist(p.second, q.second));
      if (v < best) {
        best = v;
        pick = q.first;
      }
    }
    out.emplace_back(p.first, pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail_am

inline ClosePairMaps am_from_close_pair(const DynamicalRelation& f, const DynamicalRelation& g,
                                        double delta) {
  if (!same_space(f.S(), g.S()))
    fail(Err::PlacementMissing,
         "systems live on different spaces; provide a common placement first");
  if (classify(f) == RelationClass::SetValued || classify(g) == RelationClass::SetValued)
    fail(Err::NotAFunction, "close-pair maps need function-like systems");
  if (!(delta > 0.0)) fail(Err::BadShape, "closeness budget must be positive");
  ClosePairMaps out;
  out.delta = delta;
  out.distance = ds_distance(f, g).value;
  if (out.distance > delta)
    fail(Err::DistanceNotBelowDelta, "system distance " + std::to_string(out.distance) +
                                         " exceeds the budget " + std::to_string(delta));
  out.phi = detail_am::project_graph(f, g);
  out.psi = detail_am::project_graph(g, f);

  const FiniteMetricSpace& S = f.S();
  auto fn_of = [](const DynamicalRelation& r) {
    return [&r](std::size_t x) { return apply_function(r, x); };
  };
  auto pm = [](const std::vector<IndexPair>& map, std::size_t x) {
    auto it = std::lower_bound(map.begin(), map.end(), IndexPair{x, 0});
    return it->second;
  };
  auto audit = [&S, &pm](const std::vector<IndexPair>& map, const SubsetIndex& domain,
                         const SubsetIndex& target, auto&& from_fn, auto&& to_fn,
                         double& displacement, double& distortion, double& covering,
                         double& defect) {
    for (std::size_t x : domain) displacement = std::max(displacement, S.dist(x, pm(map, x)));
    for (std::size_t x : domain)
      for (std::size_t z : domain)
        distortion = std::max(distortion, std::abs(S.dist(pm(map, x), pm(map, z)) - S.dist(x, z)));
    for (std::size_t y : target) {
      double near = std::numeric_limits<double>::infinity();
      for (std::size_t x : domain) near = std::min(near, S.dist(pm(map, x), y));
      covering = std::max(covering, near);
    }
    for (std::size_t x : domain)
      defect = std::max(defect, S.dist(to_fn(pm(map, x)), pm(map, from_fn(x))));
  };
  const SubsetIndex X = carrier(f), Y = carrier(g);
  audit(out.phi, X, Y, fn_of(f), fn_of(g), out.phi_displacement, out.phi_distortion,
        out.phi_covering, out.phi_defect);
  audit(out.psi, Y, X, fn_of(g), fn_of(f), out.psi_displacement, out.psi_distortion,
        out.psi_covering, out.psi_defect);
  const double cap = 2.0 * delta + kCmpTol;
  if (out.phi_displacement > delta || out.psi_displacement > delta ||
      out.phi_distortion > cap || out.phi_covering > cap || out.phi_defect > cap ||
      out.psi_distortion > cap || out.psi_covering > cap || out.psi_defect > cap)
    fail(Err::BadShape, "internal: close-pair certificates exceeded their bounds");
  return out;
}

// ---------------------------------------------------------------------------
// Axiom audit over a sample family: symmetry of the distance and the
// factor-two triangle comparison on every ordered triple.

struct AmAxiomsReport {
  double max_symmetry_gap = 0.0;
  double worst_triangle_slack = -std::numeric_limits<double>::infinity();
  bool all_exact = true;
  bool ok(double tol = kCmpTol) const {
    return max_symmetry_gap <= tol && worst_triangle_slack <= tol;
  }
};

inline AmAxiomsReport am_axioms_suite(const std::vector<DynamicalRelation>& systems,
                                      double budget = 1e8) {
  const std::size_t n = systems.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  AmAxiomsReport rep;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      AmResult r = am_distance(systems[i], systems[j], budget);
      d[i][j] = r.value;
      rep.all_exact = rep.all_exact && r.exact;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      rep.max_symmetry_gap = std::max(rep.max_symmetry_gap, std::abs(d[i][j] - d[j][i]));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        rep.worst_triangle_slack =
            std::max(rep.worst_triangle_slack, d[i][j] - 2.0 * (d[i][k] + d[k][j]));
      }
  return rep;
}

}  // namespace dsmetric
