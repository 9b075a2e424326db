#pragma once
// Distance between systems up to isometric relabeling.  Correspondence
// distortion gives lower bounds; gluing the two carriers along a
// correspondence and measuring the system distance inside the glued space
// gives certified upper bounds.  A Euclidean variant minimizes over rigid
// motions instead of abstract correspondences, and exact backtracking
// searches decide isometric conjugacy / graph isometry outright.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "metric_space.hpp"
#include "relation.hpp"

namespace dsmetric {

inline constexpr std::size_t kDghDefaultBudget = 2'000'000;  // search tree nodes

// ---------------------------------------------------------------------------
// Correspondences.  A correspondence between point sets is a pair list that
// projects onto all of both sides; its distortion is the largest defect
// |d(a,a') - d(b,b')| over pairs of members.

inline double correspondence_distortion(const FiniteMetricSpace& X, const FiniteMetricSpace& Y,
                                        const std::vector<IndexPair>& R) {
  if (R.empty()) fail(Err::BadShape, "correspondence has no pairs");
  for (const auto& p : R)
    if (p.first >= X.size() || p.second >= Y.size())
      fail(Err::IndexOutOfRange, "correspondence pair outside the spaces");
  double dis = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i)
    for (std::size_t j = i + 1; j < R.size(); ++j) {
      const double d =
          std::abs(X.dist(R[i].first, R[j].first) - Y.dist(R[i].second, R[j].second));
      if (d > dis) dis = d;
    }
  return dis;
}

inline bool correspondence_covers(std::size_t nx, std::size_t ny,
                                  const std::vector<IndexPair>& R) {
  std::vector<char> rows(nx, 0), cols(ny, 0);
  for (const auto& p : R) {
    if (p.first >= nx || p.second >= ny) return false;
    rows[p.first] = 1;
    cols[p.second] = 1;
  }
  return std::find(rows.begin(), rows.end(), 0) == rows.end() &&
         std::find(cols.begin(), cols.end(), 0) == cols.end();
}

// A correspondence R between the carriers respects the two dynamics when
// every pair of f has a pair of g whose endpoints are R-related to its own,
// and symmetrically every pair of g is shadowed by a pair of f.
inline bool dynamical_cover(const DynamicalRelation& f, const DynamicalRelation& g,
                            const std::vector<IndexPair>& R) {
  std::vector<IndexPair> Rs = R;
  std::sort(Rs.begin(), Rs.end());
  auto rel = [&Rs](std::size_t a, std::size_t b) {
    return std::binary_search(Rs.begin(), Rs.end(), IndexPair{a, b});
  };
  for (const auto& fp : f.pairs) {
    bool ok = false;
    for (const auto& gp : g.pairs)
      if (rel(fp.first, gp.first) && rel(fp.second, gp.second)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  for (const auto& gp : g.pairs) {
    bool ok = false;
    for (const auto& fp : f.pairs)
      if (rel(fp.first, gp.first) && rel(fp.second, gp.second)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Gluing.  d(x,y) across the seam is min over (a,b) in R of
// d_X(x,a) + eps + d_Y(b,y); within each side the original metric survives.
// The result is a valid metric exactly when eps >= distortion(R)/2, and
// R-related points end up at distance exactly eps.

inline FiniteMetricSpace glue_by_correspondence(const FiniteMetricSpace& X,
                                                const FiniteMetricSpace& Y,
                                                const std::vector<IndexPair>& R, double eps) {
  const std::size_t n = X.size(), m = Y.size();
  if (!correspondence_covers(n, m, R))
    fail(Err::BadShape, "correspondence must project onto both glued spaces");
  if (!(eps > 0.0))
    fail(Err::DegenerateIdentification,
         "gluing width must be positive; width 0 would merge identified points");
  const double dis = correspondence_distortion(X, Y, R);
  if (eps < dis / 2.0)
    fail(Err::EpsilonBelowHalfDistortion,
         "gluing width " + std::to_string(eps) + " below half distortion " +
             std::to_string(dis / 2.0));
  std::vector<std::vector<double>> d(n + m, std::vector<double>(n + m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = X.dist(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) d[n + i][n + j] = Y.dist(i, j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : R) {
        const double v = X.dist(i, p.first) + eps + Y.dist(p.second, j);
        if (v < best) best = v;
      }
      d[i][n + j] = best;
      d[n + j][i] = best;
    }
  FiniteMetricSpace out = matrix_space(std::move(d));
  MetricReport rep = validate_metric(out);
  if (!rep.ok())
    fail(rep.issues.front().code, "glued space failed validation:\n" + rep.to_string());
  return out;
}

// Systems-level gluing: both relations are restricted to their carriers,
// re-indexed into the glued space (f first, then g), and returned together
// with the carrier copies so distances between them can be measured directly.
struct GluedSystems {
  std::shared_ptr<const FiniteMetricSpace> space;
  DynamicalRelation f, g;
  SubsetIndex xs, ys;      // positions of the two carrier copies in `space`
  double eps = 0.0;        // seam width used
  double distortion = 0.0; // distortion of the correspondence that was glued
};

inline GluedSystems glue_systems(const DynamicalRelation& f, const DynamicalRelation& g,
                                 const std::vector<IndexPair>& R_ambient, double eps) {
  const SubsetIndex X = carrier(f), Y = carrier(g);
  auto pos_in = [](const SubsetIndex& A, std::size_t id, const char* side) {
    auto it = std::lower_bound(A.begin(), A.end(), id);
    if (it == A.end() || *it != id)
      fail(Err::PointNotInCarrier,
           std::string("correspondence endpoint ") + std::to_string(id) + " not in the " +
               side + " carrier");
    return static_cast<std::size_t>(it - A.begin());
  };
  std::vector<IndexPair> R;
  R.reserve(R_ambient.size());
  for (const auto& p : R_ambient)
    R.emplace_back(pos_in(X, p.first, "first"), pos_in(Y, p.second, "second"));
  const FiniteMetricSpace SX = subspace(f.S(), X), SY = subspace(g.S(), Y);
  GluedSystems out;
  out.eps = eps;
  out.distortion = correspondence_distortion(SX, SY, R);
  out.space = std::make_shared<const FiniteMetricSpace>(glue_by_correspondence(SX, SY, R, eps));
  const std::size_t n = X.size();
  std::vector<IndexPair> fp, gp;
  fp.reserve(f.pairs.size());
  gp.reserve(g.pairs.size());
  for (const auto& p : f.pairs)
    fp.emplace_back(pos_in(X, p.first, "first"), pos_in(X, p.second, "first"));
  for (const auto& p : g.pairs)
    gp.emplace_back(n + pos_in(Y, p.first, "second"), n + pos_in(Y, p.second, "second"));
  out.f = make_relation(out.space, std::move(fp));
  out.g = make_relation(out.space, std::move(gp));
  out.xs.resize(n);
  out.ys.resize(Y.size());
  for (std::size_t i = 0; i < n; ++i) out.xs[i] = i;
  for (std::size_t j = 0; j < Y.size(); ++j) out.ys[j] = n + j;
  return out;
}

// ---------------------------------------------------------------------------
// Branch-and-bound over correspondences.  Cells of the product are decided
// include/exclude in row-major order; partial distortion only grows when a
// cell is added, so the value bound prunes soundly.  Projection feasibility
// (no side may end up uncovered) prunes dead exclude branches early.

namespace detail_gh {

struct CorrCandidate {
  double value = std::numeric_limits<double>::infinity();
  std::vector<IndexPair> cells;  // local (row, col) pairs
  bool found = false;
};

template <class Accept>
struct CorrSearch {
  const std::vector<std::vector<double>>& DA;
  const std::vector<std::vector<double>>& DB;
  double floor_val;
  std::size_t budget;
  Accept& accept;

  std::size_t n = 0, m = 0, total = 0, nodes = 0;
  bool complete = true;
  std::vector<IndexPair> chosen;
  std::vector<std::size_t> in_row, in_col, left_row, left_col;
  CorrCandidate best;

  CorrSearch(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
             double floor_v, std::size_t budget_, Accept& acc)
      : DA(a), DB(b), floor_val(floor_v), budget(budget_), accept(acc) {
    n = DA.size();
    m = DB.size();
    total = n * m;
    in_row.assign(n, 0);
    in_col.assign(m, 0);
    left_row.assign(n, m);
    left_col.assign(m, n);
  }

  double value_of(double dis) const { return std::max(dis / 2.0, floor_val); }

  void run(std::size_t idx, double dis) {
    if (!complete) return;
    if (++nodes > budget) {
      complete = false;
      return;
    }
    if (value_of(dis) >= best.value) return;  // cannot strictly improve below
    if (idx == total) {
      if (accept(chosen)) {
        best.value = value_of(dis);
        best.cells = chosen;
        best.found = true;
      }
      return;
    }
    const std::size_t r = idx / m, c = idx % m;
    // include the cell
    double nd = dis;
    for (const auto& q : chosen) {
      const double dd = std::abs(DA[r][q.first] - DB[c][q.second]);
      if (dd > nd) nd = dd;
    }
    chosen.emplace_back(r, c);
    ++in_row[r];
    ++in_col[c];
    --left_row[r];
    --left_col[c];
    run(idx + 1, nd);
    ++left_row[r];
    ++left_col[c];
    --in_row[r];
    --in_col[c];
    chosen.pop_back();
    if (!complete) return;
    // exclude the cell, unless that strands a row or column
    --left_row[r];
    --left_col[c];
    if ((in_row[r] > 0 || left_row[r] > 0) && (in_col[c] > 0 || left_col[c] > 0))
      run(idx + 1, dis);
    ++left_row[r];
    ++left_col[c];
  }
};

// Minimize distortion over covering subsets of A x B whose complete form
// passes `accept`.  `seed` supplies a known candidate (already accepted);
// the returned candidate never exceeds it.  `complete_out` reports whether
// the tree was fully explored within the node budget.
template <class Accept>
inline CorrCandidate min_distortion_corr(const std::vector<std::vector<double>>& DA,
                                         const std::vector<std::vector<double>>& DB,
                                         double floor_val, std::size_t budget,
                                         const CorrCandidate& seed, Accept&& accept,
                                         bool* complete_out) {
  CorrSearch<Accept> s(DA, DB, floor_val, budget, accept);
  s.best = seed;
  s.run(0, 0.0);
  if (complete_out) *complete_out = s.complete;
  return s.best;
}

inline std::vector<std::vector<double>> pairwise_matrix(const FiniteMetricSpace& S,
                                                        const SubsetIndex& A) {
  std::vector<std::vector<double>> d(A.size(), std::vector<double>(A.size(), 0.0));
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < A.size(); ++j) d[i][j] = S.dist(A[i], A[j]);
  return d;
}

inline std::vector<std::vector<double>> graph_matrix(const FiniteMetricSpace& S,
                                                     const std::vector<IndexPair>& P) {
  std::vector<std::vector<double>> d(P.size(), std::vector<double>(P.size(), 0.0));
  for (std::size_t i = 0; i < P.size(); ++i)
    for (std::size_t j = 0; j < P.size(); ++j) d[i][j] = d2(S, P[i], P[j]);
  return d;
}

inline double matrix_diam(const std::vector<std::vector<double>>& d) {
  double out = 0.0;
  for (const auto& row : d)
    for (double v : row)
      if (v > out) out = v;
  return out;
}

inline double cells_distortion(const std::vector<std::vector<double>>& DA,
                               const std::vector<std::vector<double>>& DB,
                               const std::vector<IndexPair>& cells) {
  double dis = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const double d =
          std::abs(DA[cells[i].first][cells[j].first] - DB[cells[i].second][cells[j].second]);
      if (d > dis) dis = d;
    }
  return dis;
}

// Remap relation pairs to positions within the (sorted) carrier.
inline std::vector<IndexPair> local_pairs(const std::vector<IndexPair>& pairs,
                                          const SubsetIndex& X) {
  auto pos = [&X](std::size_t id) {
    return static_cast<std::size_t>(std::lower_bound(X.begin(), X.end(), id) - X.begin());
  };
  std::vector<IndexPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.emplace_back(pos(p.first), pos(p.second));
  return out;
}

// Cover test on local indices against a cell mask.
inline bool local_dynamical_cover(const std::vector<IndexPair>& f_loc,
                                  const std::vector<IndexPair>& g_loc,
                                  const std::vector<char>& mask, std::size_t m) {
  auto rel = [&mask, m](std::size_t a, std::size_t b) { return mask[a * m + b] != 0; };
  for (const auto& fp : f_loc) {
    bool ok = false;
    for (const auto& gp : g_loc)
      if (rel(fp.first, gp.first) && rel(fp.second, gp.second)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  for (const auto& gp : g_loc) {
    bool ok = false;
    for (const auto& fp : f_loc)
      if (rel(fp.first, gp.first) && rel(fp.second, gp.second)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

// Cheap dynamical seed: nearest-profile pairs, then repaired until it covers
// both dynamics.  Every repair step inserts a fresh cell, so the loop is
// bounded by the product size; the full product is the safety net.
inline std::vector<IndexPair> greedy_dynamical_cells(
    const std::vector<std::vector<double>>& DA, const std::vector<std::vector<double>>& DB,
    const std::vector<IndexPair>& f_loc, const std::vector<IndexPair>& g_loc) {
  const std::size_t n = DA.size(), m = DB.size();
  auto profile = [](const std::vector<std::vector<double>>& D, std::size_t i) {
    std::vector<double> p = D[i];
    std::sort(p.begin(), p.end());
    return p;
  };
  std::vector<std::vector<double>> pa(n), pb(m);
  for (std::size_t i = 0; i < n; ++i) pa[i] = profile(DA, i);
  for (std::size_t j = 0; j < m; ++j) pb[j] = profile(DB, j);
  auto pcost = [&pa, &pb](std::size_t i, std::size_t j) {
    const std::size_t k = std::min(pa[i].size(), pb[j].size());
    double c = 0.0;
    for (std::size_t t = 0; t < k; ++t) c = std::max(c, std::abs(pa[i][t] - pb[j][t]));
    return c;
  };
  std::vector<char> mask(n * m, 0);
  std::vector<IndexPair> cells;
  auto add = [&](std::size_t r, std::size_t c) {
    if (!mask[r * m + c]) {
      mask[r * m + c] = 1;
      cells.emplace_back(r, c);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t bestj = 0;
    double bestc = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const double c = pcost(i, j);
      if (c < bestc) {
        bestc = c;
        bestj = j;
      }
    }
    add(i, bestj);
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t besti = 0;
    double bestc = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double c = pcost(i, j);
      if (c < bestc) {
        bestc = c;
        besti = i;
      }
    }
    add(besti, j);
  }
  auto partner_col = [&](std::size_t r) {
    for (std::size_t j = 0; j < m; ++j)
      if (mask[r * m + j]) return j;
    return std::size_t{0};
  };
  auto partner_row = [&](std::size_t c) {
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i * m + c]) return i;
    return std::size_t{0};
  };
  for (std::size_t guard = 0; guard <= n * m; ++guard) {
    if (local_dynamical_cover(f_loc, g_loc, mask, m)) return cells;
    bool repaired = false;
    for (const auto& fp : f_loc) {
      bool ok = false;
      for (const auto& gp : g_loc)
        if (mask[fp.first * m + gp.first] && mask[fp.second * m + gp.second]) {
          ok = true;
          break;
        }
      if (ok) continue;
      const std::size_t y = partner_col(fp.first);
      std::size_t besty2 = 0;
      double bestc = std::numeric_limits<double>::infinity();
      bool have = false;
      for (const auto& gp : g_loc)
        if (gp.first == y) {
          const double c = std::abs(DA[fp.first][fp.second] - DB[gp.first][gp.second]);
          if (c < bestc) {
            bestc = c;
            besty2 = gp.second;
            have = true;
          }
        }
      if (have) {
        add(fp.second, besty2);
        repaired = true;
        break;
      }
    }
    if (repaired) continue;
    for (const auto& gp : g_loc) {
      bool ok = false;
      for (const auto& fp : f_loc)
        if (mask[fp.first * m + gp.first] && mask[fp.second * m + gp.second]) {
          ok = true;
          break;
        }
      if (ok) continue;
      const std::size_t x = partner_row(gp.first);
      std::size_t bestx2 = 0;
      double bestc = std::numeric_limits<double>::infinity();
      bool have = false;
      for (const auto& fp : f_loc)
        if (fp.first == x) {
          const double c = std::abs(DA[fp.first][fp.second] - DB[gp.first][gp.second]);
          if (c < bestc) {
            bestc = c;
            bestx2 = fp.second;
            have = true;
          }
        }
      if (have) {
        add(bestx2, gp.second);
        repaired = true;
        break;
      }
    }
    if (!repaired) break;
  }
  // fall back to the full product, which always covers
  cells.clear();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cells.emplace_back(i, j);
  return cells;
}

}  // namespace detail_gh

// ---------------------------------------------------------------------------
// The bracket.

struct DghResult {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool exact = false;       // bracket ends meet within kCmpTol
  bool exhaustive = false;  // every correspondence search ran to completion
  std::vector<IndexPair> corr;  // ambient-id pairs realizing the upper bound
  double eps = 0.0;             // certified seam width for `corr`
};

inline DghResult dgh(const DynamicalRelation& f, const DynamicalRelation& g,
                     std::size_t budget = kDghDefaultBudget) {
  using detail_gh::CorrCandidate;
  const SubsetIndex X = carrier(f), Y = carrier(g);
  const auto DX = detail_gh::pairwise_matrix(f.S(), X);
  const auto DY = detail_gh::pairwise_matrix(g.S(), Y);
  const auto f_loc = detail_gh::local_pairs(f.pairs, X);
  const auto g_loc = detail_gh::local_pairs(g.pairs, Y);
  const std::size_t n = X.size(), m = Y.size();

  // --- upper bound over correspondences respecting both dynamics ---
  CorrCandidate seed;
  {
    std::vector<IndexPair> full;
    full.reserve(n * m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) full.emplace_back(i, j);
    seed.cells = std::move(full);
    seed.value = std::max(detail_gh::cells_distortion(DX, DY, seed.cells) / 2.0, kGlueFloor);
    seed.found = true;
    std::vector<IndexPair> greedy = detail_gh::greedy_dynamical_cells(DX, DY, f_loc, g_loc);
    std::sort(greedy.begin(), greedy.end());
    std::vector<char> mask(n * m, 0);
    for (const auto& c : greedy) mask[c.first * m + c.second] = 1;
    bool covers = true;
    {
      std::vector<char> rows(n, 0), cols(m, 0);
      for (const auto& c : greedy) rows[c.first] = 1, cols[c.second] = 1;
      covers = std::find(rows.begin(), rows.end(), 0) == rows.end() &&
               std::find(cols.begin(), cols.end(), 0) == cols.end();
    }
    if (covers && detail_gh::local_dynamical_cover(f_loc, g_loc, mask, m)) {
      const double v =
          std::max(detail_gh::cells_distortion(DX, DY, greedy) / 2.0, kGlueFloor);
      if (v < seed.value) {
        seed.value = v;
        seed.cells = std::move(greedy);
      }
    }
  }
  bool up_complete = false;
  auto accept_dynamical = [&](const std::vector<IndexPair>& cells) {
    std::vector<char> mask(n * m, 0);
    for (const auto& c : cells) mask[c.first * m + c.second] = 1;
    return detail_gh::local_dynamical_cover(f_loc, g_loc, mask, m);
  };
  CorrCandidate up = detail_gh::min_distortion_corr(DX, DY, kGlueFloor, budget, seed,
                                                    accept_dynamical, &up_complete);

  DghResult res;
  res.corr.reserve(up.cells.size());
  for (const auto& c : up.cells) res.corr.emplace_back(X[c.first], Y[c.second]);
  std::sort(res.corr.begin(), res.corr.end());
  GluedSystems gl = glue_systems(f, g, res.corr, up.value);
  res.eps = gl.eps;
  // Exact certificate in the glued space.  When the correspondence covers
  // both dynamics the glued distance equals the glue radius exactly, and the
  // same glue works at every radius above half the distortion, so the
  // certified value is half the distortion itself; otherwise keep the
  // recomputed distance, which is always a genuine upper bound.
  const double inside = ds_distance(gl.f, gl.g).value;
  res.upper = (inside == gl.eps) ? gl.distortion / 2.0 : inside;

  // --- lower bounds ---
  const auto DGf = detail_gh::graph_matrix(f.S(), f.pairs);
  const auto DGg = detail_gh::graph_matrix(g.S(), g.pairs);
  double lower = std::abs(detail_gh::matrix_diam(DX) - detail_gh::matrix_diam(DY)) / 2.0;
  lower = std::max(lower,
                   std::abs(detail_gh::matrix_diam(DGf) - detail_gh::matrix_diam(DGg)) / 2.0);
  auto accept_all = [](const std::vector<IndexPair>&) { return true; };
  CorrCandidate none;
  bool lo1_complete = false, lo2_complete = false;
  CorrCandidate lo1 =
      detail_gh::min_distortion_corr(DX, DY, 0.0, budget, none, accept_all, &lo1_complete);
  if (lo1_complete && lo1.found) lower = std::max(lower, lo1.value);
  CorrCandidate lo2 =
      detail_gh::min_distortion_corr(DGf, DGg, 0.0, budget, none, accept_all, &lo2_complete);
  if (lo2_complete && lo2.found) lower = std::max(lower, lo2.value);

  res.lower = lower;
  res.exhaustive = up_complete && lo1_complete && lo2_complete;
  res.exact = (res.upper - res.lower) <= kCmpTol;
  return res;
}

inline double dgh_lower(const DynamicalRelation& f, const DynamicalRelation& g,
                        std::size_t budget = kDghDefaultBudget) {
  return dgh(f, g, budget).lower;
}

inline double dgh_upper(const DynamicalRelation& f, const DynamicalRelation& g,
                        std::size_t budget = kDghDefaultBudget) {
  return dgh(f, g, budget).upper;
}

// ---------------------------------------------------------------------------
// Euclidean variant: minimize the system distance over rigid motions applied
// to the second system.  Dimension 1 enumerates all translation candidates
// where the objective can change slope (pair differences and their midpoints,
// with and without reflection), so the restriction to lines is exact.
// Dimensions 2 and 3 fit the best rotation per carrier bijection in closed
// form (plus the mirrored fit); higher dimensions fall back to translations.
// Every reported value is an exact distance evaluation at the best candidate.

struct RigidMotion {
  std::vector<std::vector<double>> linear;  // orthogonal, dim x dim
  std::vector<double> shift;                // dim
};

inline RigidMotion identity_motion(std::size_t dim) {
  RigidMotion t;
  t.linear.assign(dim, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i) t.linear[i][i] = 1.0;
  t.shift.assign(dim, 0.0);
  return t;
}

inline std::vector<double> apply_rigid(const RigidMotion& t, const std::vector<double>& p) {
  const std::size_t dim = t.shift.size();
  std::vector<double> q(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    double v = t.shift[i];
    for (std::size_t j = 0; j < dim; ++j) v += t.linear[i][j] * p[j];
    q[i] = v;
  }
  return q;
}

struct EuclideanGhResult {
  double value = std::numeric_limits<double>::infinity();
  RigidMotion motion;
  bool complete = true;  // candidate generation was not truncated
};

namespace detail_gh {

inline std::vector<double> centroid(const std::vector<std::vector<double>>& pts) {
  std::vector<double> c(pts[0].size(), 0.0);
  for (const auto& p : pts)
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += p[i];
  for (double& v : c) v /= static_cast<double>(pts.size());
  return c;
}

// Best rotation (optionally with a mirror pre-applied to the source) mapping
// source points onto target points in 2D, least squares, closed form.
inline RigidMotion fit_rotation_2d(const std::vector<std::vector<double>>& target,
                                   const std::vector<std::vector<double>>& source,
                                   bool mirror) {
  const std::vector<double> ct = centroid(target), cs = centroid(source);
  double A = 0.0, B = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double px = target[i][0] - ct[0], py = target[i][1] - ct[1];
    double qx = source[i][0] - cs[0], qy = source[i][1] - cs[1];
    if (mirror) qy = -qy;
    A += px * qx + py * qy;
    B += py * qx - px * qy;
  }
  const double th = std::atan2(B, A);
  const double c = std::cos(th), s = std::sin(th);
  RigidMotion t = identity_motion(2);
  t.linear = {{c, -s}, {s, c}};
  if (mirror) {
    t.linear[0][1] = -t.linear[0][1];
    t.linear[1][1] = -t.linear[1][1];
  }
  std::vector<double> rc(2, 0.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) rc[i] += t.linear[i][j] * cs[j];
  t.shift = {ct[0] - rc[0], ct[1] - rc[1]};
  return t;
}

// Dominant eigenvector of a symmetric 4x4 matrix by cyclic Jacobi sweeps;
// deterministic and quadratically convergent, so a handful of sweeps reaches
// machine precision.
inline void dominant_eigenvector_4(const double N[4][4], double v[4]) {
  double a[4][4], V[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      a[i][j] = N[i][j];
      V[i][j] = i == j ? 1.0 : 0.0;
    }
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-28) break;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) {
        if (a[p][q] == 0.0) continue;
        const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double apq = a[p][q];
        a[p][p] -= t * apq;
        a[q][q] += t * apq;
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        for (int i = 0; i < 4; ++i) {
          if (i == p || i == q) continue;
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[p][i] = a[i][p];
          a[i][q] = s * aip + c * aiq;
          a[q][i] = a[i][q];
        }
        for (int i = 0; i < 4; ++i) {
          const double vip = V[i][p], viq = V[i][q];
          V[i][p] = c * vip - s * viq;
          V[i][q] = s * vip + c * viq;
        }
      }
  }
  int k = 0;
  for (int i = 1; i < 4; ++i)
    if (a[i][i] > a[k][k]) k = i;
  for (int i = 0; i < 4; ++i) v[i] = V[i][k];
}

// Best rotation in 3D via the dominant eigenvector of the quaternion form.
// The mirrored variant reflects the source's last coordinate first.
inline RigidMotion fit_rotation_3d(const std::vector<std::vector<double>>& target,
                                   const std::vector<std::vector<double>>& source,
                                   bool mirror) {
  const std::vector<double> ct = centroid(target), cs = centroid(source);
  double S[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  for (std::size_t i = 0; i < target.size(); ++i) {
    double q[3] = {source[i][0] - cs[0], source[i][1] - cs[1], source[i][2] - cs[2]};
    if (mirror) q[2] = -q[2];
    const double p[3] = {target[i][0] - ct[0], target[i][1] - ct[1], target[i][2] - ct[2]};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) S[a][b] += q[a] * p[b];
  }
  const double N[4][4] = {
      {S[0][0] + S[1][1] + S[2][2], S[1][2] - S[2][1], S[2][0] - S[0][2], S[0][1] - S[1][0]},
      {S[1][2] - S[2][1], S[0][0] - S[1][1] - S[2][2], S[0][1] + S[1][0], S[2][0] + S[0][2]},
      {S[2][0] - S[0][2], S[0][1] + S[1][0], -S[0][0] + S[1][1] - S[2][2], S[1][2] + S[2][1]},
      {S[0][1] - S[1][0], S[2][0] + S[0][2], S[1][2] + S[2][1], -S[0][0] - S[1][1] + S[2][2]}};
  double v[4];
  dominant_eigenvector_4(N, v);
  const double qw = v[0], qx = v[1], qy = v[2], qz = v[3];
  RigidMotion t = identity_motion(3);
  t.linear = {{1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qw * qz), 2 * (qx * qz + qw * qy)},
              {2 * (qx * qy + qw * qz), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qw * qx)},
              {2 * (qx * qz - qw * qy), 2 * (qy * qz + qw * qx), 1 - 2 * (qx * qx + qy * qy)}};
  if (mirror)
    for (int a = 0; a < 3; ++a) t.linear[a][2] = -t.linear[a][2];
  std::vector<double> rc(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) rc[i] += t.linear[i][j] * cs[j];
  t.shift = {ct[0] - rc[0], ct[1] - rc[1], ct[2] - rc[2]};
  return t;
}

}  // namespace detail_gh

inline EuclideanGhResult euclidean_dgh(const DynamicalRelation& f, const DynamicalRelation& g,
                                       std::size_t budget = 5040) {
  const FiniteMetricSpace& A = f.S();
  const FiniteMetricSpace& B = g.S();
  if (A.kind != SpaceKind::Euclidean || B.kind != SpaceKind::Euclidean)
    fail(Err::NotEuclideanAmbient, "rigid-motion distance needs Euclidean coordinates");
  const std::size_t dim = A.pts.at(0).size();
  if (dim != B.pts.at(0).size())
    fail(Err::DimensionMismatch, "the two systems live in different dimensions");
  const SubsetIndex X = carrier(f), Y = carrier(g);
  std::vector<std::vector<double>> P, Q;
  for (std::size_t i : X) P.push_back(A.pts[i]);
  for (std::size_t j : Y) Q.push_back(B.pts[j]);

  EuclideanGhResult res;
  std::vector<RigidMotion> cands;
  cands.push_back(identity_motion(dim));
  {
    RigidMotion t = identity_motion(dim);
    const auto cp = detail_gh::centroid(P), cq = detail_gh::centroid(Q);
    for (std::size_t i = 0; i < dim; ++i) t.shift[i] = cp[i] - cq[i];
    cands.push_back(t);
  }
  if (P.size() * Q.size() <= 4096) {
    for (const auto& p : P)
      for (const auto& q : Q) {
        RigidMotion t = identity_motion(dim);
        for (std::size_t i = 0; i < dim; ++i) t.shift[i] = p[i] - q[i];
        cands.push_back(t);
      }
  }
  if (dim == 1) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> diffs;
      for (const auto& p : P)
        for (const auto& q : Q) diffs.push_back(p[0] - s * q[0]);
      std::sort(diffs.begin(), diffs.end());
      diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
      if (diffs.size() > 300) {
        diffs.resize(300);
        res.complete = false;
      }
      std::vector<double> ts = diffs;
      for (std::size_t i = 0; i < diffs.size(); ++i)
        for (std::size_t j = i + 1; j < diffs.size(); ++j)
          ts.push_back((diffs[i] + diffs[j]) / 2.0);
      for (double t0 : ts) {
        RigidMotion t = identity_motion(1);
        t.linear[0][0] = s;
        t.shift[0] = t0;
        cands.push_back(t);
      }
    }
  } else if ((dim == 2 || dim == 3) && P.size() == Q.size()) {
    std::vector<std::size_t> perm(Q.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::size_t tried = 0;
    do {
      if (++tried > budget) {
        res.complete = false;
        break;
      }
      std::vector<std::vector<double>> Qp(Q.size());
      for (std::size_t i = 0; i < Q.size(); ++i) Qp[i] = Q[perm[i]];
      for (bool mirror : {false, true}) {
        RigidMotion t = dim == 2 ? detail_gh::fit_rotation_2d(P, Qp, mirror)
                                 : detail_gh::fit_rotation_3d(P, Qp, mirror);
        cands.push_back(std::move(t));
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  const std::size_t off = A.size();
  for (const auto& t : cands) {
    std::vector<std::vector<double>> moved;
    moved.reserve(B.size());
    for (const auto& q : B.pts) moved.push_back(apply_rigid(t, q));
    FiniteMetricSpace MB = euclidean_space(std::move(moved));
    auto U = std::make_shared<const FiniteMetricSpace>(union_space(A, MB));
    DynamicalRelation fu{U, f.pairs};
    std::vector<IndexPair> gp;
    gp.reserve(g.pairs.size());
    for (const auto& p : g.pairs) gp.emplace_back(p.first + off, p.second + off);
    DynamicalRelation gu{U, std::move(gp)};
    const double v = ds_distance(fu, gu).value;
    if (v < res.value) {
      res.value = v;
      res.motion = t;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Exact searches: distance-preserving bijections between carriers that carry
// one pair set onto the other (conjugacy), and distance-preserving bijections
// between the graphs themselves under the max product metric.

namespace detail_iso {

inline constexpr std::size_t kUnset = static_cast<std::size_t>(-1);

template <class PartialOk, class LeafOk>
inline bool isometry_search(const std::vector<std::vector<double>>& DA,
                            const std::vector<std::vector<double>>& DB, double tol,
                            std::vector<std::size_t>& out, PartialOk&& partial_ok,
                            LeafOk&& leaf_ok) {
  const std::size_t n = DA.size();
  if (DB.size() != n || n == 0) return false;
  std::vector<std::vector<double>> pa(n), pb(n);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i] = DA[i];
    std::sort(pa[i].begin(), pa[i].end());
    pb[i] = DB[i];
    std::sort(pb[i].begin(), pb[i].end());
  }
  std::vector<std::vector<std::size_t>> cand(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < n; ++c) {
      bool ok = true;
      for (std::size_t t = 0; t < n && ok; ++t) ok = std::abs(pa[i][t] - pb[c][t]) <= tol;
      if (ok) cand[i].push_back(c);
    }
  std::vector<std::size_t> sigma(n, kUnset);
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, std::size_t i) -> bool {
    if (i == n) return leaf_ok(sigma);
    for (std::size_t c : cand[i]) {
      if (used[c]) continue;
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) ok = std::abs(DA[i][j] - DB[c][sigma[j]]) <= tol;
      if (!ok) continue;
      sigma[i] = c;
      used[c] = 1;
      if (partial_ok(i, sigma) && self(self, i + 1)) return true;
      used[c] = 0;
      sigma[i] = kUnset;
    }
    return false;
  };
  if (!rec(rec, 0)) return false;
  out = sigma;
  return true;
}

}  // namespace detail_iso

struct IsometrySearchResult {
  bool found = false;
  std::vector<IndexPair> map;  // see each search for what the entries index
};

// Searches for a distance-preserving bijection between the carriers that
// carries the pair set of `f` exactly onto the pair set of `g`.  The map
// entries are (ambient id in f's space, ambient id in g's space).
inline IsometrySearchResult isometric_conjugacy_check(const DynamicalRelation& f,
                                                      const DynamicalRelation& g,
                                                      double tol = kIsoTol) {
  IsometrySearchResult res;
  const SubsetIndex X = carrier(f), Y = carrier(g);
  if (X.size() != Y.size() || f.pairs.size() != g.pairs.size()) return res;
  const auto DA = detail_gh::pairwise_matrix(f.S(), X);
  const auto DB = detail_gh::pairwise_matrix(g.S(), Y);
  const auto f_loc = detail_gh::local_pairs(f.pairs, X);
  auto g_loc = detail_gh::local_pairs(g.pairs, Y);
  std::sort(g_loc.begin(), g_loc.end());
  std::vector<std::vector<IndexPair>> touching(X.size());
  for (const auto& p : f_loc) {
    touching[p.first].push_back(p);
    if (p.second != p.first) touching[p.second].push_back(p);
  }
  auto partial_ok = [&](std::size_t i, const std::vector<std::size_t>& sigma) {
    for (const auto& p : touching[i]) {
      const std::size_t sa = sigma[p.first], sb = sigma[p.second];
      if (sa == detail_iso::kUnset || sb == detail_iso::kUnset) continue;
      if (!std::binary_search(g_loc.begin(), g_loc.end(), IndexPair{sa, sb})) return false;
    }
    return true;
  };
  auto leaf_ok = [&](const std::vector<std::size_t>& sigma) {
    std::vector<IndexPair> mapped;
    mapped.reserve(f_loc.size());
    for (const auto& p : f_loc) mapped.emplace_back(sigma[p.first], sigma[p.second]);
    std::sort(mapped.begin(), mapped.end());
    return mapped == g_loc;
  };
  std::vector<std::size_t> sigma;
  if (!detail_iso::isometry_search(DA, DB, tol, sigma, partial_ok, leaf_ok)) return res;
  res.found = true;
  res.map.reserve(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) res.map.emplace_back(X[i], Y[sigma[i]]);
  return res;
}

// Searches for a distance-preserving bijection between the graphs of the two
// relations, each viewed as a point set under the coordinatewise-max metric.
// The map entries are (index into f.pairs, index into g.pairs).
inline IsometrySearchResult graph_isometry_check(const DynamicalRelation& f,
                                                 const DynamicalRelation& g,
                                                 double tol = kIsoTol) {
  IsometrySearchResult res;
  if (f.pairs.size() != g.pairs.size()) return res;
  const auto DA = detail_gh::graph_matrix(f.S(), f.pairs);
  const auto DB = detail_gh::graph_matrix(g.S(), g.pairs);
  auto partial_ok = [](std::size_t, const std::vector<std::size_t>&) { return true; };
  auto leaf_ok = [](const std::vector<std::size_t>&) { return true; };
  std::vector<std::size_t> sigma;
  if (!detail_iso::isometry_search(DA, DB, tol, sigma, partial_ok, leaf_ok)) return res;
  res.found = true;
  res.map.reserve(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) res.map.emplace_back(i, sigma[i]);
  return res;
}

}  // namespace dsmetric
