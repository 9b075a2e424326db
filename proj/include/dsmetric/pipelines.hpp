#pragma once
// End-to-end procedures on sampled manifold maps: approximate a sampled
// system by one living on a small Cantor-like point set (net -> transition
// lift -> cylinder embedding) with exactly recomputed certificates, a
// power-map regression table, and genericity diagnostics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "dsmetric/core.hpp"
#include "dsmetric/discretize.hpp"
#include "dsmetric/metric_space.hpp"
#include "dsmetric/relation.hpp"
#include "dsmetric/sft.hpp"

namespace dsmetric {

// ---------------------------------------------------------------------------
// Declared continuity modulus.  Either a Lipschitz constant, or a table of
// rows (target, delta) promising: d(x, x') < delta  =>  d(f x, f x') < target.
// Finite samples cannot infer a modulus soundly, so it must be declared and
// is then verified against every sampled pair.

struct Modulus {
  double lipschitz = 0.0;                         // used when table is empty
  std::vector<std::pair<double, double>> table;   // (target, delta) rows
};

inline Modulus lipschitz_modulus(double L) {
  if (!(L > 0.0)) fail(Err::BadShape, "Lipschitz constant must be positive");
  return Modulus{L, {}};
}

inline Modulus table_modulus(std::vector<std::pair<double, double>> rows) {
  if (rows.empty()) fail(Err::BadShape, "modulus table is empty");
  for (const auto& r : rows)
    if (!(r.first > 0.0) || !(r.second > 0.0))
      fail(Err::BadShape, "modulus table entries must be positive");
  return Modulus{0.0, std::move(rows)};
}

// Largest input radius the modulus certifies for the given output closeness.
inline double delta_for(const Modulus& m, double target) {
  if (!(target > 0.0)) fail(Err::BadShape, "target closeness must be positive");
  if (m.table.empty()) {
    if (!(m.lipschitz > 0.0)) fail(Err::BadShape, "modulus is not set");
    return target / m.lipschitz;
  }
  double best = 0.0;
  for (const auto& r : m.table)
    if (r.first <= target) best = std::max(best, r.second);
  if (!(best > 0.0))
    fail(Err::BadShape, "modulus table does not cover the requested closeness");
  return best;
}

// ---------------------------------------------------------------------------
// A sampled self-map of a manifold: a coordinate grid (interval points,
// circle angles, or torus angle pairs) with its intrinsic metric, a total
// function table on the grid, and the declared modulus.  The table must hit
// every grid point, so that the sample is itself a dynamical system.

struct SampledManifoldMap {
  std::shared_ptr<const FiniteMetricSpace> grid;
  std::vector<std::size_t> table;  // table[i] = index of the image of point i
  Modulus modulus;

  DynamicalRelation relation() const {
    std::vector<IndexPair> pairs;
    pairs.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) pairs.emplace_back(i, table[i]);
    return make_relation(grid, std::move(pairs));
  }
};

// Check the declared modulus against every sampled pair.
inline void verify_modulus(const SampledManifoldMap& m) {
  const FiniteMetricSpace& S = *m.grid;
  const std::size_t n = S.size();
  if (m.modulus.table.empty() && !(m.modulus.lipschitz > 0.0))
    fail(Err::BadShape, "modulus is not set");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double din = S.dist(i, j);
      const double dout = S.dist(m.table[i], m.table[j]);
      if (m.modulus.table.empty()) {
        if (dout > m.modulus.lipschitz * din + kMetricTol)
          fail(Err::ModulusInconsistent,
               "image pair " + std::to_string(i) + "," + std::to_string(j) +
                   " stretches beyond the declared Lipschitz constant");
      } else {
        for (const auto& r : m.modulus.table)
          if (din < r.second && dout >= r.first)
            fail(Err::ModulusInconsistent,
                 "pair " + std::to_string(i) + "," + std::to_string(j) +
                     " violates modulus row (" + std::to_string(r.first) + ", " +
                     std::to_string(r.second) + ")");
      }
    }
  }
}

inline SampledManifoldMap make_sampled_map(std::shared_ptr<const FiniteMetricSpace> grid,
                                           std::vector<std::size_t> table, Modulus modulus) {
  if (!grid) fail(Err::BadShape, "missing grid space");
  if (!grid->has_coords())
    fail(Err::NotEuclideanAmbient, "manifold samples need a coordinate grid");
  require_valid(*grid);
  if (table.size() != grid->size())
    fail(Err::BadShape, "function table must cover the whole grid");
  for (std::size_t v : table)
    if (v >= grid->size()) fail(Err::IndexOutOfRange, "table value outside the grid");
  SampledManifoldMap m{std::move(grid), std::move(table), std::move(modulus)};
  verify_modulus(m);
  return m;
}

// Largest nearest-neighbour gap: every point of the underlying manifold that
// the grid claims to represent is assumed no farther than this from the grid.
inline double grid_resolution(const FiniteMetricSpace& S) {
  if (S.size() < 2) fail(Err::BadShape, "resolution needs at least two points");
  double res = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < S.size(); ++j)
      if (j != i) nearest = std::min(nearest, S.dist(i, j));
    res = std::max(res, nearest);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Manifold -> Cantor approximation.  The sampled system is replaced by the
// shift relation on embedded cylinder points: carrier dense in the grid and
// system distance to the sample both strictly below the requested eps, both
// numbers recomputed exactly rather than trusted from the construction.

struct CantorApproxCertificate {
  DynamicalRelation g;          // the produced system on the embedded points
  std::size_t grid_size = 0;    // grid occupies indices 0..grid_size-1 of g's space
  std::size_t cantor_points = 0;
  double eps = 0;               // requested bound
  double delta = 0;             // internal approximation radius actually used
  double density_defect = 0;    // Hausdorff distance between carrier(g) and the grid
  double closeness = 0;         // system distance between g and the sample
};

inline CantorApproxCertificate manifold_cantor_approx(const SampledManifoldMap& m, double eps,
                                                      std::size_t depth = 0,
                                                      std::size_t bits = 0,
                                                      std::size_t budget = 200000) {
  verify_modulus(m);
  DynamicalRelation f = m.relation();
  const double res = grid_resolution(*m.grid);
  if (!(eps > res))
    fail(Err::GridTooCoarse, "requested eps " + std::to_string(eps) +
                                 " does not exceed the grid resolution " + std::to_string(res));

  // Radius that keeps the final chain strictly below eps: the net stays
  // within delta of the grid, the embedding within delta of the net, and the
  // two system-distance legs contribute at most delta each.  The strict
  // shrink by 0.98 turns the raw bound min(eps/2, modulus width) into a
  // certificate margin instead of a boundary case.
  const double delta = 0.98 * std::min(eps / 2.0, delta_for(m.modulus, eps / 2.0));
  if (!(delta > 0.0)) fail(Err::BadShape, "degenerate approximation radius");

  ApproxResult ap = finite_relation_approx(f, delta);
  TransitionSystem T = sft_from_relation(ap.g);
  EmbeddedSft E = embed_cylinders(T, ap.g, depth, delta, bits, budget);

  CantorApproxCertificate cert;
  cert.grid_size = E.base_size;
  cert.eps = eps;
  cert.delta = delta;
  cert.g = E.h;
  const SubsetIndex cantor = carrier(E.h);
  cert.cantor_points = cantor.size();

  SubsetIndex grid_idx(m.grid->size());
  for (std::size_t i = 0; i < grid_idx.size(); ++i) grid_idx[i] = i;
  cert.density_defect = hausdorff_distance(*E.combined, cantor, grid_idx).value;
  DynamicalRelation f_on_combined{E.combined, f.pairs};
  cert.closeness = ds_distance(E.h, f_on_combined).value;

  if (!(cert.density_defect < eps))
    fail(Err::BadShape, "approximation certificate failed (internal): carrier not dense");
  if (!(cert.closeness < eps))
    fail(Err::BadShape, "approximation certificate failed (internal): system too far");
  return cert;
}

// ---------------------------------------------------------------------------
// Power-map regression: sampled graphs of x -> x^n on [0,1] against the
// sampled corner relation ([0,1] x {0}) u ({1} x [0,1]).  The graphs of the
// maps converge to the corner in system distance even though the maps do not
// converge pointwise, and the table records that decay.

struct PowerRegressionRow {
  std::size_t n = 0;
  double value = 0;  // system distance between the sampled power map and the corner
};

inline std::vector<PowerRegressionRow> power_map_regression(
    const std::vector<std::size_t>& n_list, std::size_t grid_points = 1001) {
  if (n_list.empty()) fail(Err::BadShape, "empty exponent list");
  for (std::size_t n : n_list)
    if (n == 0) fail(Err::BadShape, "exponents must be positive");
  if (grid_points < 2) fail(Err::BadShape, "grid needs at least two points");

  const std::size_t N = grid_points;
  std::vector<double> xs(N);
  for (std::size_t i = 0; i < N; ++i)
    xs[i] = static_cast<double>(i) / static_cast<double>(N - 1);
  auto space = std::make_shared<const FiniteMetricSpace>(line_space(xs));
  auto snap = [&](double v) {
    v = std::min(1.0, std::max(0.0, v));
    return static_cast<std::size_t>(std::llround(v * static_cast<double>(N - 1)));
  };

  // corner relation: everything maps to 0, and 1 maps onto everything
  std::vector<IndexPair> corner_pairs;
  corner_pairs.reserve(2 * N);
  for (std::size_t i = 0; i < N; ++i) corner_pairs.emplace_back(i, 0);
  for (std::size_t j = 0; j < N; ++j) corner_pairs.emplace_back(N - 1, j);
  DynamicalRelation corner = make_relation(space, std::move(corner_pairs));

  std::vector<PowerRegressionRow> out;
  out.reserve(n_list.size());
  for (std::size_t n : n_list) {
    // sample the graph of x^n in both directions so every grid point shows
    // up on each axis and the sampled set tracks the whole curve
    std::vector<IndexPair> pairs;
    pairs.reserve(2 * N);
    const double e = static_cast<double>(n);
    for (std::size_t i = 0; i < N; ++i) pairs.emplace_back(i, snap(std::pow(xs[i], e)));
    for (std::size_t j = 0; j < N; ++j) pairs.emplace_back(snap(std::pow(xs[j], 1.0 / e)), j);
    DynamicalRelation fn = make_relation(space, std::move(pairs));
    out.push_back({n, ds_distance(fn, corner).value});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Genericity diagnostics: where a relation sits relative to the families of
// systems with small fibers, the scale components of its carrier, and the
// points its carrier isolates at a given scale.

inline std::vector<std::vector<std::size_t>> scale_components(const FiniteMetricSpace& S,
                                                              const SubsetIndex& A, double r) {
  require_subset(S, A, "component carrier");
  std::vector<std::size_t> parent(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = i + 1; j < A.size(); ++j)
      if (S.dist(A[i], A[j]) <= r) parent[find(i)] = find(j);
  std::vector<std::vector<std::size_t>> comps(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) comps[find(i)].push_back(A[i]);
  comps.erase(std::remove_if(comps.begin(), comps.end(),
                             [](const auto& c) { return c.empty(); }),
              comps.end());
  std::sort(comps.begin(), comps.end());
  return comps;
}

// Points of A whose punctured open eps-ball misses A entirely.
inline std::vector<std::size_t> isolated_points(const FiniteMetricSpace& S, const SubsetIndex& A,
                                                double eps) {
  require_subset(S, A, "isolation carrier");
  std::vector<std::size_t> out;
  for (std::size_t a : A) {
    bool alone = true;
    for (std::size_t b : A)
      if (b != a && S.dist(a, b) < eps) {
        alone = false;
        break;
      }
    if (alone) out.push_back(a);
  }
  return out;
}

struct GenericityReport {
  double fiber_diam_fwd = 0;  // largest image-set diameter of the relation
  double fiber_diam_bwd = 0;  // same for the inverse relation
  std::vector<double> eps_list;
  std::vector<bool> small_fibers_at;                // fiber diameters < eps, both directions
  std::vector<std::vector<std::size_t>> isolated_at;  // isolated carrier points per eps
  std::vector<double> r_list;
  std::vector<double> component_mesh;  // largest component diameter per scale
  std::vector<std::size_t> component_count;
};

inline GenericityReport genericity_report(const DynamicalRelation& f,
                                          const std::vector<double>& eps_list,
                                          const std::vector<double>& r_list) {
  GenericityReport rep;
  rep.fiber_diam_fwd = max_fiber_diameter(f);
  rep.fiber_diam_bwd = max_fiber_diameter(inverse(f));
  rep.eps_list = eps_list;
  rep.r_list = r_list;
  const FiniteMetricSpace& S = f.S();
  const SubsetIndex car = carrier(f);
  for (double e : eps_list) {
    rep.small_fibers_at.push_back(rep.fiber_diam_fwd < e && rep.fiber_diam_bwd < e);
    rep.isolated_at.push_back(isolated_points(S, car, e));
  }
  for (double r : r_list) {
    auto comps = scale_components(S, car, r);
    double mesh = 0.0;
    for (const auto& c : comps)
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
          mesh = std::max(mesh, S.dist(c[i], c[j]));
    rep.component_mesh.push_back(mesh);
    rep.component_count.push_back(comps.size());
  }
  return rep;
}

}  // namespace dsmetric
