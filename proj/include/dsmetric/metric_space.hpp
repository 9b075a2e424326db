#pragma once
// Finite metric spaces: validation, subsets, Hausdorff distance with
// witnesses, farthest-point nets, sup-norm coordinate embedding, chain
// components at a scale, isolated points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dsmetric/core.hpp"

namespace dsmetric {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Backing is either an explicit symmetric matrix or point coordinates with a
// closed-form metric evaluated on demand (large spaces never materialize the
// n^2 matrix).  Circle points are angles in radians; torus points live in
// [0,1)^2 with the flat wrapped metric.
enum class SpaceKind { Matrix, Euclidean, Circle, Torus };

struct FiniteMetricSpace {
  SpaceKind kind = SpaceKind::Matrix;
  std::vector<std::vector<double>> mat;  // Matrix kind only
  std::vector<std::vector<double>> pts;  // coordinate kinds only
  std::vector<std::string> labels;       // optional, size() entries when present

  std::size_t size() const { return kind == SpaceKind::Matrix ? mat.size() : pts.size(); }

  static double wrap_unit(double x) {
    double w = std::fabs(x);
    w -= std::floor(w);
    return std::min(w, 1.0 - w);
  }

  double dist(std::size_t i, std::size_t j) const {
    switch (kind) {
      case SpaceKind::Matrix:
        return mat[i][j];
      case SpaceKind::Euclidean: {
        double s = 0;
        for (std::size_t c = 0; c < pts[i].size(); ++c) {
          double d = pts[i][c] - pts[j][c];
          s += d * d;
        }
        return std::sqrt(s);
      }
      case SpaceKind::Circle: {
        double a = std::fabs(pts[i][0] - pts[j][0]);
        a = std::fmod(a, kTwoPi);
        return std::min(a, kTwoPi - a);
      }
      case SpaceKind::Torus: {
        double du = wrap_unit(pts[i][0] - pts[j][0]);
        double dv = wrap_unit(pts[i][1] - pts[j][1]);
        return std::sqrt(du * du + dv * dv);
      }
    }
    return 0.0;
  }

  bool has_coords() const { return kind != SpaceKind::Matrix; }
};

inline FiniteMetricSpace matrix_space(std::vector<std::vector<double>> m) {
  FiniteMetricSpace s;
  s.kind = SpaceKind::Matrix;
  s.mat = std::move(m);
  return s;
}

inline FiniteMetricSpace euclidean_space(std::vector<std::vector<double>> pts) {
  FiniteMetricSpace s;
  s.kind = SpaceKind::Euclidean;
  s.pts = std::move(pts);
  return s;
}

inline FiniteMetricSpace line_space(const std::vector<double>& xs) {
  std::vector<std::vector<double>> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back({x});
  return euclidean_space(std::move(pts));
}

inline FiniteMetricSpace circle_space(const std::vector<double>& angles) {
  FiniteMetricSpace s;
  s.kind = SpaceKind::Circle;
  for (double a : angles) s.pts.push_back({a});
  return s;
}

inline FiniteMetricSpace torus_space(std::vector<std::vector<double>> pts) {
  FiniteMetricSpace s;
  s.kind = SpaceKind::Torus;
  s.pts = std::move(pts);
  return s;
}

// ---------------------------------------------------------------------------
// Validation.  Every violated axiom is reported with the offending indices.

struct MetricIssue {
  Err code;
  std::size_t i = 0, j = 0, k = 0;  // k used by triangle violations only
  std::string msg;
};

struct MetricReport {
  std::vector<MetricIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const {
    std::ostringstream os;
    for (const auto& is : issues) os << err_name(is.code) << " " << is.msg << "\n";
    return os.str();
  }
};

inline MetricReport validate_metric(const FiniteMetricSpace& S, double tol = kMetricTol) {
  MetricReport rep;
  auto add = [&rep](Err c, std::size_t i, std::size_t j, std::size_t k, std::string msg) {
    rep.issues.push_back({c, i, j, k, std::move(msg)});
  };
  const std::size_t n = S.size();
  if (S.kind == SpaceKind::Matrix) {
    for (std::size_t i = 0; i < n; ++i)
      if (S.mat[i].size() != n) {
        add(Err::BadShape, i, 0, 0, "row " + std::to_string(i) + " has wrong length");
        return rep;  // shape errors make index-based checks meaningless
      }
    for (std::size_t i = 0; i < n; ++i) {
      if (S.mat[i][i] != 0.0)
        add(Err::BadShape, i, i, 0, "nonzero diagonal at " + std::to_string(i));
      for (std::size_t j = i + 1; j < n; ++j) {
        if (S.mat[i][j] < 0.0)
          add(Err::NegativeDistance, i, j, 0,
              "(" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (S.mat[i][j] != S.mat[j][i])
          add(Err::AsymmetricMatrix, i, j, 0,
              "(" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (S.mat[i][j] == 0.0)
          add(Err::DuplicatePoint, i, j, 0,
              "points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          if (S.mat[i][j] > S.mat[i][k] + S.mat[k][j] + tol)
            add(Err::TriangleViolation, i, j, k,
                "d(" + std::to_string(i) + "," + std::to_string(j) + ") > d(.," +
                    std::to_string(k) + ") chain");
        }
  } else {
    const std::size_t want = S.kind == SpaceKind::Circle ? 1 : (S.kind == SpaceKind::Torus ? 2 : (n ? S.pts[0].size() : 0));
    for (std::size_t i = 0; i < n; ++i) {
      if (S.pts[i].size() != want)
        add(Err::CoordMismatch, i, 0, 0, "point " + std::to_string(i) + " has wrong dimension");
      for (double c : S.pts[i])
        if (!std::isfinite(c)) add(Err::BadShape, i, 0, 0, "non-finite coordinate at " + std::to_string(i));
    }
    if (std::none_of(rep.issues.begin(), rep.issues.end(),
                     [](const MetricIssue& is) { return is.code == Err::CoordMismatch || is.code == Err::BadShape; })) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (S.dist(i, j) == 0.0)
            add(Err::DuplicatePoint, i, j, 0,
                "points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    }
    // symmetry and the triangle inequality hold by construction for the
    // closed-form metrics, so they are not re-checked point by point here
  }
  if (!S.labels.empty() && S.labels.size() != n)
    add(Err::BadShape, 0, 0, 0, "label count differs from point count");
  return rep;
}

inline const FiniteMetricSpace& require_valid(const FiniteMetricSpace& S, double tol = kMetricTol) {
  MetricReport rep = validate_metric(S, tol);
  if (!rep.ok()) fail(rep.issues.front().code, "metric validation failed:\n" + rep.to_string());
  return S;
}

// ---------------------------------------------------------------------------
// Subsets and derived spaces.

using SubsetIndex = std::vector<std::size_t>;

inline SubsetIndex all_indices(const FiniteMetricSpace& S) {
  SubsetIndex v(S.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

inline void require_subset(const FiniteMetricSpace& S, const SubsetIndex& A, const char* what) {
  if (A.empty()) fail(Err::EmptyNet, std::string(what) + " is empty");
  for (std::size_t i : A)
    if (i >= S.size()) fail(Err::IndexOutOfRange, std::string(what) + " index " + std::to_string(i));
}

inline FiniteMetricSpace subspace(const FiniteMetricSpace& S, const SubsetIndex& idx) {
  require_subset(S, idx, "subspace index set");
  FiniteMetricSpace out;
  out.kind = S.kind;
  if (S.kind == SpaceKind::Matrix) {
    out.mat.assign(idx.size(), std::vector<double>(idx.size(), 0.0));
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) out.mat[a][b] = S.mat[idx[a]][idx[b]];
  } else {
    for (std::size_t i : idx) out.pts.push_back(S.pts[i]);
  }
  if (!S.labels.empty())
    for (std::size_t i : idx) out.labels.push_back(S.labels[i]);
  return out;
}

// Disjoint union of two coordinate-backed spaces of identical kind/dimension.
// The result indexes A's points first, then B's.
inline FiniteMetricSpace union_space(const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
  if (!A.has_coords() || !B.has_coords() || A.kind != B.kind)
    fail(Err::SpaceMismatch, "union requires two coordinate spaces of the same kind");
  if (A.size() && B.size() && A.pts[0].size() != B.pts[0].size())
    fail(Err::SpaceMismatch, "union requires equal ambient dimension");
  FiniteMetricSpace out;
  out.kind = A.kind;
  out.pts = A.pts;
  out.pts.insert(out.pts.end(), B.pts.begin(), B.pts.end());
  return out;
}

// ---------------------------------------------------------------------------
// Hausdorff distance between two nonempty subsets of one space, exact max-min
// with attained witnesses.  Ties resolve to the lexicographically smallest
// index pair (scan order, strict improvement only).

struct DirectedWitness {
  double value = 0;
  std::size_t from = 0, to = 0;  // from realizes the max; to is its nearest partner
};

struct HausdorffResult {
  double value = 0;
  DirectedWitness ab, ba;
  int direction = 0;  // 0 when ab attains the max, 1 when ba does
  std::size_t from = 0, to = 0;
};

inline DirectedWitness directed_hausdorff(const FiniteMetricSpace& S, const SubsetIndex& A,
                                          const SubsetIndex& B) {
  DirectedWitness w;
  w.value = -1.0;
  for (std::size_t a : A) {
    double best = -1.0;
    std::size_t bestb = B.front();
    for (std::size_t b : B) {
      double d = S.dist(a, b);
      if (best < 0.0 || d < best) {
        best = d;
        bestb = b;
      }
    }
    if (best > w.value) {
      w.value = best;
      w.from = a;
      w.to = bestb;
    }
  }
  return w;
}

inline HausdorffResult hausdorff_distance(const FiniteMetricSpace& S, const SubsetIndex& A,
                                          const SubsetIndex& B) {
  require_subset(S, A, "hausdorff subset A");
  require_subset(S, B, "hausdorff subset B");
  HausdorffResult r;
  r.ab = directed_hausdorff(S, A, B);
  r.ba = directed_hausdorff(S, B, A);
  if (r.ab.value >= r.ba.value) {
    r.value = r.ab.value;
    r.direction = 0;
    r.from = r.ab.from;
    r.to = r.ab.to;
  } else {
    r.value = r.ba.value;
    r.direction = 1;
    r.from = r.ba.from;
    r.to = r.ba.to;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Farthest-point greedy net.  Deterministic: starts at the first index of
// `within`, tie-breaks to the lowest index, stops once every point of
// `within` lies within eps (closed ball) of the chosen set.  The cover radius
// is certified by direct recomputation before returning.

inline SubsetIndex epsilon_net(const FiniteMetricSpace& S, double eps, const SubsetIndex& within) {
  if (!(eps > 0.0)) fail(Err::BadShape, "epsilon_net needs eps > 0");
  require_subset(S, within, "epsilon_net input");
  SubsetIndex Q{within.front()};
  std::vector<double> mind(within.size());
  for (std::size_t t = 0; t < within.size(); ++t) mind[t] = S.dist(within[t], Q[0]);
  for (;;) {
    double far = -1.0;
    std::size_t fidx = 0;
    for (std::size_t t = 0; t < within.size(); ++t)
      if (mind[t] > far) {
        far = mind[t];
        fidx = t;
      }
    if (far <= eps) break;
    Q.push_back(within[fidx]);
    for (std::size_t t = 0; t < within.size(); ++t)
      mind[t] = std::min(mind[t], S.dist(within[t], Q.back()));
  }
  // certify the cover radius
  double worst = 0.0;
  for (std::size_t x : within) {
    double best = -1.0;
    for (std::size_t q : Q) {
      double d = S.dist(x, q);
      if (best < 0.0 || d < best) best = d;
    }
    worst = std::max(worst, best);
  }
  if (worst > eps) fail(Err::BadShape, "net certification failed (internal)");
  return Q;
}

inline SubsetIndex epsilon_net(const FiniteMetricSpace& S, double eps) {
  return epsilon_net(S, eps, all_indices(S));
}

// ---------------------------------------------------------------------------
// Coordinate embedding: point i maps to the vector of distances to every
// point, recentered so the first point's image is the origin.  Under the
// sup norm this reproduces every pairwise distance exactly on finite inputs.

inline std::vector<std::vector<double>> frechet_embedding(const FiniteMetricSpace& S) {
  const std::size_t n = S.size();
  if (n == 0) fail(Err::EmptyNet, "embedding of an empty space");
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = S.dist(i, j) - S.dist(j, 0);
  return out;
}

inline double linf_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Chain components at scale r: union-find over all pairs at distance <= r.
// mesh = the largest internal diameter among the components.

struct ScaleComponents {
  std::vector<std::vector<std::size_t>> components;  // each sorted; ordered by smallest member
  double mesh = 0.0;
};

inline ScaleComponents scale_components(const FiniteMetricSpace& S, double r,
                                        const SubsetIndex& within) {
  require_subset(S, within, "scale_components input");
  const std::size_t n = within.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (S.dist(within[a], within[b]) <= r) {
        std::size_t ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
  ScaleComponents out;
  std::vector<long> slot(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t r0 = find(a);
    if (slot[r0] < 0) {
      slot[r0] = static_cast<long>(out.components.size());
      out.components.emplace_back();
    }
    out.components[static_cast<std::size_t>(slot[r0])].push_back(within[a]);
  }
  for (auto& comp : out.components) {
    for (std::size_t a = 0; a < comp.size(); ++a)
      for (std::size_t b = a + 1; b < comp.size(); ++b)
        out.mesh = std::max(out.mesh, S.dist(comp[a], comp[b]));
  }
  return out;
}

inline ScaleComponents scale_components(const FiniteMetricSpace& S, double r) {
  return scale_components(S, r, all_indices(S));
}

// ---------------------------------------------------------------------------
// Points of `within` whose open eps-ball meets no other point of `within`.

inline SubsetIndex isolated_points(const FiniteMetricSpace& S, double eps,
                                   const SubsetIndex& within) {
  require_subset(S, within, "isolated_points input");
  SubsetIndex out;
  for (std::size_t a : within) {
    bool alone = true;
    for (std::size_t b : within) {
      if (a == b) continue;
      if (S.dist(a, b) < eps) {
        alone = false;
        break;
      }
    }
    if (alone) out.push_back(a);
  }
  return out;
}

inline SubsetIndex isolated_points(const FiniteMetricSpace& S, double eps) {
  return isolated_points(S, eps, all_indices(S));
}

}  // namespace dsmetric
