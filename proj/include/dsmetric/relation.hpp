#pragma once
// Surjective relations on a finite metric space ("finite dynamical systems"):
// validation, inverse, images, classification, the graph metric (max of the
// two coordinate distances), the Hausdorff system distance with witnesses,
// sup distance between functions, fiber diameters, composition.

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "dsmetric/core.hpp"
#include "dsmetric/metric_space.hpp"

namespace dsmetric {

using IndexPair = std::pair<std::size_t, std::size_t>;

struct DynamicalRelation {
  std::shared_ptr<const FiniteMetricSpace> space;
  std::vector<IndexPair> pairs;  // sorted lexicographically, unique

  const FiniteMetricSpace& S() const { return *space; }
};

struct RelationIssue {
  Err code;
  std::vector<std::size_t> points;
  std::string msg;
};

struct RelationReport {
  std::vector<RelationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const {
    std::string s;
    for (const auto& is : issues) {
      s += err_name(is.code);
      s += " " + is.msg;
      for (std::size_t p : is.points) s += " " + std::to_string(p);
      s += "\n";
    }
    return s;
  }
};

inline SubsetIndex relation_carrier(const std::vector<IndexPair>& pairs) {
  std::set<std::size_t> c;
  for (const auto& p : pairs) {
    c.insert(p.first);
    c.insert(p.second);
  }
  return SubsetIndex(c.begin(), c.end());
}

inline SubsetIndex carrier(const DynamicalRelation& f) { return relation_carrier(f.pairs); }

// Both projections of the pair set must coincide: every carrier point needs
// an outgoing and an incoming pair.
inline RelationReport validate_relation_pairs(const std::vector<IndexPair>& pairs,
                                              std::size_t space_size) {
  RelationReport rep;
  if (pairs.empty()) {
    rep.issues.push_back({Err::BadShape, {}, "relation has no pairs"});
    return rep;
  }
  std::vector<std::size_t> oob;
  for (const auto& p : pairs) {
    if (p.first >= space_size) oob.push_back(p.first);
    if (p.second >= space_size) oob.push_back(p.second);
  }
  if (!oob.empty()) {
    rep.issues.push_back({Err::IndexOutOfRange, oob, "pair indices beyond space size"});
    return rep;
  }
  std::set<std::size_t> dom, ran;
  for (const auto& p : pairs) {
    dom.insert(p.first);
    ran.insert(p.second);
  }
  std::vector<std::size_t> no_out, no_in;
  for (std::size_t x : ran)
    if (!dom.count(x)) no_out.push_back(x);
  for (std::size_t x : dom)
    if (!ran.count(x)) no_in.push_back(x);
  if (!no_out.empty())
    rep.issues.push_back({Err::NotSurjectiveForward, no_out, "carrier points with no outgoing pair"});
  if (!no_in.empty())
    rep.issues.push_back({Err::NotSurjectiveBackward, no_in, "carrier points with no incoming pair"});
  return rep;
}

inline DynamicalRelation make_relation(std::shared_ptr<const FiniteMetricSpace> space,
                                       std::vector<IndexPair> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  RelationReport rep = validate_relation_pairs(pairs, space->size());
  if (!rep.ok()) fail(rep.issues.front().code, "relation validation failed:\n" + rep.to_string());
  return DynamicalRelation{std::move(space), std::move(pairs)};
}

inline DynamicalRelation inverse(const DynamicalRelation& f) {
  std::vector<IndexPair> inv;
  inv.reserve(f.pairs.size());
  for (const auto& p : f.pairs) inv.emplace_back(p.second, p.first);
  std::sort(inv.begin(), inv.end());
  return DynamicalRelation{f.space, std::move(inv)};
}

inline std::vector<std::size_t> image(const DynamicalRelation& f, std::size_t x) {
  std::vector<std::size_t> out;
  for (const auto& p : f.pairs)
    if (p.first == x) out.push_back(p.second);
  if (out.empty()) fail(Err::PointNotInCarrier, "point " + std::to_string(x) + " has no image");
  return out;  // sorted because pairs are sorted
}

inline std::vector<std::size_t> preimage(const DynamicalRelation& f, std::size_t y) {
  std::vector<std::size_t> out;
  for (const auto& p : f.pairs)
    if (p.second == y) out.push_back(p.first);
  if (out.empty()) fail(Err::PointNotInCarrier, "point " + std::to_string(y) + " has no preimage");
  std::sort(out.begin(), out.end());
  return out;
}

enum class RelationClass { SetValued, ContinuousMapAnalog, BijectionAnalog };

inline const char* class_name(RelationClass c) {
  switch (c) {
    case RelationClass::SetValued: return "set-valued";
    case RelationClass::ContinuousMapAnalog: return "map";
    case RelationClass::BijectionAnalog: return "bijection";
  }
  return "?";
}

inline RelationClass classify(const DynamicalRelation& f) {
  std::map<std::size_t, std::size_t> out_deg, in_deg;
  for (const auto& p : f.pairs) {
    out_deg[p.first]++;
    in_deg[p.second]++;
  }
  bool fun = true, inj = true;
  for (const auto& [x, d] : out_deg)
    if (d > 1) fun = false;
  for (const auto& [y, d] : in_deg)
    if (d > 1) inj = false;
  if (fun && inj) return RelationClass::BijectionAnalog;
  if (fun) return RelationClass::ContinuousMapAnalog;
  return RelationClass::SetValued;
}

// For function-like relations: f(x) as a single index.
inline std::size_t apply_function(const DynamicalRelation& f, std::size_t x) {
  auto im = image(f, x);
  if (im.size() != 1) fail(Err::NotAFunction, "point " + std::to_string(x) + " has several images");
  return im.front();
}

// ---------------------------------------------------------------------------
// Graph metric: pairs live in the square of the space with the max metric.

inline double d2(const FiniteMetricSpace& S, const IndexPair& p, const IndexPair& q) {
  return std::max(S.dist(p.first, q.first), S.dist(p.second, q.second));
}

inline bool same_space(const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
  if (&A == &B) return true;
  if (A.kind != B.kind || A.size() != B.size()) return false;
  if (A.kind == SpaceKind::Matrix) return A.mat == B.mat;
  return A.pts == B.pts;
}

// ---------------------------------------------------------------------------
// System distance: Hausdorff distance between the two pair sets under the
// graph metric.  Exact max-min with attained witnesses; ties resolve to the
// lexicographically smallest pair (scan order over sorted pairs).

struct DsWitness {
  double value = 0;
  IndexPair from{0, 0}, to{0, 0};
  int direction = 0;  // 0: the f-side attains (from in f, to in g); 1: the g-side
  double dir_fg = 0, dir_gf = 0;
};

inline double directed_ds(const FiniteMetricSpace& S, const std::vector<IndexPair>& F,
                          const std::vector<IndexPair>& G, IndexPair* from, IndexPair* to) {
  double worst = -1.0;
  for (const auto& p : F) {
    double best = -1.0;
    IndexPair bq = G.front();
    for (const auto& q : G) {
      double d = d2(S, p, q);
      if (best < 0.0 || d < best) {
        best = d;
        bq = q;
      }
    }
    if (best > worst) {
      worst = best;
      if (from) *from = p;
      if (to) *to = bq;
    }
  }
  return worst;
}

inline DsWitness ds_distance(const DynamicalRelation& f, const DynamicalRelation& g) {
  if (!same_space(f.S(), g.S()))
    fail(Err::SpaceMismatch, "system distance needs both relations on one space");
  if (f.pairs.empty() || g.pairs.empty()) fail(Err::BadShape, "empty relation");
  DsWitness w;
  IndexPair ffrom, fto, gfrom, gto;
  w.dir_fg = directed_ds(f.S(), f.pairs, g.pairs, &ffrom, &fto);
  w.dir_gf = directed_ds(f.S(), g.pairs, f.pairs, &gfrom, &gto);
  if (w.dir_fg >= w.dir_gf) {
    w.value = w.dir_fg;
    w.direction = 0;
    w.from = ffrom;
    w.to = fto;
  } else {
    w.value = w.dir_gf;
    w.direction = 1;
    w.from = gfrom;
    w.to = gto;
  }
  return w;
}

// Sup distance between two function-like relations over one carrier.
inline double c0_distance(const DynamicalRelation& f, const DynamicalRelation& g) {
  if (!same_space(f.S(), g.S())) fail(Err::SpaceMismatch, "c0 distance needs one space");
  if (classify(f) == RelationClass::SetValued || classify(g) == RelationClass::SetValued)
    fail(Err::NotAFunction, "c0 distance needs function-like relations");
  if (carrier(f) != carrier(g)) fail(Err::CarrierMismatch, "c0 distance needs identical carriers");
  double m = 0.0;
  for (std::size_t x : carrier(f))
    m = std::max(m, f.S().dist(apply_function(f, x), apply_function(g, x)));
  return m;
}

// Largest image diameter over the carrier.
inline double max_fiber_diameter(const DynamicalRelation& f) {
  double m = 0.0;
  std::map<std::size_t, std::vector<std::size_t>> im;
  for (const auto& p : f.pairs) im[p.first].push_back(p.second);
  for (const auto& [x, ys] : im)
    for (std::size_t a = 0; a < ys.size(); ++a)
      for (std::size_t b = a + 1; b < ys.size(); ++b) m = std::max(m, f.S().dist(ys[a], ys[b]));
  return m;
}

// Composition as a relation join.  The result can lose surjectivity, so it is
// returned unvalidated together with the report.
struct ComposeResult {
  std::vector<IndexPair> pairs;
  bool surjective = false;
  RelationReport report;
};

inline ComposeResult relation_compose(const DynamicalRelation& f, const DynamicalRelation& g) {
  if (!same_space(f.S(), g.S())) fail(Err::SpaceMismatch, "composition needs one space");
  std::set<IndexPair> out;
  std::map<std::size_t, std::vector<std::size_t>> gim;
  for (const auto& q : g.pairs) gim[q.first].push_back(q.second);
  for (const auto& p : f.pairs) {
    auto it = gim.find(p.second);
    if (it == gim.end()) continue;
    for (std::size_t z : it->second) out.insert({p.first, z});
  }
  ComposeResult r;
  r.pairs.assign(out.begin(), out.end());
  r.report = validate_relation_pairs(r.pairs, f.S().size());
  r.surjective = r.report.ok();
  if (!r.surjective) {
    bool only_surj = true;
    for (const auto& is : r.report.issues)
      if (is.code != Err::NotSurjectiveForward && is.code != Err::NotSurjectiveBackward)
        only_surj = false;
    if (only_surj) {
      RelationIssue note{Err::CompositionNotSurjective, {},
                         "composition lost surjectivity; returned unvalidated for diagnostics"};
      r.report.issues.insert(r.report.issues.begin(), note);
    }
  }
  return r;
}

// Identity system on a subset.
inline DynamicalRelation identity_relation(std::shared_ptr<const FiniteMetricSpace> space,
                                           const SubsetIndex& pts) {
  std::vector<IndexPair> prs;
  prs.reserve(pts.size());
  for (std::size_t p : pts) prs.emplace_back(p, p);
  return make_relation(std::move(space), std::move(prs));
}

}  // namespace dsmetric
