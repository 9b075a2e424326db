#pragma once
// Finite-relation approximation: replace a sampled system by a relation on a
// farthest-point net of its carrier, with the system distance to the original
// certified by direct recomputation.

#include <set>
#include <utility>
#include <vector>

#include "dsmetric/core.hpp"
#include "dsmetric/metric_space.hpp"
#include "dsmetric/relation.hpp"

namespace dsmetric {

// A sampled system is just a validated relation whose pairs were drawn from a
// (possibly huge) system; nothing beyond relation validity is assumed.
using SampledSystem = DynamicalRelation;

struct ApproxResult {
  DynamicalRelation g;   // relation on the net, same ambient space
  SubsetIndex net;       // the chosen net inside the carrier
  double bound = 0;      // the guarantee: eps
  double realized = 0;   // recomputed system distance to the input, <= bound
};

// Net relation: (a, b) is kept iff some sample pair lands within eps of a in
// the first slot and of b in the second (closed balls).  Surjectivity of the
// result is automatic: every net point is within eps of itself.
inline ApproxResult finite_relation_approx(const SampledSystem& f, double eps) {
  if (!(eps > 0.0)) fail(Err::BadShape, "approximation radius must be positive");
  const FiniteMetricSpace& S = f.S();
  SubsetIndex car = carrier(f);
  SubsetIndex Q = epsilon_net(S, eps, car);
  std::sort(Q.begin(), Q.end());

  // candidate net points near each sample coordinate
  std::set<IndexPair> pairs;
  std::vector<std::size_t> near_x, near_y;
  for (const auto& p : f.pairs) {
    near_x.clear();
    near_y.clear();
    for (std::size_t q : Q) {
      if (S.dist(p.first, q) <= eps) near_x.push_back(q);
      if (S.dist(p.second, q) <= eps) near_y.push_back(q);
    }
    for (std::size_t a : near_x)
      for (std::size_t b : near_y) pairs.insert({a, b});
  }

  ApproxResult r;
  r.net = Q;
  r.bound = eps;
  r.g = make_relation(f.space, std::vector<IndexPair>(pairs.begin(), pairs.end()));
  r.realized = ds_distance(f, r.g).value;
  if (r.realized > eps)
    fail(Err::BadShape, "approximation certificate failed (internal): realized > eps");
  return r;
}

// Successive approximations at strictly decreasing radii.  Certified bounds
// are the radii themselves, so the bound sequence is strictly decreasing.
inline std::vector<ApproxResult> coarsen_chain(const SampledSystem& f,
                                               const std::vector<double>& eps_list) {
  if (eps_list.empty()) fail(Err::BadShape, "empty radius list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) fail(Err::BadShape, "radii must be positive");
    if (i && !(eps_list[i] < eps_list[i - 1]))
      fail(Err::BadShape, "radii must be strictly decreasing");
  }
  std::vector<ApproxResult> out;
  out.reserve(eps_list.size());
  for (double e : eps_list) out.push_back(finite_relation_approx(f, e));
  return out;
}

}  // namespace dsmetric
