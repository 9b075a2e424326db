#pragma once
// Shared deterministic generators and brute-force oracles for the test suite.
// Every randomized test uses a fixed seed so runs are reproducible.

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "dsmetric/metric_space.hpp"
#include "dsmetric/relation.hpp"

namespace testutil {

using dsmetric::DynamicalRelation;
using dsmetric::FiniteMetricSpace;
using dsmetric::IndexPair;
using dsmetric::SubsetIndex;

using Rng = std::mt19937_64;

// n distinct-ish points on a segment of the line.
inline FiniteMetricSpace rand_line_space(Rng& rng, std::size_t n, double lo = 0.0,
                                         double hi = 10.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> xs;
  while (xs.size() < n) {
    double x = U(rng);
    bool dup = false;
    for (double y : xs)
      if (std::fabs(x - y) < 1e-6) dup = true;
    if (!dup) xs.push_back(x);
  }
  return dsmetric::line_space(xs);
}

inline FiniteMetricSpace rand_euclidean_space(Rng& rng, std::size_t n, std::size_t dim,
                                              double lo = 0.0, double hi = 10.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<std::vector<double>> pts;
  while (pts.size() < n) {
    std::vector<double> p(dim);
    for (auto& c : p) c = U(rng);
    bool dup = false;
    for (const auto& q : pts) {
      double s = 0;
      for (std::size_t c = 0; c < dim; ++c) s += (p[c] - q[c]) * (p[c] - q[c]);
      if (s < 1e-12) dup = true;
    }
    if (!dup) pts.push_back(p);
  }
  return dsmetric::euclidean_space(pts);
}

inline SubsetIndex rand_subset(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  SubsetIndex out(all.begin(), all.begin() + static_cast<long>(k));
  std::sort(out.begin(), out.end());
  return out;
}

// Random valid relation: a permutation of a random carrier guarantees both
// projections coincide; extra pairs keep it set-valued.
inline DynamicalRelation rand_relation(Rng& rng, std::shared_ptr<const FiniteMetricSpace> space,
                                       std::size_t carrier_size, double extra_pair_prob = 0.3) {
  SubsetIndex car = rand_subset(rng, space->size(), carrier_size);
  std::vector<std::size_t> perm(car);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<IndexPair> pairs;
  for (std::size_t i = 0; i < car.size(); ++i) pairs.emplace_back(car[i], perm[i]);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (std::size_t a : car)
    for (std::size_t b : car)
      if (U(rng) < extra_pair_prob / static_cast<double>(car.size())) pairs.emplace_back(a, b);
  return dsmetric::make_relation(std::move(space), std::move(pairs));
}

// ---------------------------------------------------------------------------
// Independent brute-force oracles (deliberately written max/min-first, no
// witness bookkeeping, no shared code with the library implementations).

inline double oracle_hausdorff(const FiniteMetricSpace& S, const SubsetIndex& A,
                               const SubsetIndex& B) {
  double h = 0;
  for (std::size_t a : A) {
    double m = -1;
    for (std::size_t b : B) m = (m < 0 || S.dist(a, b) < m) ? S.dist(a, b) : m;
    h = std::max(h, m);
  }
  for (std::size_t b : B) {
    double m = -1;
    for (std::size_t a : A) m = (m < 0 || S.dist(a, b) < m) ? S.dist(a, b) : m;
    h = std::max(h, m);
  }
  return h;
}

inline double oracle_ds(const FiniteMetricSpace& S, const std::vector<IndexPair>& F,
                        const std::vector<IndexPair>& G) {
  auto dd = [&S](const IndexPair& p, const IndexPair& q) {
    return std::max(S.dist(p.first, q.first), S.dist(p.second, q.second));
  };
  double h = 0;
  for (const auto& p : F) {
    double m = -1;
    for (const auto& q : G) m = (m < 0 || dd(p, q) < m) ? dd(p, q) : m;
    h = std::max(h, m);
  }
  for (const auto& q : G) {
    double m = -1;
    for (const auto& p : F) m = (m < 0 || dd(p, q) < m) ? dd(p, q) : m;
    h = std::max(h, m);
  }
  return h;
}

}  // namespace testutil
