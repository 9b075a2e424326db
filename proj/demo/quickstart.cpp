// A short tour of the library: build two finite dynamical systems, measure
// how far apart they are in several senses, then run a certification
// pipeline on a sampled circle rotation.

#include <iostream>

#include "dsmetric/dsmetric.hpp"

using namespace dsmetric;

int main() {
  // Two systems on a five-point segment: a "staircase" with three fixed
  // points and a small perturbation of it.
  auto S = std::make_shared<const FiniteMetricSpace>(
      line_space({0.0, 0.25, 0.5, 0.75, 1.0}));
  DynamicalRelation f =
      make_relation(S, {{0, 0}, {1, 0}, {1, 1}, {2, 2}, {3, 3}, {3, 4}, {4, 4}});
  DynamicalRelation g =
      make_relation(S, {{0, 0}, {1, 0}, {2, 1}, {2, 2}, {3, 3}, {3, 4}, {4, 4}});

  // Hausdorff distance between the two graphs under the max product metric.
  DsWitness w = ds_distance(f, g);
  std::cout << "graph distance D(f, g)        = " << w.value << "\n";
  std::cout << "  attained moving pair (" << w.from.first << "," << w.from.second
            << ") to (" << w.to.first << "," << w.to.second << ")\n";

  // Bracket on the distance between isometry classes: a certified lower
  // bound from correspondence distortion and an upper bound realized by an
  // explicit gluing.
  DghResult q = dgh(f, g);
  std::cout << "isometry-class bracket        = [" << q.lower << ", " << q.upper
            << "]" << (q.exact ? " (tight)" : "") << "\n";

  // The same comparison for f against its own inverse: the graphs are
  // isometric (reflect every pair), yet no carrier isometry conjugates the
  // dynamics, so the class distance stays positive.
  DynamicalRelation fi = inverse(f);
  std::cout << "graphs of f and f^-1 isometric: "
            << (graph_isometry_check(f, fi).found ? "yes" : "no") << "\n";
  std::cout << "f conjugate to f^-1           : "
            << (isometric_conjugacy_check(f, fi).found ? "yes" : "no") << "\n";

  // Almost-conjugacy distance (function-like systems only): near-isometries
  // in both directions that almost intertwine the dynamics.  The identity
  // and the end-for-end flip of the segment stay well apart.
  DynamicalRelation id5 = identity_relation(S, {0, 1, 2, 3, 4});
  DynamicalRelation flip =
      make_relation(S, {{0, 4}, {1, 3}, {2, 2}, {3, 1}, {4, 0}});
  AmResult am = am_distance(id5, flip);
  std::cout << "almost-conjugacy distance     = " << am.value
            << (am.exact ? " (exhaustive)" : " (upper bound)") << "\n";

  // Pipeline: a sampled circle rotation is approximated by a finite net,
  // lifted to a shift on cylinder points, and certified against the sample.
  std::vector<double> angles;
  std::vector<std::size_t> table;
  for (std::size_t i = 0; i < 100; ++i) {
    angles.push_back(kTwoPi * static_cast<double>(i) / 100.0);
    table.push_back((i + 20) % 100);
  }
  SampledManifoldMap rot = make_sampled_map(
      std::make_shared<const FiniteMetricSpace>(circle_space(angles)), table,
      lipschitz_modulus(1.0));
  CantorApproxCertificate cert = manifold_cantor_approx(rot, 0.5);
  std::cout << "circle rotation at eps = 0.5  : " << cert.cantor_points
            << " cylinder points, density defect " << cert.density_defect
            << ", closeness " << cert.closeness << "\n";

  return 0;
}
