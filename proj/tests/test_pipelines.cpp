#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "dsmetric/pipelines.hpp"
#include "helpers.hpp"

using namespace dsmetric;

namespace {

std::shared_ptr<const FiniteMetricSpace> sp(FiniteMetricSpace s) {
  return std::make_shared<const FiniteMetricSpace>(std::move(s));
}

std::shared_ptr<const FiniteMetricSpace> circle_grid(std::size_t n) {
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i)
    angles[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  return sp(circle_space(angles));
}

// root of x^n + x - 1 on [0,1]; 1 minus this root is the limit distance
double power_gap_oracle(std::size_t n) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double v = std::pow(mid, static_cast<double>(n)) + mid - 1.0;
    (v >= 0.0 ? hi : lo) = mid;
  }
  return 1.0 - 0.5 * (lo + hi);
}

void expect_err(Err want, const std::function<void()>& run) {
  try {
    run();
    FAIL("expected a throw");
  } catch (const DsError& e) {
    REQUIRE(e.code == want);
  }
}

}  // namespace

TEST_CASE("modulus widths answer closeness queries", "[pipelines]") {
  Modulus lip = lipschitz_modulus(2.0);
  REQUIRE(delta_for(lip, 0.5) == 0.25);
  REQUIRE(delta_for(lip, 1.0) == 0.5);

  Modulus tab = table_modulus({{0.5, 0.1}, {0.2, 0.03}});
  REQUIRE(delta_for(tab, 0.5) == 0.1);
  REQUIRE(delta_for(tab, 0.25) == 0.03);
  REQUIRE(delta_for(tab, 0.2) == 0.03);
  expect_err(Err::BadShape, [&] { delta_for(tab, 0.1); });
  expect_err(Err::BadShape, [] { lipschitz_modulus(0.0); });
  expect_err(Err::BadShape, [] { table_modulus({}); });
  expect_err(Err::BadShape, [] { table_modulus({{0.5, -0.1}}); });
}

TEST_CASE("declared moduli are checked against every sampled pair", "[pipelines]") {
  auto line = sp(line_space({0.0, 0.1, 1.0}));
  std::vector<std::size_t> stretch = {2, 1, 0};  // sends the 0.1-gap to a 0.9-gap

  SampledManifoldMap ok = make_sampled_map(line, stretch, lipschitz_modulus(10.0));
  REQUIRE(ok.table == stretch);
  REQUIRE(ok.relation().pairs.size() == 3);

  expect_err(Err::ModulusInconsistent,
             [&] { make_sampled_map(line, stretch, lipschitz_modulus(1.0)); });
  expect_err(Err::ModulusInconsistent,
             [&] { make_sampled_map(line, stretch, table_modulus({{0.5, 0.2}})); });
  // a table row the samples never probe stays consistent
  REQUIRE(make_sampled_map(line, stretch, table_modulus({{0.5, 0.05}})).grid == line);

  expect_err(Err::BadShape, [&] { make_sampled_map(line, {0, 1}, lipschitz_modulus(1.0)); });
  expect_err(Err::IndexOutOfRange,
             [&] { make_sampled_map(line, {0, 1, 7}, lipschitz_modulus(1.0)); });
  auto m = sp(matrix_space({{0, 1}, {1, 0}}));
  expect_err(Err::NotEuclideanAmbient,
             [&] { make_sampled_map(m, {0, 1}, lipschitz_modulus(1.0)); });
}

TEST_CASE("grid resolution is the largest nearest-neighbour gap", "[pipelines]") {
  REQUIRE(grid_resolution(line_space({0.0, 0.1, 1.0})) == 0.9);
  REQUIRE(grid_resolution(*circle_grid(100)) ==
          Catch::Approx(kTwoPi / 100.0).margin(1e-12));
  expect_err(Err::BadShape, [] { grid_resolution(line_space({0.0})); });
}

TEST_CASE("identity samples are certified at any workable radius", "[pipelines]") {
  auto grid = circle_grid(20);
  std::vector<std::size_t> table(20);
  for (std::size_t i = 0; i < 20; ++i) table[i] = i;
  SampledManifoldMap m = make_sampled_map(grid, table, lipschitz_modulus(1.0));

  CantorApproxCertificate cert = manifold_cantor_approx(m, 0.8);
  REQUIRE(cert.grid_size == 20);
  REQUIRE(cert.cantor_points > 0);
  REQUIRE(cert.eps == 0.8);
  REQUIRE(cert.density_defect < 0.8);
  REQUIRE(cert.closeness < 0.8);

  // the carrier is disjoint from the grid: a genuinely new point set
  SubsetIndex car = carrier(cert.g);
  for (std::size_t c : car) REQUIRE(c >= cert.grid_size);

  // both certificate numbers are reproduced by direct recomputation
  SubsetIndex grid_idx(cert.grid_size);
  for (std::size_t i = 0; i < grid_idx.size(); ++i) grid_idx[i] = i;
  REQUIRE(hausdorff_distance(*cert.g.space, car, grid_idx).value == cert.density_defect);
  DynamicalRelation f_again{cert.g.space, m.relation().pairs};
  REQUIRE(ds_distance(cert.g, f_again).value == cert.closeness);
}

TEST_CASE("a rigid circle rotation is approximated by a Cantor system", "[pipelines]") {
  const std::size_t n = 100;
  auto grid = circle_grid(n);
  std::vector<std::size_t> table(n);
  for (std::size_t i = 0; i < n; ++i) table[i] = (i + 20) % n;  // rotation by 2*pi/5
  SampledManifoldMap m = make_sampled_map(grid, table, lipschitz_modulus(1.0));

  for (double eps : {0.5, 0.3}) {
    CantorApproxCertificate cert = manifold_cantor_approx(m, eps);
    REQUIRE(cert.density_defect < eps);
    REQUIRE(cert.closeness < eps);
    REQUIRE(cert.delta <= 0.49 * eps);
    REQUIRE(cert.cantor_points >= 2);
  }

  SECTION("deeper cylinders and a splitting factor stay certified") {
    CantorApproxCertificate cert = manifold_cantor_approx(m, 0.5, 1, 1);
    REQUIRE(cert.density_defect < 0.5);
    REQUIRE(cert.closeness < 0.5);
    // each letter-1 cylinder carries 2 bit patterns, and windows have depth
    REQUIRE(cert.cantor_points >= 2 * 100 / 20);
  }
}

TEST_CASE("the torus cat map sample is certified", "[pipelines]") {
  const std::size_t side = 32;
  std::vector<std::vector<double>> pts;
  std::vector<std::size_t> table;
  pts.reserve(side * side);
  table.reserve(side * side);
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) {
      pts.push_back({static_cast<double>(i) / side, static_cast<double>(j) / side});
      table.push_back(((2 * i + j) % side) * side + (i + j) % side);
    }
  auto grid = sp(torus_space(std::move(pts)));
  SampledManifoldMap m = make_sampled_map(grid, table, lipschitz_modulus(2.62));

  CantorApproxCertificate cert = manifold_cantor_approx(m, 0.5);
  REQUIRE(cert.grid_size == side * side);
  REQUIRE(cert.density_defect < 0.5);
  REQUIRE(cert.closeness < 0.5);
}

TEST_CASE("too coarse grids are rejected", "[pipelines]") {
  auto line = sp(line_space({0.0, 0.1, 1.0}));
  SampledManifoldMap m = make_sampled_map(line, {0, 1, 2}, lipschitz_modulus(1.0));
  expect_err(Err::GridTooCoarse, [&] { manifold_cantor_approx(m, 0.5); });
}

TEST_CASE("power map graphs approach the corner relation", "[pipelines]") {
  const std::vector<std::size_t> ns = {1, 4, 20, 100, 200};
  auto rows = power_map_regression(ns);
  REQUIRE(rows.size() == ns.size());

  const double res = 1.0 / 1000.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].n == ns[i]);
    REQUIRE(rows[i].value == Catch::Approx(power_gap_oracle(ns[i])).margin(2 * res));
  }
  REQUIRE(rows[0].value == Catch::Approx(0.5).margin(2 * res));
  REQUIRE(rows[1].value == Catch::Approx(0.2755).margin(2 * res + 5e-4));
  for (std::size_t i = 1; i < rows.size(); ++i) REQUIRE(rows[i].value < rows[i - 1].value);
  REQUIRE(rows.back().value < 0.05);
  REQUIRE(rows.back().value < rows.front().value / 5.0);

  expect_err(Err::BadShape, [] { power_map_regression({}); });
  expect_err(Err::BadShape, [] { power_map_regression({1, 0}); });
  expect_err(Err::BadShape, [] { power_map_regression({1}, 1); });
}

TEST_CASE("genericity diagnostics report fibers, components, isolation", "[pipelines]") {
  SECTION("complete relation on two points") {
    auto s = sp(line_space({0.0, 1.0}));
    auto f = make_relation(s, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    GenericityReport rep = genericity_report(f, {0.5, 1.0, 1.5}, {0.5, 1.0});
    REQUIRE(rep.fiber_diam_fwd == 1.0);
    REQUIRE(rep.fiber_diam_bwd == 1.0);
    REQUIRE(rep.small_fibers_at == std::vector<bool>{false, false, true});
    REQUIRE(rep.isolated_at[0] == std::vector<std::size_t>{0, 1});
    REQUIRE(rep.isolated_at[2].empty());
    REQUIRE(rep.component_mesh == std::vector<double>{0.0, 1.0});
    REQUIRE(rep.component_count == std::vector<std::size_t>{2, 1});
  }

  SECTION("bijections have zero fibers at every scale") {
    auto s = sp(line_space({0.0, 0.3, 0.9}));
    auto f = make_relation(s, {{0, 1}, {1, 2}, {2, 0}});
    GenericityReport rep = genericity_report(f, {1e-6, 1.0}, {});
    REQUIRE(rep.fiber_diam_fwd == 0.0);
    REQUIRE(rep.fiber_diam_bwd == 0.0);
    REQUIRE(rep.small_fibers_at == std::vector<bool>{true, true});
  }

  SECTION("carrier components and isolated points at the stated scales") {
    auto s = sp(line_space({0.0, 0.1, 1.0}));
    auto f = identity_relation(s, {0, 1, 2});
    GenericityReport rep = genericity_report(f, {0.2}, {0.2});
    REQUIRE(rep.component_mesh == std::vector<double>{0.1});
    REQUIRE(rep.component_count == std::vector<std::size_t>{2});
    REQUIRE(rep.isolated_at[0] == std::vector<std::size_t>{2});

    auto comps = scale_components(*s, {0, 1, 2}, 1.0);
    REQUIRE(comps.size() == 1);
    REQUIRE(comps[0] == std::vector<std::size_t>{0, 1, 2});
    REQUIRE(isolated_points(*s, {0, 1, 2}, 0.05).size() == 3);
    expect_err(Err::EmptyNet, [&] { scale_components(*s, {}, 1.0); });
  }
}
