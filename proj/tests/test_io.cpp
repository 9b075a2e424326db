#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <functional>
#include <string>

#include "dsmetric/dsmetric.hpp"

using namespace dsmetric;

namespace {

std::shared_ptr<const FiniteMetricSpace> sp(FiniteMetricSpace s) {
  return std::make_shared<const FiniteMetricSpace>(std::move(s));
}

void expect_schema_error(const std::function<void()>& run) {
  try {
    run();
    FAIL("expected a schema error");
  } catch (const DsError& e) {
    REQUIRE(e.code == Err::ParseError);
    REQUIRE(std::string(e.what()).find("SchemaError") != std::string::npos);
  }
}

// value -> text -> value, the way files and the CLI see it
json through_text(const json& j) { return json::parse(render_json(j)); }

}  // namespace

TEST_CASE("spaces of every kind survive the round trip", "[io]") {
  SECTION("matrix") {
    FiniteMetricSpace S = matrix_space({{0.0, 1.5}, {1.5, 0.0}});
    S.labels = {"p", "q"};
    FiniteMetricSpace back = space_from_json(through_text(space_to_json(S)));
    REQUIRE(back.kind == SpaceKind::Matrix);
    REQUIRE(back.mat == S.mat);
    REQUIRE(back.labels == S.labels);
  }
  SECTION("euclidean") {
    FiniteMetricSpace S = euclidean_space({{0.25, -1.0}, {3.125, 2.2}});
    FiniteMetricSpace back = space_from_json(through_text(space_to_json(S)));
    REQUIRE(back.kind == SpaceKind::Euclidean);
    REQUIRE(back.pts == S.pts);  // doubles round-trip exactly through text
  }
  SECTION("circle and torus") {
    FiniteMetricSpace C = circle_space({0.0, kTwoPi / 3.0});
    REQUIRE(space_from_json(through_text(space_to_json(C))).kind == SpaceKind::Circle);
    REQUIRE(space_from_json(through_text(space_to_json(C))).pts == C.pts);
    FiniteMetricSpace T = torus_space({{0.1, 0.9}, {0.5, 0.5}});
    REQUIRE(space_from_json(through_text(space_to_json(T))).kind == SpaceKind::Torus);
    REQUIRE(space_from_json(through_text(space_to_json(T))).pts == T.pts);
  }
}

TEST_CASE("relations round-trip and re-validate", "[io]") {
  auto s = sp(line_space({0.0, 1.0, 2.5}));
  DynamicalRelation f = make_relation(s, {{0, 1}, {1, 2}, {2, 0}});
  DynamicalRelation back = relation_from_json(through_text(relation_to_json(f)));
  REQUIRE(back.pairs == f.pairs);
  REQUIRE(same_space(back.S(), f.S()));
  REQUIRE(ds_distance(back, DynamicalRelation{back.space, f.pairs}).value == 0.0);
}

TEST_CASE("trees round-trip with their declared structure", "[io]") {
  CantorTree T = dyadic_cantor(2);
  CantorTree back = tree_from_json(through_text(tree_to_json(T)));
  REQUIRE(back.levels.size() == T.levels.size());
  for (std::size_t li = 0; li < T.levels.size(); ++li) {
    REQUIRE(back.levels[li].size() == T.levels[li].size());
    for (std::size_t ci = 0; ci < T.levels[li].size(); ++ci) {
      REQUIRE(back.levels[li][ci].declared_diam == T.levels[li][ci].declared_diam);
      REQUIRE(back.levels[li][ci].leaves == T.levels[li][ci].leaves);
      REQUIRE(back.levels[li][ci].rep == T.levels[li][ci].rep);
      REQUIRE(back.levels[li][ci].children == T.levels[li][ci].children);
    }
  }
  REQUIRE(validate_cantor(back).ok());
}

TEST_CASE("sampled maps round-trip with both modulus forms", "[io]") {
  std::vector<double> angles;
  for (int i = 0; i < 10; ++i) angles.push_back(kTwoPi * i / 10.0);
  auto grid = sp(circle_space(angles));
  std::vector<std::size_t> table;
  for (std::size_t i = 0; i < 10; ++i) table.push_back((i + 3) % 10);

  SampledManifoldMap lip = make_sampled_map(grid, table, lipschitz_modulus(1.0));
  SampledManifoldMap back = sampled_map_from_json(through_text(sampled_map_to_json(lip)));
  REQUIRE(back.table == table);
  REQUIRE(back.modulus.lipschitz == 1.0);
  REQUIRE(back.modulus.table.empty());

  SampledManifoldMap tab =
      make_sampled_map(grid, table, table_modulus({{0.7, 0.69}, {2.0, 1.0}}));
  SampledManifoldMap tback = sampled_map_from_json(through_text(sampled_map_to_json(tab)));
  REQUIRE(tback.modulus.table == tab.modulus.table);
}

TEST_CASE("schema violations are reported as such", "[io]") {
  json ok_space = space_to_json(line_space({0.0, 1.0}));

  SECTION("headers") {
    json j = ok_space;
    j.erase("schema");
    expect_schema_error([&] { space_from_json(j); });
    j = ok_space;
    j["schema"] = "dsmetric/999";
    expect_schema_error([&] { space_from_json(j); });
    j = ok_space;
    j["type"] = "relation";
    expect_schema_error([&] { space_from_json(j); });
    expect_schema_error([&] { space_from_json(json::array()); });
  }

  SECTION("space bodies") {
    json j = ok_space;
    j["kind"] = "hyperbolic";
    expect_schema_error([&] { space_from_json(j); });
    j = ok_space;
    j["points"] = json::array({json::array({0.0}), json::array({0.0, 1.0})});
    expect_schema_error([&] { space_from_json(j); });  // ragged rows
    j = ok_space;
    j["kind"] = "matrix";
    j.erase("points");
    j["matrix"] = json::array({json::array({0.0, 1.0})});
    expect_schema_error([&] { space_from_json(j); });  // not square
    j = ok_space;
    j["labels"] = json::array({"only one"});
    expect_schema_error([&] { space_from_json(j); });
    j = ok_space;
    j["kind"] = "torus";
    expect_schema_error([&] { space_from_json(j); });  // torus rows need two entries
  }

  SECTION("relations and pairs") {
    auto s = sp(line_space({0.0, 1.0}));
    json j = relation_to_json(identity_relation(s, {0, 1}));
    j["pairs"] = json::array({json::array({0})});
    expect_schema_error([&] { relation_from_json(j); });
    j["pairs"] = json::array({json::array({0, -1})});
    expect_schema_error([&] { relation_from_json(j); });
    j["pairs"] = 7;
    expect_schema_error([&] { relation_from_json(j); });
  }

  SECTION("trees") {
    json j = tree_to_json(dyadic_cantor(1));
    j["levels"][0][0]["children"] = json::array({0, 99});
    expect_schema_error([&] { tree_from_json(j); });
    j = tree_to_json(dyadic_cantor(1));
    j["levels"][1][0]["leaves"] = json::array({57});
    expect_schema_error([&] { tree_from_json(j); });
  }

  SECTION("moduli") {
    json j;
    j["neither"] = 1.0;
    expect_schema_error([&] { modulus_from_json(j, "m"); });
  }
}

TEST_CASE("domain validity is distinct from schema validity", "[io]") {
  // an asymmetric matrix is schema-valid; the metric validator owns the report
  json j;
  j["schema"] = kSchemaTag;
  j["type"] = "space";
  j["kind"] = "matrix";
  j["matrix"] = json::array({json::array({0.0, 1.0}), json::array({2.0, 0.0})});
  FiniteMetricSpace S = space_from_json(j);
  MetricReport rep = validate_metric(S);
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.issues.front().code == Err::AsymmetricMatrix);

  // non-surjective pairs are caught by relation validation during the load
  json r;
  r["schema"] = kSchemaTag;
  r["type"] = "relation";
  r["space"] = space_to_json(line_space({0.0, 1.0}));
  r["pairs"] = json::array({json::array({0, 1})});
  try {
    relation_from_json(r);
    FAIL("expected a throw");
  } catch (const DsError& e) {
    REQUIRE((e.code == Err::NotSurjectiveForward || e.code == Err::NotSurjectiveBackward));
  }
}

TEST_CASE("files save and load byte-stably", "[io]") {
  const std::string path = "/tmp/dsmetric_io_roundtrip.json";
  json j = relation_to_json(identity_relation(sp(line_space({0.0, 0.125, 7.75})), {0, 1, 2}));
  save_json(j, path);
  REQUIRE(load_json(path) == j);
  save_json(j, path);
  json again = load_json(path);
  REQUIRE(render_json(again) == render_json(j));
  std::remove(path.c_str());

  try {
    load_json("/tmp/definitely_missing_dsmetric_file.json");
    FAIL("expected a throw");
  } catch (const DsError& e) {
    REQUIRE(e.code == Err::IoError);
  }
  expect_schema_error([] {
    const std::string bad = "/tmp/dsmetric_io_garbled.json";
    std::ofstream(bad) << "{broken";
    json loaded = load_json(bad);
    (void)loaded;
  });
}

TEST_CASE("result payloads carry the witnesses they were built from", "[io]") {
  auto s = sp(line_space({0.0, 1.0}));
  auto f = identity_relation(s, {0});
  auto g = identity_relation(s, {1});
  DsWitness w = ds_distance(f, g);
  json wj = ds_witness_to_json(w);
  REQUIRE(wj["value"].get<double>() == 1.0);
  IndexPair from{wj["from"][0].get<std::size_t>(), wj["from"][1].get<std::size_t>()};
  IndexPair to{wj["to"][0].get<std::size_t>(), wj["to"][1].get<std::size_t>()};
  REQUIRE(d2(*s, from, to) == 1.0);

  DghResult r = dgh(f, g);
  json rj = dgh_to_json(r);
  REQUIRE(rj["lower"].get<double>() == r.lower);
  REQUIRE(rj["upper"].get<double>() == r.upper);
  REQUIRE(rj["exact"].get<bool>() == r.exact);
  REQUIRE(pairs_from_json(rj["corr"], "corr") == r.corr);

  AmResult a = am_distance(f, g);
  json aj = am_to_json(a);
  REQUIRE(aj["value"].get<double>() == a.value);
  REQUIRE(pairs_from_json(aj["phi"], "phi") == a.phi);
}
