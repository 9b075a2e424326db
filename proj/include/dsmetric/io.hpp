#pragma once
// JSON serialization under the versioned schema "dsmetric/1": metric spaces,
// relations, partition trees, sampled manifold maps, and the result payloads
// of the command-line tool.  Loaders check structure strictly enough to keep
// every later computation in-bounds and surface everything else through the
// domain validators, so reports about bad metrics mention metric axioms, not
// JSON shape.

#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dsmetric/am.hpp"
#include "dsmetric/cantor.hpp"
#include "dsmetric/core.hpp"
#include "dsmetric/discretize.hpp"
#include "dsmetric/iso_quotient.hpp"
#include "dsmetric/metric_space.hpp"
#include "dsmetric/pipelines.hpp"
#include "dsmetric/relation.hpp"
#include "dsmetric/sft.hpp"

namespace dsmetric {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "dsmetric/1";

[[noreturn]] inline void schema_error(const std::string& where) {
  fail(Err::ParseError, "SchemaError: " + where);
}

// ---------------------------------------------------------------------------
// guarded accessors

namespace detail_io {

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) schema_error(where + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(where + " is missing field \"" + key + "\"");
  return *it;
}

inline double as_num(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where + " must be a number");
  return j.get<double>();
}

inline std::size_t as_index(const json& j, const std::string& where) {
  // accept any integral value >= 0 regardless of how the writer stored it
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0)
    return static_cast<std::size_t>(j.get<long long>());
  schema_error(where + " must be a non-negative integer");
}

inline std::string as_str(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where + " must be a string");
  return j.get<std::string>();
}

inline const json& as_arr(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where + " must be an array");
  return j;
}

inline void check_header(const json& j, const char* type, const std::string& where) {
  if (as_str(need(j, "schema", where), where + ".schema") != kSchemaTag)
    schema_error(where + " has an unsupported schema tag");
  if (as_str(need(j, "type", where), where + ".type") != type)
    schema_error(where + " is not of type \"" + std::string(type) + "\"");
}

}  // namespace detail_io

// ---------------------------------------------------------------------------
// files

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::IoError, "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) schema_error("unparseable JSON in " + path);
  return j;
}

inline std::string render_json(const json& j) { return j.dump(2) + "\n"; }

inline void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Err::IoError, "cannot open " + path + " for writing");
  out << render_json(j);
  if (!out) fail(Err::IoError, "failed writing " + path);
}

// ---------------------------------------------------------------------------
// metric spaces

inline const char* kind_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::Matrix: return "matrix";
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Circle: return "circle";
    case SpaceKind::Torus: return "torus";
  }
  return "matrix";
}

inline SpaceKind kind_from(const std::string& s, const std::string& where) {
  if (s == "matrix") return SpaceKind::Matrix;
  if (s == "euclidean") return SpaceKind::Euclidean;
  if (s == "circle") return SpaceKind::Circle;
  if (s == "torus") return SpaceKind::Torus;
  schema_error(where + " has unknown space kind \"" + s + "\"");
}

inline json space_to_json(const FiniteMetricSpace& S) {
  json j;
  j["schema"] = kSchemaTag;
  j["type"] = "space";
  j["kind"] = kind_name(S.kind);
  if (S.kind == SpaceKind::Matrix) {
    j["matrix"] = S.mat;
  } else {
    j["points"] = S.pts;
  }
  if (!S.labels.empty()) j["labels"] = S.labels;
  return j;
}

inline FiniteMetricSpace space_from_json(const json& j, const std::string& where = "space") {
  using namespace detail_io;
  check_header(j, "space", where);
  FiniteMetricSpace S;
  S.kind = kind_from(as_str(need(j, "kind", where), where + ".kind"), where + ".kind");
  if (S.kind == SpaceKind::Matrix) {
    const json& m = as_arr(need(j, "matrix", where), where + ".matrix");
    const std::size_t n = m.size();
    S.mat.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const json& row = as_arr(m[i], where + ".matrix row");
      if (row.size() != n) schema_error(where + ".matrix must be square");
      std::vector<double> r;
      r.reserve(n);
      for (const json& v : row) r.push_back(as_num(v, where + ".matrix entry"));
      S.mat.push_back(std::move(r));
    }
  } else {
    const json& p = as_arr(need(j, "points", where), where + ".points");
    const std::size_t min_dim = S.kind == SpaceKind::Torus ? 2 : 1;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const json& row = as_arr(p[i], where + ".points row");
      if (i == 0) dim = row.size();
      if (row.size() != dim || dim < min_dim)
        schema_error(where + ".points rows must share one workable arity");
      std::vector<double> r;
      r.reserve(dim);
      for (const json& v : row) r.push_back(as_num(v, where + ".points entry"));
      S.pts.push_back(std::move(r));
    }
  }
  if (j.contains("labels")) {
    const json& L = as_arr(j.at("labels"), where + ".labels");
    if (L.size() != S.size()) schema_error(where + ".labels must name every point");
    for (const json& v : L) S.labels.push_back(as_str(v, where + ".labels entry"));
  }
  return S;
}

// A space slot is either an inline space object or {"file": "path"}.
inline FiniteMetricSpace space_from_slot(const json& j, const std::string& where) {
  if (j.is_object() && j.contains("file"))
    return space_from_json(load_json(detail_io::as_str(j.at("file"), where + ".file")), where);
  return space_from_json(j, where);
}

// ---------------------------------------------------------------------------
// relations

inline json pairs_to_json(const std::vector<IndexPair>& pairs) {
  json a = json::array();
  for (const auto& p : pairs) a.push_back(json::array({p.first, p.second}));
  return a;
}

inline std::vector<IndexPair> pairs_from_json(const json& j, const std::string& where) {
  using namespace detail_io;
  const json& a = as_arr(j, where);
  std::vector<IndexPair> out;
  out.reserve(a.size());
  for (const json& e : a) {
    const json& pr = as_arr(e, where + " entry");
    if (pr.size() != 2) schema_error(where + " entries must be index pairs");
    out.emplace_back(as_index(pr[0], where + " entry"), as_index(pr[1], where + " entry"));
  }
  return out;
}

inline json relation_to_json(const DynamicalRelation& f) {
  json j;
  j["schema"] = kSchemaTag;
  j["type"] = "relation";
  j["space"] = space_to_json(f.S());
  j["pairs"] = pairs_to_json(f.pairs);
  return j;
}

inline DynamicalRelation relation_from_json(const json& j, const std::string& where = "relation") {
  using namespace detail_io;
  check_header(j, "relation", where);
  auto space = std::make_shared<const FiniteMetricSpace>(
      space_from_slot(need(j, "space", where), where + ".space"));
  return make_relation(std::move(space), pairs_from_json(need(j, "pairs", where), where + ".pairs"));
}

// ---------------------------------------------------------------------------
// partition trees

inline json tree_to_json(const CantorTree& T) {
  json j;
  j["schema"] = kSchemaTag;
  j["type"] = "tree";
  j["ambient"] = space_to_json(T.S());
  json levels = json::array();
  for (const auto& lvl : T.levels) {
    json cells = json::array();
    for (const auto& c : lvl) {
      json cell;
      cell["diam"] = c.declared_diam;
      cell["leaves"] = c.leaves;
      cell["rep"] = c.rep;
      cell["children"] = c.children;
      cells.push_back(std::move(cell));
    }
    levels.push_back(std::move(cells));
  }
  j["levels"] = std::move(levels);
  return j;
}

inline CantorTree tree_from_json(const json& j, const std::string& where = "tree") {
  using namespace detail_io;
  check_header(j, "tree", where);
  CantorTree T;
  T.ambient = std::make_shared<const FiniteMetricSpace>(
      space_from_slot(need(j, "ambient", where), where + ".ambient"));
  const std::size_t n = T.ambient->size();
  const json& levels = as_arr(need(j, "levels", where), where + ".levels");
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const std::string lw = where + ".levels[" + std::to_string(li) + "]";
    const json& lvl = as_arr(levels[li], lw);
    std::vector<CantorCell> cells;
    for (const json& cj : lvl) {
      CantorCell c;
      c.declared_diam = as_num(need(cj, "diam", lw), lw + ".diam");
      for (const json& v : as_arr(need(cj, "leaves", lw), lw + ".leaves")) {
        std::size_t id = as_index(v, lw + ".leaves entry");
        if (id >= n) schema_error(lw + " references a point outside the ambient space");
        c.leaves.push_back(id);
      }
      c.rep = as_index(need(cj, "rep", lw), lw + ".rep");
      if (c.rep >= n) schema_error(lw + ".rep is outside the ambient space");
      for (const json& v : as_arr(need(cj, "children", lw), lw + ".children"))
        c.children.push_back(as_index(v, lw + ".children entry"));
      cells.push_back(std::move(c));
    }
    T.levels.push_back(std::move(cells));
  }
  // child indices must stay inside the next level so traversal is in-bounds
  for (std::size_t li = 0; li < T.levels.size(); ++li)
    for (const auto& c : T.levels[li])
      for (std::size_t ch : c.children)
        if (li + 1 >= T.levels.size() || ch >= T.levels[li + 1].size())
          schema_error(where + " has a child index outside the next level");
  return T;
}

// ---------------------------------------------------------------------------
// sampled manifold maps

inline json modulus_to_json(const Modulus& m) {
  json j;
  if (m.table.empty()) {
    j["lipschitz"] = m.lipschitz;
  } else {
    json rows = json::array();
    for (const auto& r : m.table) rows.push_back(json::array({r.first, r.second}));
    j["table"] = std::move(rows);
  }
  return j;
}

inline Modulus modulus_from_json(const json& j, const std::string& where) {
  using namespace detail_io;
  if (!j.is_object()) schema_error(where + " must be an object");
  if (j.contains("lipschitz")) return lipschitz_modulus(as_num(j.at("lipschitz"), where));
  if (j.contains("table")) {
    std::vector<std::pair<double, double>> rows;
    for (const json& e : as_arr(j.at("table"), where + ".table")) {
      const json& pr = as_arr(e, where + ".table row");
      if (pr.size() != 2) schema_error(where + ".table rows must be (target, delta) pairs");
      rows.emplace_back(as_num(pr[0], where + ".table target"),
                        as_num(pr[1], where + ".table delta"));
    }
    return table_modulus(std::move(rows));
  }
  schema_error(where + " needs \"lipschitz\" or \"table\"");
}

inline json sampled_map_to_json(const SampledManifoldMap& m) {
  json j;
  j["schema"] = kSchemaTag;
  j["type"] = "sampled_map";
  j["grid"] = space_to_json(*m.grid);
  j["table"] = m.table;
  j["modulus"] = modulus_to_json(m.modulus);
  return j;
}

inline SampledManifoldMap sampled_map_from_json(const json& j,
                                                const std::string& where = "sampled_map") {
  using namespace detail_io;
  check_header(j, "sampled_map", where);
  auto grid = std::make_shared<const FiniteMetricSpace>(
      space_from_slot(need(j, "grid", where), where + ".grid"));
  std::vector<std::size_t> table;
  for (const json& v : as_arr(need(j, "table", where), where + ".table"))
    table.push_back(as_index(v, where + ".table entry"));
  Modulus mod = modulus_from_json(need(j, "modulus", where), where + ".modulus");
  return make_sampled_map(std::move(grid), std::move(table), std::move(mod));
}

// ---------------------------------------------------------------------------
// result payloads

inline json hausdorff_to_json(const HausdorffResult& r) {
  json j;
  j["value"] = r.value;
  j["ab"] = json{{"value", r.ab.value}, {"from", r.ab.from}, {"to", r.ab.to}};
  j["ba"] = json{{"value", r.ba.value}, {"from", r.ba.from}, {"to", r.ba.to}};
  j["direction"] = r.direction;
  return j;
}

inline json ds_witness_to_json(const DsWitness& w) {
  json j;
  j["value"] = w.value;
  j["from"] = json::array({w.from.first, w.from.second});
  j["to"] = json::array({w.to.first, w.to.second});
  j["direction"] = w.direction;
  j["dir_fg"] = w.dir_fg;
  j["dir_gf"] = w.dir_gf;
  return j;
}

inline json dgh_to_json(const DghResult& r) {
  json j;
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["exact"] = r.exact;
  j["exhaustive"] = r.exhaustive;
  j["eps"] = r.eps;
  j["corr"] = pairs_to_json(r.corr);
  return j;
}

inline json am_to_json(const AmResult& r) {
  json j;
  j["value"] = r.value;
  j["exact"] = r.exact;
  j["term_fwd"] = r.term_fwd;
  j["term_bwd"] = r.term_bwd;
  j["phi"] = pairs_to_json(r.phi);
  j["psi"] = pairs_to_json(r.psi);
  return j;
}

inline json match_to_json(const MatchResult& r) {
  json j;
  j["rho"] = r.rho;
  j["delta"] = r.delta;
  j["norm"] = r.norm;
  j["bound"] = r.bound;
  j["level_a"] = r.level_a;
  j["level_b"] = r.level_b;
  j["mesh_a"] = r.mesh_a;
  j["mesh_b"] = r.mesh_b;
  j["bottleneck"] = r.bottleneck;
  j["leaf_fallback"] = r.leaf_fallback;
  j["pairs"] = pairs_to_json(r.pairs);
  return j;
}

inline json conjugating_pair_to_json(const ConjugatingPair& r) {
  json j;
  j["rho"] = r.rho;
  j["delta_eff"] = r.delta_eff;
  j["norm"] = r.norm;
  j["h1"] = pairs_to_json(r.h1);
  j["h2"] = pairs_to_json(r.h2);
  j["match"] = match_to_json(r.match);
  return j;
}

inline json approx_to_json(const ApproxResult& r) {
  json j;
  j["bound"] = r.bound;
  j["realized"] = r.realized;
  j["net"] = r.net;
  j["relation"] = relation_to_json(r.g);
  return j;
}

inline json embedded_sft_to_json(const EmbeddedSft& E) {
  json j;
  j["eps"] = E.eps;
  j["certified"] = E.certified;
  j["base_size"] = E.base_size;
  j["cylinder_points"] = E.cyl.size();
  j["letter_unit"] = E.letter_unit;
  j["bit_unit"] = E.bit_unit;
  j["shift"] = relation_to_json(E.h);
  j["source_pairs"] = pairs_to_json(E.g.pairs);
  return j;
}

inline json certificate_to_json(const CantorApproxCertificate& c) {
  json j;
  j["eps"] = c.eps;
  j["delta"] = c.delta;
  j["density_defect"] = c.density_defect;
  j["closeness"] = c.closeness;
  j["grid_size"] = c.grid_size;
  j["cantor_points"] = c.cantor_points;
  j["relation"] = relation_to_json(c.g);
  return j;
}

inline json genericity_to_json(const GenericityReport& r) {
  json j;
  j["fiber_diam_fwd"] = r.fiber_diam_fwd;
  j["fiber_diam_bwd"] = r.fiber_diam_bwd;
  j["eps_list"] = r.eps_list;
  j["small_fibers_at"] = r.small_fibers_at;
  j["isolated_at"] = r.isolated_at;
  j["r_list"] = r.r_list;
  j["component_mesh"] = r.component_mesh;
  j["component_count"] = r.component_count;
  return j;
}

}  // namespace dsmetric
