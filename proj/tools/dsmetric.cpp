// dsmetric: distances, matchings, and approximation certificates for finite
// dynamical systems, over a versioned JSON schema.
//
// Exit codes: 0 success, 2 validation/schema error, 3 budget exhaustion
// (with a flagged partial artifact when --out is given).  Outputs are
// deterministic for fixed inputs and flags, and every reported distance is
// replayed from its own emitted witness before anything is printed.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dsmetric/dsmetric.hpp"

namespace {

using namespace dsmetric;

std::string num(double x) { return json(x).dump(); }

void must(bool ok, const std::string& what) {
  if (!ok) fail(Err::BadShape, "witness replay failed (internal): " + what);
}

DynamicalRelation load_relation(const std::string& path) {
  return relation_from_json(load_json(path), path);
}

CantorTree load_tree(const std::string& path) {
  return tree_from_json(load_json(path), path);
}

std::size_t map_at(const std::vector<IndexPair>& m, std::size_t x) {
  auto it = std::lower_bound(m.begin(), m.end(), IndexPair{x, 0});
  must(it != m.end() && it->first == x, "map misses a point");
  return it->second;
}

json result_header(const char* command) {
  json j;
  j["schema"] = kSchemaTag;
  j["type"] = "result";
  j["command"] = command;
  return j;
}

struct Emit {
  std::string out_path;
  void operator()(const json& artifact) const {
    if (!out_path.empty()) save_json(artifact, out_path);
  }
};

// ---------------------------------------------------------------------------

void cmd_validate(const std::string& input, const Emit& emit) {
  json j = load_json(input);
  const std::string type =
      detail_io::as_str(detail_io::need(j, "type", input), input + ".type");
  if (type == "space") {
    FiniteMetricSpace S = space_from_json(j, input);
    MetricReport rep = validate_metric(S);
    if (!rep.ok()) fail(rep.issues.front().code, rep.to_string());
  } else if (type == "relation") {
    DynamicalRelation f = relation_from_json(j, input);  // pair validity
    MetricReport rep = validate_metric(f.S());
    if (!rep.ok()) fail(rep.issues.front().code, rep.to_string());
  } else if (type == "tree") {
    CantorTree T = tree_from_json(j, input);
    MetricReport mrep = validate_metric(T.S());
    if (!mrep.ok()) fail(mrep.issues.front().code, mrep.to_string());
    CantorReport rep = validate_cantor(T);
    if (!rep.ok()) fail(rep.issues.front().code, rep.issues.front().msg);
  } else if (type == "sampled_map") {
    sampled_map_from_json(j, input);  // construction runs every check
  } else {
    schema_error(input + " has unknown type \"" + type + "\"");
  }
  std::cout << "ok\n";
  json artifact = result_header("validate");
  artifact["input"] = input;
  artifact["valid"] = true;
  emit(artifact);
}

void cmd_hausdorff(const std::string& space_path, const SubsetIndex& a, const SubsetIndex& b,
                   const Emit& emit) {
  FiniteMetricSpace S = space_from_json(load_json(space_path), space_path);
  require_valid(S);
  HausdorffResult r = hausdorff_distance(S, a, b);
  must(S.dist(r.ab.from, r.ab.to) == r.ab.value, "directed witness a->b");
  must(S.dist(r.ba.from, r.ba.to) == r.ba.value, "directed witness b->a");
  must(r.value == std::max(r.ab.value, r.ba.value), "hausdorff maximum");
  std::cout << num(r.value) << "\n";
  json artifact = result_header("hausdorff");
  artifact["value"] = r.value;
  artifact["witness"] = hausdorff_to_json(r);
  emit(artifact);
}

void cmd_ds(const std::string& f_path, const std::string& g_path, const Emit& emit) {
  DynamicalRelation f = load_relation(f_path);
  DynamicalRelation g = load_relation(g_path);
  if (!same_space(f.S(), g.S()))
    fail(Err::SpaceMismatch, "systems must live on one ambient space");
  DsWitness w = ds_distance(f, g);
  must(d2(f.S(), w.from, w.to) == w.value, "attaining pair");
  must(w.value == std::max(w.dir_fg, w.dir_gf), "directed maximum");
  std::cout << num(w.value) << "\n";
  json artifact = result_header("ds");
  artifact["value"] = w.value;
  artifact["witness"] = ds_witness_to_json(w);
  emit(artifact);
}

void cmd_discretize(const std::string& f_path, double eps, const Emit& emit) {
  DynamicalRelation f = load_relation(f_path);
  ApproxResult r = finite_relation_approx(f, eps);
  must(ds_distance(f, r.g).value == r.realized, "realized distance");
  must(r.realized <= r.bound, "certified bound");
  std::cout << "net_size " << r.net.size() << "\n";
  std::cout << "bound " << num(r.bound) << "\n";
  std::cout << "realized " << num(r.realized) << "\n";
  json artifact = result_header("discretize");
  artifact["result"] = approx_to_json(r);
  emit(artifact);
}

void cmd_sft(const std::string& f_path, double eps, std::size_t depth, std::size_t bits,
             std::size_t budget, const Emit& emit) {
  DynamicalRelation f = load_relation(f_path);
  TransitionSystem T = sft_from_relation(f);
  EmbeddedSft E = embed_cylinders(T, f, depth, eps, bits, budget);
  must(ds_distance(E.h, E.g).value == E.certified, "embedding certificate");
  must(E.certified <= eps, "certified radius");
  std::cout << "symbols " << T.k() << "\n";
  std::cout << "cylinder_points " << E.cyl.size() << "\n";
  std::cout << "certified " << num(E.certified) << "\n";
  json artifact = result_header("sft");
  json tj;
  tj["symbols"] = T.symbols;
  tj["matrix"] = T.A;
  artifact["transitions"] = std::move(tj);
  artifact["embedding"] = embedded_sft_to_json(E);
  emit(artifact);
}

void cmd_cantor_match(const std::string& a_path, const std::string& b_path, double delta,
                      const Emit& emit) {
  CantorTree A = load_tree(a_path);
  CantorTree B = load_tree(b_path);
  require_valid(A.S());
  require_valid_cantor(A);
  require_valid_cantor(B);
  MatchResult r = cantor_match(A, B, delta);
  double norm = 0;
  for (const auto& p : r.pairs) norm = std::max(norm, A.S().dist(p.first, p.second));
  must(norm == r.norm, "matching norm");
  must(r.norm <= r.bound, "certified ceiling");
  std::cout << "rho " << num(r.rho) << "\n";
  std::cout << "norm " << num(r.norm) << "\n";
  std::cout << "bound " << num(r.bound) << "\n";
  json artifact = result_header("cantor-match");
  artifact["result"] = match_to_json(r);
  emit(artifact);
}

void cmd_conjugate_pair(const std::string& f_path, const std::string& g_path, double delta,
                        const Emit& emit) {
  DynamicalRelation g = load_relation(f_path);
  DynamicalRelation j = load_relation(g_path);
  ConjugatingPair r = conjugating_pair(g, j, delta);
  double norm = 0;
  for (const auto& p : r.h1) norm = std::max(norm, g.S().dist(p.first, p.second));
  for (const auto& p : r.h2) norm = std::max(norm, g.S().dist(p.first, p.second));
  must(norm == r.norm, "displacement norm");
  must(norm < delta, "displacement below delta");
  for (const auto& p : g.pairs) {
    IndexPair want{map_at(r.h1, p.first), map_at(r.h2, p.second)};
    must(std::binary_search(j.pairs.begin(), j.pairs.end(), want), "exact intertwining");
  }
  std::cout << "rho " << num(r.rho) << "\n";
  std::cout << "delta_eff " << num(r.delta_eff) << "\n";
  std::cout << "norm " << num(r.norm) << "\n";
  json artifact = result_header("conjugate-pair");
  artifact["result"] = conjugating_pair_to_json(r);
  emit(artifact);
}

void cmd_dgh(const std::string& f_path, const std::string& g_path, std::size_t budget,
             const Emit& emit) {
  DynamicalRelation f = load_relation(f_path);
  DynamicalRelation g = load_relation(g_path);
  DghResult r = dgh(f, g, budget);
  GluedSystems gl = glue_systems(f, g, r.corr, r.eps);
  const double inside = ds_distance(gl.f, gl.g).value;
  must(r.upper == (inside == gl.eps ? gl.distortion / 2.0 : inside), "glued certificate");
  must(r.lower <= r.upper, "bracket order");
  json summary;
  summary["lower"] = r.lower;
  summary["upper"] = r.upper;
  summary["exact"] = r.exact;
  std::cout << summary.dump() << "\n";
  json artifact = result_header("dgh");
  artifact["result"] = dgh_to_json(r);
  emit(artifact);
}

void cmd_am(const std::string& f_path, const std::string& g_path, double budget,
            const Emit& emit) {
  DynamicalRelation f = load_relation(f_path);
  DynamicalRelation g = load_relation(g_path);
  AmResult r = am_distance(f, g, budget);
  // replay both map costs from the emitted maps
  auto term_of = [](const DynamicalRelation& a, const DynamicalRelation& b,
                    const std::vector<IndexPair>& phi) {
    IsometryReport rep = eps_isometry_report(a.S(), carrier(a), b.S(), carrier(b), phi);
    double defect = 0;
    for (std::size_t x : carrier(a))
      defect = std::max(defect, b.S().dist(apply_function(b, map_at(phi, x)),
                                           map_at(phi, apply_function(a, x))));
    return std::max(rep.eps, defect);
  };
  must(term_of(f, g, r.phi) == r.term_fwd, "forward map cost");
  must(term_of(g, f, r.psi) == r.term_bwd, "backward map cost");
  must(r.value == std::max(r.term_fwd, r.term_bwd), "two-sided maximum");
  std::cout << "value " << num(r.value) << "\n";
  std::cout << "exact " << (r.exact ? "true" : "false") << "\n";
  json artifact = result_header("am");
  artifact["result"] = am_to_json(r);
  emit(artifact);
}

void cmd_manifold_approx(const std::string& input, double eps, std::size_t depth,
                         std::size_t bits, std::size_t budget, const Emit& emit) {
  SampledManifoldMap m = sampled_map_from_json(load_json(input), input);
  CantorApproxCertificate cert = manifold_cantor_approx(m, eps, depth, bits, budget);
  SubsetIndex grid_idx(cert.grid_size);
  for (std::size_t i = 0; i < grid_idx.size(); ++i) grid_idx[i] = i;
  must(hausdorff_distance(*cert.g.space, carrier(cert.g), grid_idx).value ==
           cert.density_defect,
       "density defect");
  DynamicalRelation f_again{cert.g.space, m.relation().pairs};
  must(ds_distance(cert.g, f_again).value == cert.closeness, "closeness");
  must(cert.density_defect < eps && cert.closeness < eps, "certificate below eps");
  std::cout << "density_defect " << num(cert.density_defect) << "\n";
  std::cout << "closeness " << num(cert.closeness) << "\n";
  std::cout << "cantor_points " << cert.cantor_points << "\n";
  json artifact = result_header("manifold-approx");
  artifact["certificate"] = certificate_to_json(cert);
  emit(artifact);
}

void cmd_regress_power(const std::vector<std::size_t>& ns, std::size_t grid,
                       const Emit& emit) {
  auto rows = power_map_regression(ns, grid);
  auto again = power_map_regression(ns, grid);
  for (std::size_t i = 0; i < rows.size(); ++i)
    must(rows[i].value == again[i].value, "regression row");
  json table = json::array();
  for (const auto& r : rows) {
    std::cout << r.n << " " << num(r.value) << "\n";
    table.push_back(json{{"n", r.n}, {"value", r.value}});
  }
  json artifact = result_header("regress-power");
  artifact["grid_points"] = grid;
  artifact["rows"] = std::move(table);
  emit(artifact);
}

void cmd_diagnose(const std::string& f_path, const std::vector<double>& eps_list,
                  const std::vector<double>& r_list, const Emit& emit) {
  DynamicalRelation f = load_relation(f_path);
  GenericityReport rep = genericity_report(f, eps_list, r_list);
  std::cout << "fiber_diam_fwd " << num(rep.fiber_diam_fwd) << "\n";
  std::cout << "fiber_diam_bwd " << num(rep.fiber_diam_bwd) << "\n";
  for (std::size_t i = 0; i < eps_list.size(); ++i)
    std::cout << "eps " << num(eps_list[i]) << " small_fibers "
              << (rep.small_fibers_at[i] ? "true" : "false") << " isolated "
              << rep.isolated_at[i].size() << "\n";
  for (std::size_t i = 0; i < r_list.size(); ++i)
    std::cout << "r " << num(r_list[i]) << " components " << rep.component_count[i]
              << " mesh " << num(rep.component_mesh[i]) << "\n";
  json artifact = result_header("diagnose");
  artifact["report"] = genericity_to_json(rep);
  emit(artifact);
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"distances and approximation certificates for finite dynamical systems"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for randomized generators; never affects distances");

  // one Emit per subcommand so --out stays local to it
  struct {
    std::string input, f, g, a, b, space, out;
    SubsetIndex ia, ib;
    std::vector<std::size_t> ns{1, 4, 20, 100, 200};
    std::vector<double> eps_list, r_list;
    double eps = 0, delta = 0, am_budget = 1e8;
    std::size_t depth = 0, bits = 0, budget = 200000, dgh_budget = kDghDefaultBudget;
    std::size_t grid = 1001;
  } o;

  auto* validate = app.add_subcommand("validate", "check a space, relation, tree, or sampled map");
  validate->add_option("--input", o.input, "object to validate")->required();
  validate->add_option("--out", o.out, "write the JSON artifact here");
  validate->callback([&] { cmd_validate(o.input, Emit{o.out}); });

  auto* hausdorff = app.add_subcommand("hausdorff", "Hausdorff distance between two subsets");
  hausdorff->add_option("--space", o.space, "ambient space file")->required();
  hausdorff->add_option("--a", o.ia, "first subset, comma-separated indices")
      ->required()
      ->delimiter(',');
  hausdorff->add_option("--b", o.ib, "second subset, comma-separated indices")
      ->required()
      ->delimiter(',');
  hausdorff->add_option("--out", o.out, "write the JSON artifact here");
  hausdorff->callback([&] { cmd_hausdorff(o.space, o.ia, o.ib, Emit{o.out}); });

  auto* ds = app.add_subcommand("ds", "system distance between two relations on one space");
  ds->add_option("--f", o.f, "first relation file")->required();
  ds->add_option("--g", o.g, "second relation file")->required();
  ds->add_option("--out", o.out, "write the JSON artifact here");
  ds->callback([&] { cmd_ds(o.f, o.g, Emit{o.out}); });

  auto* disc = app.add_subcommand("discretize", "approximate a system on an epsilon-net");
  disc->add_option("--f", o.f, "relation file")->required();
  disc->add_option("--eps", o.eps, "net radius and certified bound")->required();
  disc->add_option("--out", o.out, "write the JSON artifact here");
  disc->callback([&] { cmd_discretize(o.f, o.eps, Emit{o.out}); });

  auto* sft = app.add_subcommand("sft", "lift a relation to embedded shift cylinders");
  sft->add_option("--f", o.f, "relation file")->required();
  sft->add_option("--eps", o.eps, "embedding radius")->required();
  sft->add_option("--depth", o.depth, "cylinder window half-length");
  sft->add_option("--bits", o.bits, "splitting-factor bits");
  sft->add_option("--budget", o.budget, "cylinder point budget");
  sft->add_option("--out", o.out, "write the JSON artifact here");
  sft->callback([&] { cmd_sft(o.f, o.eps, o.depth, o.bits, o.budget, Emit{o.out}); });

  auto* cm = app.add_subcommand("cantor-match", "near-isometric leaf matching of two trees");
  cm->add_option("--a", o.a, "first tree file")->required();
  cm->add_option("--b", o.b, "second tree file")->required();
  cm->add_option("--delta", o.delta, "quality parameter")->required();
  cm->add_option("--out", o.out, "write the JSON artifact here");
  cm->callback([&] { cmd_cantor_match(o.a, o.b, o.delta, Emit{o.out}); });

  auto* cp = app.add_subcommand("conjugate-pair", "exactly intertwined maps for close bijections");
  cp->add_option("--f", o.f, "first relation file")->required();
  cp->add_option("--g", o.g, "second relation file")->required();
  cp->add_option("--delta", o.delta, "closeness budget")->required();
  cp->add_option("--out", o.out, "write the JSON artifact here");
  cp->callback([&] { cmd_conjugate_pair(o.f, o.g, o.delta, Emit{o.out}); });

  auto* dghc = app.add_subcommand("dgh", "quotient distance bracket over correspondences");
  dghc->add_option("--f", o.f, "first relation file")->required();
  dghc->add_option("--g", o.g, "second relation file")->required();
  dghc->add_option("--budget", o.dgh_budget, "search node budget");
  dghc->add_option("--out", o.out, "write the JSON artifact here");
  dghc->callback([&] { cmd_dgh(o.f, o.g, o.dgh_budget, Emit{o.out}); });

  auto* amc = app.add_subcommand("am", "almost-conjugacy distance between function systems");
  amc->add_option("--f", o.f, "first relation file")->required();
  amc->add_option("--g", o.g, "second relation file")->required();
  amc->add_option("--budget", o.am_budget, "assignment enumeration budget");
  amc->add_option("--out", o.out, "write the JSON artifact here");
  amc->callback([&] { cmd_am(o.f, o.g, o.am_budget, Emit{o.out}); });

  auto* ma = app.add_subcommand("manifold-approx", "Cantor approximation of a sampled map");
  ma->add_option("--input", o.input, "sampled map file")->required();
  ma->add_option("--eps", o.eps, "requested certificate bound")->required();
  ma->add_option("--depth", o.depth, "cylinder window half-length");
  ma->add_option("--bits", o.bits, "splitting-factor bits");
  ma->add_option("--budget", o.budget, "cylinder point budget");
  ma->add_option("--out", o.out, "write the JSON artifact here");
  ma->callback(
      [&] { cmd_manifold_approx(o.input, o.eps, o.depth, o.bits, o.budget, Emit{o.out}); });

  auto* rp = app.add_subcommand("regress-power", "distance decay of power-map graphs");
  rp->add_option("--n", o.ns, "exponent list, comma-separated")->delimiter(',');
  rp->add_option("--grid", o.grid, "sample grid size");
  rp->add_option("--out", o.out, "write the JSON artifact here");
  rp->callback([&] { cmd_regress_power(o.ns, o.grid, Emit{o.out}); });

  auto* dg = app.add_subcommand("diagnose", "fiber, component, and isolation diagnostics");
  dg->add_option("--f", o.f, "relation file")->required();
  dg->add_option("--eps", o.eps_list, "scales for fibers and isolation")->delimiter(',');
  dg->add_option("--r", o.r_list, "scales for carrier components")->delimiter(',');
  dg->add_option("--out", o.out, "write the JSON artifact here");
  dg->callback([&] { cmd_diagnose(o.f, o.eps_list, o.r_list, Emit{o.out}); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const DsError& e) {
    const bool budget_out =
        e.code == Err::BudgetExceeded || e.code == Err::DepthOverflow;
    // what() is always "<ErrName>: <detail>"; schema problems already carry
    // their own label inside the detail, so print them without the prefix
    const std::string full = e.what();
    const std::string detail = full.substr(std::string(err_name(e.code)).size() + 2);
    std::cout << (e.code == Err::ParseError ? detail : full) << "\n";
    if (budget_out && !o.out.empty()) {
      json partial = result_header("error");
      partial["partial"] = true;
      partial["error"] = err_name(e.code);
      partial["message"] = detail;
      save_json(partial, o.out);
    }
    return budget_out ? 3 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cout << e.what() << "\n";
    return 2;
  }
}
