#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "onedim/action.hpp"
#include "onedim/analysis.hpp"
#include "onedim/config.hpp"
#include "onedim/diffeo.hpp"
#include "onedim/errors.hpp"
#include "onedim/graph.hpp"
#include "onedim/interval_set.hpp"
#include "onedim/obstruction.hpp"
#include "onedim/verdict.hpp"
#include "onedim/word.hpp"

using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw onedim::DomainError("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Effective run configuration: defaults, then the --config file, then
// explicit flags, in that order of increasing precedence.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_pow, period_cap, budget, q_cap;
  std::optional<double> tol_id, tol_nz, tol_root, tol_rot, tol_geom, tol_var,
      tol_eval;
};

void apply_json_config(onedim::RunConfig& cfg, const json& j) {
  if (j.contains("tol")) {
    const json& t = j.at("tol");
    auto get = [&](const char* k, double& v) {
      if (t.contains(k)) v = t.at(k).get<double>();
    };
    get("id", cfg.tol.id);
    get("nz", cfg.tol.nz);
    get("root", cfg.tol.root);
    get("rot", cfg.tol.rot);
    get("geom", cfg.tol.geom);
    get("var", cfg.tol.var);
    get("eval", cfg.tol.eval);
  }
  auto geti = [&](const char* k, int& v) {
    if (j.contains(k)) v = j.at(k).get<int>();
  };
  geti("grid_pow", cfg.grid_pow);
  geti("period_cap", cfg.period_cap);
  geti("proposition_budget", cfg.proposition_budget);
  geti("rational_q_cap", cfg.rational_q_cap);
  geti("var_start_pow", cfg.var_start_pow);
  geti("var_max_pow", cfg.var_max_pow);
  geti("rot_start_pow", cfg.rot_start_pow);
  if (j.contains("rot_max_iter")) cfg.rot_max_iter = j.at("rot_max_iter").get<long>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
}

onedim::RunConfig build_config(const Overrides& o) {
  onedim::RunConfig cfg;
  if (o.config_path) apply_json_config(cfg, read_json_file(*o.config_path));
  if (o.seed) cfg.seed = *o.seed;
  if (o.grid_pow) cfg.grid_pow = *o.grid_pow;
  if (o.period_cap) cfg.period_cap = *o.period_cap;
  if (o.budget) cfg.proposition_budget = *o.budget;
  if (o.q_cap) cfg.rational_q_cap = *o.q_cap;
  if (o.tol_id) cfg.tol.id = *o.tol_id;
  if (o.tol_nz) cfg.tol.nz = *o.tol_nz;
  if (o.tol_root) cfg.tol.root = *o.tol_root;
  if (o.tol_rot) cfg.tol.rot = *o.tol_rot;
  if (o.tol_geom) cfg.tol.geom = *o.tol_geom;
  if (o.tol_var) cfg.tol.var = *o.tol_var;
  if (o.tol_eval) cfg.tol.eval = *o.tol_eval;

  auto pos = [](double v, const char* name) {
    if (!(v > 0))
      throw onedim::DomainError(std::string("tolerance ") + name +
                                " must be positive");
  };
  pos(cfg.tol.id, "id");
  pos(cfg.tol.nz, "nz");
  pos(cfg.tol.root, "root");
  pos(cfg.tol.rot, "rot");
  pos(cfg.tol.geom, "geom");
  pos(cfg.tol.var, "var");
  pos(cfg.tol.eval, "eval");
  if (cfg.grid_pow < 4 || cfg.grid_pow > 26)
    throw onedim::DomainError("grid_pow must be between 4 and 26");
  if (cfg.period_cap < 1 || cfg.proposition_budget < 1 || cfg.rational_q_cap < 1)
    throw onedim::DomainError("caps and budgets must be at least 1");
  return cfg;
}

json ival_json(const onedim::Ival& iv) { return json::array({iv.lo, iv.hi}); }

json interval_set_json(const onedim::IntervalSet& s) {
  json parts = json::array();
  for (const auto& p : s.parts()) parts.push_back(ival_json(p));
  return json{{"whole", s.is_whole()}, {"parts", parts}, {"measure", s.measure()}};
}

json fixed_set_json(const onedim::FixedSet& fs) {
  json plateaus = json::array();
  for (const auto& p : fs.plateaus) plateaus.push_back(ival_json(p));
  return json{{"whole", fs.whole},
              {"points", fs.points},
              {"plateaus", plateaus},
              {"warnings", fs.warnings}};
}

void write_product_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw onedim::DomainError("cannot open csv output: " + path);
  out << "h,product\n";
  for (const auto& [h, p] : rows) out << fmt12(h) << "," << fmt12(p) << "\n";
}

std::vector<std::pair<double, double>> witness_rows(
    const std::vector<onedim::TwoJumpsWitness>& ws) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& w : ws) rows.emplace_back(w.I.len(), w.product);
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-manifold group action toolkit"};
  app.require_subcommand(1);

  Overrides ov;
  app.add_option("--config", ov.config_path, "JSON config file (overrides defaults)");
  app.add_option("--seed", ov.seed, "seed for randomized suites");
  app.add_option("--grid-pow", ov.grid_pow, "sampling grid is 2^grid_pow cells");
  app.add_option("--period-cap", ov.period_cap, "periodic point search cap");
  app.add_option("--budget", ov.budget, "interval-pair search budget");
  app.add_option("--rational-q-cap", ov.q_cap, "max denominator for rational rotation tags");
  app.add_option("--tol-id", ov.tol_id, "identity threshold");
  app.add_option("--tol-nz", ov.tol_nz, "visibly-nonzero threshold");
  app.add_option("--tol-root", ov.tol_root, "fixed point bisection target");
  app.add_option("--tol-rot", ov.tol_rot, "rotation number convergence");
  app.add_option("--tol-geom", ov.tol_geom, "interval endpoint comparisons");
  app.add_option("--tol-var", ov.tol_var, "variation stopping increment");
  app.add_option("--tol-eval", ov.tol_eval, "inverse evaluation target");

  int rc = 0;

  auto sub = [](CLI::App* parent, const char* name, const char* desc) {
    CLI::App* s = parent->add_subcommand(name, desc);
    s->fallthrough();
    return s;
  };

  // ---- graph ---------------------------------------------------------
  CLI::App* graph = sub(&app, "graph", "cograph analysis");
  graph->require_subcommand(1);
  {
    static std::string file;
    CLI::App* analyze = sub(graph, "analyze", "cograph verdict: cotree or induced-path witness");
    analyze->add_option("file", file, "graph JSON")->required();
    analyze->callback([&rc]() {
      onedim::SimplicialGraph g = onedim::graph_from_json(read_json_file(file));
      onedim::CographDecomposition d = onedim::build_cotree(g);
      if (d.is_cograph()) {
        emit(json{{"cograph", true}, {"cotree", onedim::cotree_to_json(*d.cotree)}});
      } else {
        emit(json{{"cograph", false}, {"p4", d.p4->path}});
        rc = 2;
      }
    });
  }
  {
    static std::string file;
    CLI::App* wit = sub(graph, "p4-witness", "first induced path on four vertices, if any");
    wit->add_option("file", file, "graph JSON")->required();
    wit->callback([&rc]() {
      onedim::SimplicialGraph g = onedim::graph_from_json(read_json_file(file));
      auto w = onedim::find_induced_p4(g);
      if (w) {
        emit(json{{"p4", w->path}});
        rc = 2;
      } else {
        emit(json{{"p4", nullptr}});
      }
    });
  }
  {
    static std::string file;
    CLI::App* ct = sub(graph, "cotree", "canonical cotree of a cograph");
    ct->add_option("file", file, "graph JSON")->required();
    ct->callback([&rc]() {
      onedim::SimplicialGraph g = onedim::graph_from_json(read_json_file(file));
      onedim::CographDecomposition d = onedim::build_cotree(g);
      if (d.is_cograph()) {
        emit(onedim::cotree_to_json(*d.cotree));
      } else {
        emit(json{{"cograph", false}, {"p4", d.p4->path}});
        rc = 2;
      }
    });
  }

  // ---- dyn -----------------------------------------------------------
  CLI::App* dyn = sub(&app, "dyn", "single-map dynamics");
  dyn->require_subcommand(1);
  {
    static std::string file;
    CLI::App* rot = sub(dyn, "rot", "rotation number");
    rot->add_option("file", file, "diffeo JSON")->required();
    rot->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::Diffeo f = onedim::diffeo_from_json(read_json_file(file));
      onedim::RotationNumber r = onedim::rotation_number(f, cfg);
      emit(json{{"value", r.value},
                {"rational", r.rational},
                {"p", r.p},
                {"q", r.q},
                {"converged", r.converged},
                {"iterations", r.iterations},
                {"warnings", r.warnings}});
    });
  }
  {
    static std::string file;
    CLI::App* fix = sub(dyn, "fix", "fixed set: points and plateaus");
    fix->add_option("file", file, "diffeo JSON")->required();
    fix->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::Diffeo f = onedim::diffeo_from_json(read_json_file(file));
      emit(fixed_set_json(onedim::fixed_set(f, cfg)));
    });
  }
  {
    static std::string file;
    CLI::App* supp = sub(dyn, "supp", "support: complement of the fixed set");
    supp->add_option("file", file, "diffeo JSON")->required();
    supp->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::Diffeo f = onedim::diffeo_from_json(read_json_file(file));
      emit(interval_set_json(onedim::support(f, cfg)));
    });
  }
  {
    static std::string file;
    CLI::App* var = sub(dyn, "var", "total variation of the derivative");
    var->add_option("file", file, "diffeo JSON")->required();
    var->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::Diffeo f = onedim::diffeo_from_json(read_json_file(file));
      onedim::VariationEstimate v = onedim::derivative_variation(f, cfg);
      emit(json{{"value", v.value}, {"levels", v.levels}, {"converged", v.converged}});
    });
  }
  {
    static std::string file_f, file_g;
    CLI::App* comm = sub(dyn, "commutator", "commutator displacement and support");
    comm->add_option("f", file_f, "diffeo JSON")->required();
    comm->add_option("g", file_g, "diffeo JSON")->required();
    comm->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::Diffeo f = onedim::diffeo_from_json(read_json_file(file_f));
      onedim::Diffeo g = onedim::diffeo_from_json(read_json_file(file_g));
      if (f.manifold() != g.manifold())
        throw onedim::DomainError("maps live on different manifolds");
      onedim::Diffeo c = onedim::commutator(f, g);
      onedim::Displacement d = onedim::sup_displacement(c, cfg);
      emit(json{{"sup_displacement", d.value},
                {"argmax", d.argmax},
                {"nonzero", onedim::tri_name(d.nonzero)},
                {"support", interval_set_json(onedim::support(c, cfg))}});
    });
  }

  // ---- raag ----------------------------------------------------------
  CLI::App* raag = sub(&app, "raag", "graph-group words and actions");
  raag->require_subcommand(1);
  {
    static std::string file;
    CLI::App* check = sub(raag, "check", "verify every defining relation of an action");
    check->add_option("action", file, "action JSON")->required();
    check->callback([&ov, &rc]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::ActionAssignment a = onedim::action_from_json(read_json_file(file));
      onedim::ActionCheckReport r = onedim::check_action(a, cfg);
      emit(onedim::action_check_to_json(r));
      if (r.ok == onedim::Tri::no) rc = 2;
    });
  }
  {
    static std::string file, word;
    CLI::App* red = sub(raag, "reduce", "normal form of a word in the graph group");
    red->add_option("graph", file, "graph JSON")->required();
    red->add_option("word", word, "word, e.g. \"a b^-1 c^2\"")->required();
    red->callback([]() {
      onedim::RaagPresentation p{onedim::graph_from_json(read_json_file(file))};
      onedim::FreeWord w = onedim::FreeWord::parse(word);
      onedim::ReducedWord r = onedim::reduce_in_raag(w, p);
      emit(json{{"input", w.str()}, {"reduced", r.word.str()}, {"trivial", r.trivial}});
    });
  }
  {
    static std::string file, word;
    static int n = 2;
    CLI::App* pw = sub(raag, "power", "substitute N-th powers of the generators");
    pw->add_option("graph", file, "graph JSON")->required();
    pw->add_option("N", n, "power")->required();
    pw->add_option("word", word, "word over the generators")->required();
    pw->callback([]() {
      onedim::RaagPresentation p{onedim::graph_from_json(read_json_file(file))};
      onedim::FreeWord w = onedim::FreeWord::parse(word);
      emit(json{{"word", onedim::power_subgroup(p, n, w).str()}});
    });
  }
  {
    static std::string file;
    static int radius = 3;
    CLI::App* h = sub(raag, "holder", "free-action sweep: abelian prediction check");
    h->add_option("action", file, "action JSON")->required();
    h->add_option("--radius", radius, "ball radius searched for fixed words");
    h->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::ActionAssignment a = onedim::action_from_json(read_json_file(file));
      emit(onedim::holder_to_json(onedim::holder_diagnostic(a, radius, cfg)));
    });
  }
  {
    static std::string file;
    CLI::App* rr = sub(raag, "rationality", "rotation-number rationality scan over the generators");
    rr->add_option("action", file, "action JSON")->required();
    rr->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::ActionAssignment a = onedim::action_from_json(read_json_file(file));
      emit(onedim::rationality_to_json(onedim::rationality_diagnostic(a, cfg)));
    });
  }

  // ---- obstruct ------------------------------------------------------
  CLI::App* obs = sub(&app, "obstruct", "commutator regions, chains, envelopes, derivative probes");
  obs->require_subcommand(1);
  {
    static std::string file_f, file_g;
    CLI::App* jfg = sub(obs, "jfg", "commutator region of a pair");
    jfg->add_option("f", file_f, "diffeo JSON")->required();
    jfg->add_option("g", file_g, "diffeo JSON")->required();
    jfg->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::Diffeo f = onedim::diffeo_from_json(read_json_file(file_f));
      onedim::Diffeo g = onedim::diffeo_from_json(read_json_file(file_g));
      emit(onedim::commutator_region_to_json(onedim::commutator_region(f, g, cfg)));
    });
  }
  {
    static std::string file;
    CLI::App* ch = sub(obs, "chains", "four-interval chain witnesses of a path action");
    ch->add_option("action", file, "action JSON")->required();
    ch->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::ActionAssignment a = onedim::action_from_json(read_json_file(file));
      json chains = json::array();
      for (const auto& c : onedim::detect_chains(a, cfg))
        chains.push_back(onedim::chain_to_json(c));
      emit(json{{"chains", chains}});
    });
  }
  {
    static std::string file;
    CLI::App* env = sub(obs, "envelopes", "gap envelopes of the (c,d) commutator region");
    env->add_option("action", file, "action JSON")->required();
    env->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::ActionAssignment a = onedim::action_from_json(read_json_file(file));
      emit(onedim::envelopes_to_json(onedim::compute_envelopes(a, cfg)));
    });
  }
  {
    static std::string file, csv;
    CLI::App* tj = sub(obs, "two-jumps", "difference-quotient probes for a pair of maps");
    tj->add_option("file", file, "JSON: {\"f\":..., \"g\":..., \"configs\":[{\"y\":..., \"I\":[lo,hi]}]}")
        ->required();
    tj->add_option("--csv", csv, "write (h, product) rows to this file");
    tj->callback([&ov]() {
      onedim::RunConfig cfg = build_config(ov);
      json j = read_json_file(file);
      onedim::Diffeo f = onedim::diffeo_from_json(j.at("f"));
      onedim::Diffeo g = onedim::diffeo_from_json(j.at("g"));
      std::vector<onedim::TwoJumpsConfig> configs;
      for (const auto& c : j.at("configs")) {
        onedim::TwoJumpsConfig tc;
        tc.y = c.at("y").get<double>();
        tc.I = onedim::Ival{c.at("I").at(0).get<double>(), c.at("I").at(1).get<double>()};
        configs.push_back(tc);
      }
      onedim::TwoJumpsReport r = onedim::two_jumps(f, g, configs, cfg);
      emit(onedim::two_jumps_to_json(r));
      if (!csv.empty()) write_product_csv(csv, witness_rows(r.witnesses));
    });
  }
  {
    static std::string file, csv;
    static bool swap_roles = false;
    CLI::App* p4 = sub(obs, "p4", "full pipeline: relations, chains, derivative probes, verdict");
    p4->add_option("action", file, "action JSON")->required();
    p4->add_option("--csv", csv, "write (h, product) rows to this file");
    p4->add_flag("--swap-roles", swap_roles, "relabel a<->d, b<->c before the analysis");
    p4->callback([&ov, &rc]() {
      onedim::RunConfig cfg = build_config(ov);
      onedim::ActionAssignment a = onedim::action_from_json(read_json_file(file));
      onedim::P4Analysis r = onedim::analyze_p4_action(a, swap_roles, cfg);
      emit(onedim::p4_analysis_to_json(r));
      if (!csv.empty()) write_product_csv(csv, witness_rows(r.obstruction.witnesses));
      if (r.verdict == onedim::P4Verdict::relations_fail) rc = 2;
    });
  }

  // ---- verdict -------------------------------------------------------
  CLI::App* ver = sub(&app, "verdict", "surface / braid / group catalog lookups");
  ver->require_subcommand(1);
  {
    static long g = 0, n = 0, b = 0;
    CLI::App* surf = sub(ver, "surface", "mapping class group of S_{g,n,b}");
    surf->add_option("g", g, "genus")->required();
    surf->add_option("n", n, "marked points")->required();
    surf->add_option("b", b, "boundary components")->required();
    surf->callback([]() {
      onedim::SurfaceSignature s{g, n, b};
      onedim::Verdict v = onedim::mod_verdict(s);
      json j = onedim::verdict_to_json(v);
      j["complexity"] = onedim::complexity(s);
      emit(j);
    });
  }
  {
    static long n = 0;
    CLI::App* braid = sub(ver, "braid", "n-strand braid group");
    braid->add_option("n", n, "strands")->required();
    braid->callback([]() {
      json j = onedim::verdict_to_json(onedim::braid_verdict(n));
      j["n"] = n;
      emit(j);
    });
  }
  {
    static std::string family;
    static std::vector<long> params;
    CLI::App* grp = sub(ver, "group", "catalog lookup: autfn|outfn N, torelli GENUS, johnson K GENUS");
    grp->add_option("family", family, "autfn | outfn | torelli | johnson")->required();
    grp->add_option("params", params, "family parameters")->expected(1, 2);
    grp->callback([]() {
      onedim::GroupFamily f;
      long primary = 0, k = 0;
      if (family == "autfn" || family == "outfn") {
        f = family == "autfn" ? onedim::GroupFamily::aut_free : onedim::GroupFamily::out_free;
        if (params.size() != 1) throw onedim::DomainError("expected one parameter: the free-group rank");
        primary = params[0];
      } else if (family == "torelli") {
        f = onedim::GroupFamily::torelli;
        if (params.size() != 1) throw onedim::DomainError("expected one parameter: the genus");
        primary = params[0];
      } else if (family == "johnson") {
        f = onedim::GroupFamily::johnson;
        if (params.size() != 2) throw onedim::DomainError("expected two parameters: filtration index and genus");
        k = params[0];
        primary = params[1];
      } else {
        throw onedim::DomainError("unknown family: " + family);
      }
      json j = onedim::verdict_to_json(onedim::group_catalog_verdict(f, primary, k));
      j["family"] = onedim::group_family_name(f);
      j["params"] = params;
      emit(j);
    });
  }
  {
    static std::string which;
    CLI::App* cg = sub(ver, "chain", "a four-chain commutation graph");
    cg->add_option("case", which, "curves | windows")->required();
    cg->callback([]() {
      onedim::ChainCase c;
      if (which == "curves")
        c = onedim::ChainCase::curves;
      else if (which == "windows")
        c = onedim::ChainCase::windows;
      else
        throw onedim::DomainError("unknown chain case: " + which);
      onedim::SimplicialGraph g = onedim::chain_graph(c);
      auto w = onedim::find_induced_p4(g);
      json j{{"graph", onedim::graph_to_json(g)}};
      j["p4"] = w ? json(w->path) : json(nullptr);
      emit(j);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
