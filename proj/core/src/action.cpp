#include "onedim/action.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "onedim/errors.hpp"

namespace onedim {

namespace {

std::string ival_str(const Ival& iv) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << iv.lo << ", " << iv.hi << ")";
  return os.str();
}

void validate(const ActionAssignment& a) {
  for (const auto& v : a.presentation.graph.vertices()) {
    auto it = a.assignment.find(v);
    if (it == a.assignment.end())
      throw DomainError("generator '" + v + "' has no assigned map");
    if (it->second.manifold() != a.manifold)
      throw DomainError("map for '" + v + "' lives on the wrong manifold");
  }
  for (const auto& [label, d] : a.assignment) {
    a.presentation.graph.index_of(label);  // throws on labels outside the presentation
    (void)d;
  }
}

}  // namespace

nlohmann::json action_to_json(const ActionAssignment& a) {
  nlohmann::json maps = nlohmann::json::object();
  for (const auto& [label, d] : a.assignment) maps[label] = diffeo_to_json(d);
  return {{"presentation", graph_to_json(a.presentation.graph)},
          {"assignment", maps},
          {"manifold", manifold_name(a.manifold)}};
}

ActionAssignment action_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("presentation") || !j.contains("assignment") ||
      !j.contains("manifold"))
    throw DomainError("action json needs 'presentation', 'assignment' and 'manifold'");
  ActionAssignment a;
  a.presentation.graph = graph_from_json(j.at("presentation"));
  a.manifold = manifold_from_name(j.at("manifold").get<std::string>());
  if (!j.at("assignment").is_object())
    throw DomainError("'assignment' must map generator labels to maps");
  for (const auto& [label, dj] : j.at("assignment").items())
    a.assignment.emplace(label, diffeo_from_json(dj));
  validate(a);
  return a;
}

Diffeo evaluate_word(const std::map<std::string, Diffeo>& assignment, Manifold m,
                     const FreeWord& w) {
  if (w.empty()) return Diffeo::identity(m);
  std::vector<Diffeo> parts;
  parts.reserve(w.letters().size());
  for (const auto& l : w.letters()) {
    auto it = assignment.find(l.gen);
    if (it == assignment.end())
      throw DomainError("word uses unassigned generator '" + l.gen + "'");
    parts.push_back(l.exp == 1 ? it->second : it->second.pow(l.exp));
  }
  return Diffeo::compose(std::move(parts));
}

Diffeo evaluate_word(const ActionAssignment& a, const FreeWord& w) {
  validate(a);
  return evaluate_word(a.assignment, a.manifold, w);
}

ActionCheckReport check_action(const ActionAssignment& a, const RunConfig& cfg) {
  validate(a);
  const auto& g = a.presentation.graph;
  ActionCheckReport rep;
  bool violated = false, undecided = false;
  for (std::size_t i = 0; i < g.order(); ++i) {
    for (std::size_t j = i + 1; j < g.order(); ++j) {
      PairCheck pc;
      pc.u = g.vertices()[i];
      pc.v = g.vertices()[j];
      pc.should_commute = g.adjacent(i, j);
      Displacement d = sup_displacement(
          commutator(a.assignment.at(pc.u), a.assignment.at(pc.v)), cfg);
      pc.commutator_disp = d.value;
      switch (d.nonzero) {
        case Tri::yes: pc.commutes = Tri::no; break;
        case Tri::no: pc.commutes = Tri::yes; break;
        default: pc.commutes = Tri::indeterminate; break;
      }
      if (pc.commutes == Tri::indeterminate) {
        undecided = true;
        rep.notes.push_back("commutator [" + pc.u + ", " + pc.v +
                            "] lands between the identity and nonzero thresholds");
      } else if ((pc.commutes == Tri::yes) != pc.should_commute) {
        violated = true;
      }
      rep.pairs.push_back(std::move(pc));
    }
  }
  for (const auto& v : g.vertices())
    rep.grounded[v] = is_grounded(a.assignment.at(v), cfg);
  rep.ok = violated ? Tri::no : (undecided ? Tri::indeterminate : Tri::yes);
  return rep;
}

nlohmann::json action_check_to_json(const ActionCheckReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"u", p.u},
                     {"v", p.v},
                     {"should_commute", p.should_commute},
                     {"commutes", tri_name(p.commutes)},
                     {"commutator_disp", p.commutator_disp}});
  return {{"ok", tri_name(r.ok)},
          {"pairs", pairs},
          {"grounded", r.grounded},
          {"notes", r.notes}};
}

namespace {

struct CoreChoice {
  int s;
  int t;
  int case_index;
  bool verified;
  double slack;
  Diffeo w;  // u f^t u^-1, the evaluated conjugation word
};

// Shared engine for the sign selection: `conj` plays the conjugator role
// (g at the first stage, the running word afterwards).
CoreChoice choose_signs_core(const Diffeo& f, const Diffeo& conj, const Ival& Y,
                             const Ival& Z, const RunConfig& cfg) {
  const Manifold m = f.manifold();
  const double tol = cfg.tol.geom;
  if (!ival_contains_ival(m, Z, Y, tol))
    throw PreconditionError("Y " + ival_str(Y) + " is not contained in Z " + ival_str(Z));
  IntervalSet sf = support(f, cfg);
  if (sf.is_whole())
    throw PreconditionError("the support of f is the whole manifold");
  for (const auto& c : sf.parts()) {
    if (ival_contains_ival(m, Y, c, tol)) continue;
    if (ivals_disjoint(m, c, Z, tol)) continue;
    throw PreconditionError("support component " + ival_str(c) +
                            " of f meets Z without lying inside Y");
  }
  Ival zimg = image_interval(conj, Z);
  if (!ivals_equal(m, zimg, Z, tol))
    throw PreconditionError("the conjugator does not preserve Z: image " +
                            ival_str(zimg));

  const double p = m == Manifold::circle ? frac(Y.lo) : Y.lo;
  const double q = m == Manifold::circle ? frac(Y.hi) : Y.hi;
  auto coord = [&](double x) { return offset_in(m, Z, x); };
  const double cp = coord(p);
  const double cq = cp + Y.len();

  Diffeo u_plus = conjugate(conj, f);
  int s = coord(u_plus(p)) >= cp - tol ? 1 : -1;
  Diffeo u = s == 1 ? u_plus : conjugate(conj, Diffeo::inverse(f));
  double cup = coord(u(p));
  double cuq = coord(u(q));

  int t = 1, case_index = 1;
  if (cuq <= cq + tol) {
    case_index = 1;
  } else if (cup <= cq + tol) {
    case_index = 2;
    t = coord(conjugate(u, f)(q)) <= cq + tol ? 1 : -1;
  } else {
    case_index = 3;
  }

  Diffeo w = conjugate(u, t == 1 ? f : Diffeo::inverse(f));
  Ival img = image_interval(w, Y);
  double slack = std::max({0.0, cp - coord(img.lo), coord(img.lo) + img.len() - cq});
  return CoreChoice{s, t, case_index, slack <= tol, slack, w};
}

}  // namespace

ConjugationChoice choose_conjugation_signs(const Diffeo& f, const Diffeo& g,
                                           const Ival& Y, const Ival& Z,
                                           const RunConfig& cfg) {
  if (f.manifold() != g.manifold())
    throw DomainError("maps live on different manifolds");
  CoreChoice core = choose_signs_core(f, g, Y, Z, cfg);
  ConjugationChoice out;
  out.s = core.s;
  out.t = core.t;
  out.case_index = core.case_index;
  out.word = successive_conjugation({core.s, core.t});
  out.verified = core.verified;
  out.slack = core.slack;
  return out;
}

nlohmann::json conjugation_choice_to_json(const ConjugationChoice& c) {
  return {{"s", c.s},
          {"t", c.t},
          {"case", c.case_index},
          {"word", word_to_json(c.word)},
          {"verified", c.verified},
          {"slack", c.slack}};
}

NestedConjugationReport nested_conjugation_lemma(const Diffeo& f, const Diffeo& g,
                                                 const std::vector<Ival>& Ys,
                                                 const std::vector<Ival>& Zs, int m,
                                                 const RunConfig& cfg) {
  const Manifold mf = f.manifold();
  if (g.manifold() != mf) throw DomainError("maps live on different manifolds");
  if (m < 0) throw DomainError("m must be nonnegative");
  if (Ys.size() != Zs.size())
    throw DomainError("interval lists must have matching lengths");
  if (static_cast<std::size_t>(m) > Ys.size())
    throw DomainError("m exceeds the number of interval pairs");
  const double tol = cfg.tol.geom;

  for (std::size_t i = 0; i < Ys.size(); ++i)
    if (!ival_contains_ival(mf, Zs[i], Ys[i], tol))
      throw PreconditionError("pair " + std::to_string(i + 1) + ": Y " +
                              ival_str(Ys[i]) + " is not contained in Z " +
                              ival_str(Zs[i]));
  for (std::size_t i = 0; i < Zs.size(); ++i)
    for (std::size_t j = i + 1; j < Zs.size(); ++j)
      if (!ivals_disjoint(mf, Zs[i], Zs[j], tol))
        throw PreconditionError("Z intervals " + std::to_string(i + 1) + " and " +
                                std::to_string(j + 1) + " overlap");
  auto contained_in_some = [&](const Ival& c, const std::vector<Ival>& list) {
    for (const auto& iv : list)
      if (ival_contains_ival(mf, iv, c, tol)) return true;
    return false;
  };
  IntervalSet sf = support(f, cfg);
  if (sf.is_whole())
    throw PreconditionError("the support of f is the whole manifold");
  for (const auto& c : sf.parts())
    if (!contained_in_some(c, Ys))
      throw PreconditionError("support component " + ival_str(c) +
                              " of f lies outside every Y");
  IntervalSet sg = support(g, cfg);
  if (sg.is_whole())
    throw PreconditionError("the support of g is the whole manifold");
  for (const auto& c : sg.parts())
    if (!contained_in_some(c, Zs))
      throw PreconditionError("support component " + ival_str(c) +
                              " of g lies outside every Z");

  NestedConjugationReport rep;
  if (m == 0) {
    rep.signs = {1};
  } else {
    Diffeo conj = g;
    for (int stage = 1; stage <= m; ++stage) {
      CoreChoice core = [&] {
        try {
          return choose_signs_core(f, conj, Ys[static_cast<std::size_t>(stage - 1)],
                                   Zs[static_cast<std::size_t>(stage - 1)], cfg);
        } catch (const PreconditionError& e) {
          throw PreconditionError("stage " + std::to_string(stage) + ": " + e.what());
        }
      }();
      rep.signs.push_back(core.s);
      rep.signs.push_back(core.t);
      rep.cases.push_back(core.case_index);
      conj = core.w;
    }
  }
  rep.word = successive_conjugation(rep.signs);

  std::map<std::string, Diffeo> xy{{"x", f}, {"y", g}};
  Diffeo W = evaluate_word(xy, mf, rep.word);
  bool all_y = true;
  for (int j = 0; j < m; ++j) {
    Ival img = image_interval(W, Ys[static_cast<std::size_t>(j)]);
    bool inside = ival_contains_ival(mf, Ys[static_cast<std::size_t>(j)], img, tol);
    rep.y_containment.push_back(inside);
    all_y = all_y && inside;
    if (!inside)
      rep.notes.push_back("image of Y" + std::to_string(j + 1) + " is " + ival_str(img));
  }
  IntervalSet moved = support(conjugate(W, f), cfg);
  rep.support_contained = !moved.is_whole();
  for (const auto& c : moved.parts()) {
    bool placed = false;
    for (std::size_t j = 0; j < Ys.size() && !placed; ++j)
      placed = j < static_cast<std::size_t>(m)
                   ? ival_contains_ival(mf, Ys[j], c, tol)
                   : ival_contains_ival(mf, Zs[j], c, tol);
    if (!placed) {
      rep.support_contained = false;
      rep.notes.push_back("conjugated support component " + ival_str(c) +
                          " escapes the target union");
    }
  }
  rep.ok = all_y && rep.support_contained;
  return rep;
}

nlohmann::json nested_conjugation_to_json(const NestedConjugationReport& r) {
  return {{"word", word_to_json(r.word)},
          {"signs", r.signs},
          {"cases", r.cases},
          {"y_containment", r.y_containment},
          {"support_contained", r.support_contained},
          {"ok", r.ok},
          {"notes", r.notes}};
}

std::map<std::string, long> central_split_exponents(
    const std::vector<std::string>& generators,
    const std::vector<CommutatorOrder>& orders) {
  std::map<std::string, long> exps;
  for (const auto& v : generators) exps[v] = 1;
  for (const auto& o : orders) {
    if (o.order <= 0)
      throw DomainError("central commutator order must be positive");
    for (const auto& label : {o.u, o.v}) {
      auto it = exps.find(label);
      if (it == exps.end())
        throw DomainError("unknown generator '" + label + "' in commutator table");
      it->second = std::lcm(it->second, o.order);
    }
  }
  return exps;
}

namespace {

bool has_interior_fixed_point(const FixedSet& fs, Manifold m, double tol) {
  if (fs.whole) return true;
  if (m == Manifold::circle) return !fs.points.empty() || !fs.plateaus.empty();
  for (double p : fs.points)
    if (p > tol && p < 1.0 - tol) return true;
  for (const auto& pl : fs.plateaus)
    if (std::min(pl.hi, 1.0 - tol) - std::max(pl.lo, tol) > 0.0) return true;
  return false;
}

}  // namespace

HolderReport holder_diagnostic(const ActionAssignment& a, int ball_radius,
                               const RunConfig& cfg) {
  if (ball_radius < 1) throw DomainError("ball radius must be at least 1");
  validate(a);
  HolderReport rep;
  rep.ball_radius = ball_radius;
  const Manifold m = a.manifold;

  if (a.assignment.size() <= 1) {
    rep.applicable = true;
    rep.free_action = true;
    rep.predicted_abelian = true;
    rep.abelian_verified = Tri::yes;
    rep.findings.push_back("at most one generator: abelian outright");
    return rep;
  }
  for (const auto& [label, d] : a.assignment) {
    Displacement disp = sup_displacement(d, cfg);
    if (disp.nonzero == Tri::no) continue;  // numerically the identity
    if (has_interior_fixed_point(fixed_set(d, cfg), m, cfg.tol.geom)) {
      rep.not_applicable_reason = "grounded elements present: generator '" + label +
                                  "' has interior fixed points";
      return rep;
    }
  }
  rep.applicable = true;

  // Depth-first enumeration in symbol order = lexicographic word order.
  std::vector<std::pair<std::string, int>> symbols;
  for (const auto& [label, d] : a.assignment) {
    symbols.push_back({label, 1});
    symbols.push_back({label, -1});
    (void)d;
  }
  std::set<std::string> seen;  // group elements, by normal form
  rep.free_action = true;
  std::vector<Letter> stack;
  const auto try_word = [&](const FreeWord& w) {
    ReducedWord nf = reduce_in_raag(w, a.presentation);
    if (nf.trivial || !seen.insert(nf.word.str()).second) return true;
    ++rep.words_checked;
    Diffeo W = evaluate_word(a, w);
    if (sup_displacement(W, cfg).nonzero == Tri::no) return true;
    if (has_interior_fixed_point(fixed_set(W, cfg), m, cfg.tol.geom)) {
      rep.free_action = false;
      rep.fixed_word = w.str();
      rep.findings.push_back("word '" + w.str() +
                             "' has interior fixed points; no freeness prediction");
      return false;
    }
    return true;
  };
  const std::function<bool(int)> dfs = [&](int depth) {
    if (depth == ball_radius) return true;
    for (const auto& [label, exp] : symbols) {
      if (!stack.empty() && stack.back().gen == label && stack.back().exp == -exp)
        continue;  // would cancel freely
      stack.push_back({label, exp});
      bool go = try_word(FreeWord::from_letters(stack)) && dfs(depth + 1);
      stack.pop_back();
      if (!go) return false;
    }
    return true;
  };
  dfs(0);

  if (rep.free_action) {
    rep.predicted_abelian = true;
    bool any_yes = false, any_ind = false;
    std::string culprit;
    for (auto i = a.assignment.begin(); i != a.assignment.end(); ++i) {
      for (auto j = std::next(i); j != a.assignment.end(); ++j) {
        Displacement d = sup_displacement(commutator(i->second, j->second), cfg);
        if (d.nonzero == Tri::yes) {
          any_yes = true;
          culprit = "[" + i->first + ", " + j->first + "]";
        } else if (d.nonzero == Tri::indeterminate) {
          any_ind = true;
        }
      }
    }
    if (any_yes) {
      rep.abelian_verified = Tri::no;
      rep.findings.push_back(
          "prediction contradicted: " + culprit +
          " is visibly nontrivial, so freeness must fail beyond radius " +
          std::to_string(ball_radius));
    } else if (any_ind) {
      rep.abelian_verified = Tri::indeterminate;
      rep.findings.push_back("some commutators fall in the indeterminate band");
    } else {
      rep.abelian_verified = Tri::yes;
    }
  }
  return rep;
}

nlohmann::json holder_to_json(const HolderReport& r) {
  return {{"applicable", r.applicable},
          {"not_applicable_reason", r.not_applicable_reason},
          {"ball_radius", r.ball_radius},
          {"words_checked", r.words_checked},
          {"free_action", r.free_action},
          {"fixed_word", r.fixed_word},
          {"predicted_abelian", r.predicted_abelian},
          {"abelian_verified", tri_name(r.abelian_verified)},
          {"findings", r.findings}};
}

RationalityReport rationality_diagnostic(const ActionAssignment& a,
                                         const RunConfig& cfg) {
  if (a.manifold != Manifold::circle)
    throw DomainError("rotation numbers require the circle");
  validate(a);
  RationalityReport rep;
  const auto& g = a.presentation.graph;

  // connectivity of the commutation graph
  if (g.order() == 0) {
    rep.not_applicable_reason = "empty presentation";
    return rep;
  }
  {
    std::vector<char> vis(g.order(), 0);
    std::vector<std::size_t> queue{0};
    vis[0] = 1;
    while (!queue.empty()) {
      std::size_t i = queue.back();
      queue.pop_back();
      for (std::size_t j = 0; j < g.order(); ++j)
        if (!vis[j] && g.adjacent(i, j)) {
          vis[j] = 1;
          queue.push_back(j);
        }
    }
    if (!std::all_of(vis.begin(), vis.end(), [](char c) { return c != 0; })) {
      rep.not_applicable_reason = "commutation graph of the generators is disconnected";
      return rep;
    }
  }
  {
    bool nonabelian = false, any_nonedge = false;
    for (std::size_t i = 0; i < g.order() && !nonabelian; ++i)
      for (std::size_t j = i + 1; j < g.order() && !nonabelian; ++j) {
        if (g.adjacent(i, j)) continue;
        any_nonedge = true;
        Displacement d = sup_displacement(
            commutator(a.assignment.at(g.vertices()[i]), a.assignment.at(g.vertices()[j])),
            cfg);
        nonabelian = d.nonzero == Tri::yes;
      }
    if (!nonabelian) {
      rep.not_applicable_reason =
          any_nonedge ? "no visibly nonabelian pair of generators"
                      : "the presentation declares every pair commuting";
      return rep;
    }
  }
  rep.applicable = true;

  bool any_finite = false;
  for (const auto& [label, d] : a.assignment) {
    RotationRow row;
    row.label = label;
    row.rot = rotation_number(d, cfg);
    row.flagged = !row.rot.rational;
    if (row.rot.rational && row.rot.q >= 1 && row.rot.q <= cfg.period_cap) {
      Displacement pd = sup_displacement(d.pow(static_cast<int>(row.rot.q)), cfg);
      if (pd.nonzero == Tri::no) row.finite_order = static_cast<int>(row.rot.q);
    }
    any_finite = any_finite || row.finite_order > 0;
    if (row.flagged) rep.any_flagged = true;
    rep.rows.push_back(std::move(row));
  }
  rep.notes.push_back(
      "orders are certified only up to the period cap of " +
      std::to_string(cfg.period_cap) +
      "; 'infinite order' here means no power up to that cap is the identity");
  if (rep.any_flagged && any_finite)
    rep.notes.push_back(
        "a finite-order generator is present, so an irrational rotation number is "
        "not a contradiction: the rationality conclusion needs every generator to "
        "have infinite order");
  return rep;
}

nlohmann::json rationality_to_json(const RationalityReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"label", row.label},
                    {"value", row.rot.value},
                    {"rational", row.rot.rational},
                    {"p", row.rot.p},
                    {"q", row.rot.q},
                    {"converged", row.rot.converged},
                    {"flagged", row.flagged},
                    {"finite_order", row.finite_order}});
  return {{"applicable", r.applicable},
          {"not_applicable_reason", r.not_applicable_reason},
          {"rows", rows},
          {"any_flagged", r.any_flagged},
          {"notes", r.notes}};
}

}  // namespace onedim
