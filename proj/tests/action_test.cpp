#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "constructions.hpp"
#include "onedim/action.hpp"
#include "onedim/analysis.hpp"
#include "onedim/errors.hpp"

using namespace onedim;
using namespace onedim::testing;
using doctest::Approx;

namespace {

template <class E, class Fn>
std::string message_of(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  } catch (...) {
    return "(wrong exception type)";
  }
  return "(no exception)";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// f sits in two small windows, g in two larger ones around them.
Diffeo two_window_f() {
  return Diffeo::compose({Diffeo::bump_push(Manifold::interval, 0.2, 0.3, 0.02),
                          Diffeo::bump_push(Manifold::interval, 0.6, 0.7, 0.02)});
}
Diffeo two_window_g() {
  return Diffeo::compose({Diffeo::bump_push(Manifold::interval, 0.1, 0.4, 0.09),
                          Diffeo::bump_push(Manifold::interval, 0.5, 0.8, 0.09)});
}

ActionAssignment pair_action(const std::string& ulabel, Diffeo u,
                             const std::string& vlabel, Diffeo v, bool edge,
                             Manifold m) {
  std::vector<std::pair<std::string, std::string>> edges;
  if (edge) edges.push_back({ulabel, vlabel});
  ActionAssignment a;
  a.presentation.graph = SimplicialGraph({ulabel, vlabel}, edges);
  a.assignment = {{ulabel, std::move(u)}, {vlabel, std::move(v)}};
  a.manifold = m;
  return a;
}

}  // namespace

TEST_CASE("word evaluation is a homomorphism into the diffeomorphism group") {
  ActionAssignment trio = trio_action();

  // b is an involution: b^2 evaluates to the identity
  Diffeo b2 = evaluate_word(trio, FreeWord::parse("b^2"));
  CHECK(sup_displacement(b2).nonzero == Tri::no);

  Diffeo e = evaluate_word(trio, FreeWord());
  CHECK(sup_displacement(e).nonzero == Tri::no);

  FreeWord w1 = FreeWord::parse("a b");
  FreeWord w2 = FreeWord::parse("c a^-1");
  Diffeo lhs = evaluate_word(trio, w1 * w2);
  Diffeo d1 = evaluate_word(trio, w1);
  Diffeo d2 = evaluate_word(trio, w2);
  for (int i = 0; i <= 32; ++i) {
    double x = i / 32.0;
    CHECK(lhs(x) == Approx(d1(d2(x))).epsilon(1e-10).scale(1));
  }

  // leftmost letter is applied last, like function composition
  Diffeo ab = evaluate_word(trio, FreeWord::parse("a b"));
  double x = 0.2;
  CHECK(ab(x) == Approx(trio.assignment.at("a")(trio.assignment.at("b")(x)))
                     .epsilon(0)
                     .epsilon(1e-12).scale(1));

  CHECK_THROWS_AS(evaluate_word(trio, FreeWord::parse("z")), DomainError);
}

TEST_CASE("relation checking on the three-generator circle action") {
  ActionCheckReport rep = check_action(trio_action());
  CHECK(rep.ok == Tri::yes);
  REQUIRE(rep.pairs.size() == 3);
  for (const auto& pc : rep.pairs) {
    CHECK((pc.commutes == Tri::yes) == pc.should_commute);
    if (pc.u == "a" && pc.v == "c") {
      CHECK_FALSE(pc.should_commute);
      CHECK(pc.commutator_disp > 1e-3);
    } else {
      CHECK(pc.commutator_disp < 1e-8);
    }
  }
  CHECK_FALSE(rep.grounded.at("a"));
  CHECK_FALSE(rep.grounded.at("b"));
  CHECK(rep.grounded.at("c"));
}

TEST_CASE("relation checking flags unfaithful and broken assignments") {
  // four rotations satisfy every relation but also commute where they
  // should not
  ActionCheckReport rot = check_action(rotations_action());
  CHECK(rot.ok == Tri::no);
  for (const auto& pc : rot.pairs) CHECK(pc.commutes == Tri::yes);

  ActionCheckReport win = check_action(window_action(WindowParams{}));
  CHECK(win.ok == Tri::yes);
  CHECK(win.pairs.size() == 6);
  for (const auto& [label, g] : win.grounded) CHECK(g);
}

TEST_CASE("sign selection maps the inner interval into itself") {
  Diffeo f = two_window_f();
  Diffeo g = two_window_g();
  Ival Z{0.1, 0.4};

  ConjugationChoice c2 = choose_conjugation_signs(f, g, Ival{0.2, 0.3}, Z);
  CHECK(c2.case_index == 2);
  CHECK(c2.s == 1);
  CHECK((c2.t == 1 || c2.t == -1));
  CHECK(c2.verified);
  CHECK(c2.slack <= 1e-8);
  CHECK(c2.word.length() == 7);
  CHECK(c2.word.exponent_sum("y") == 0);

  // widening Y past the image of the support puts u(q) = q: case 1
  ConjugationChoice c1 = choose_conjugation_signs(f, g, Ival{0.2, 0.39}, Z);
  CHECK(c1.case_index == 1);
  CHECK(c1.t == 1);
  CHECK(c1.verified);
}

TEST_CASE("sign selection rejects malformed inputs") {
  Diffeo f = two_window_f();
  Diffeo g = two_window_g();

  CHECK_THROWS_AS(choose_conjugation_signs(f, g, Ival{0.05, 0.3}, Ival{0.1, 0.4}),
                  PreconditionError);
  CHECK(contains(message_of<PreconditionError>([&] {
          choose_conjugation_signs(f, g, Ival{0.05, 0.3}, Ival{0.1, 0.4});
        }),
        "is not contained in Z"));

  // the f-support component (0.2,0.3) meets Z without sitting inside Y
  CHECK(contains(message_of<PreconditionError>([&] {
          choose_conjugation_signs(f, g, Ival{0.21, 0.25}, Ival{0.1, 0.4});
        }),
        "meets Z without lying inside Y"));

  Diffeo bad_g = Diffeo::bump_push(Manifold::interval, 0.05, 0.45, 0.09);
  CHECK(contains(message_of<PreconditionError>([&] {
          choose_conjugation_signs(f, bad_g, Ival{0.2, 0.3}, Ival{0.1, 0.4});
        }),
        "the conjugator does not preserve Z"));

  CHECK_THROWS_AS(choose_conjugation_signs(f, Diffeo::rotation(0.1), Ival{0.2, 0.3},
                                           Ival{0.1, 0.4}),
                  DomainError);
}

TEST_CASE("nested conjugation pushes the support into the targets") {
  Diffeo f = two_window_f();
  Diffeo g = two_window_g();
  std::vector<Ival> Ys{{0.2, 0.3}, {0.6, 0.7}};
  std::vector<Ival> Zs{{0.1, 0.4}, {0.5, 0.8}};

  auto r0 = nested_conjugation_lemma(f, g, Ys, Zs, 0);
  CHECK(r0.ok);
  CHECK(r0.support_contained);
  CHECK(r0.word == FreeWord::parse("y x y^-1"));
  CHECK(r0.signs == std::vector<int>{1});
  CHECK(r0.cases.empty());
  CHECK(r0.y_containment.empty());

  auto r1 = nested_conjugation_lemma(f, g, Ys, Zs, 1);
  CHECK(r1.ok);
  CHECK(r1.support_contained);
  REQUIRE(r1.signs.size() == 2);
  REQUIRE(r1.cases.size() == 1);
  REQUIRE(r1.y_containment.size() == 1);
  CHECK(r1.y_containment[0]);
  CHECK(r1.word.length() == 7);

  auto r2 = nested_conjugation_lemma(f, g, Ys, Zs, 2);
  CHECK(r2.ok);
  CHECK(r2.support_contained);
  REQUIRE(r2.signs.size() == 4);
  REQUIRE(r2.cases.size() == 2);
  REQUIRE(r2.y_containment.size() == 2);
  CHECK(r2.y_containment[0]);
  CHECK(r2.y_containment[1]);
  CHECK(r2.word.length() == 31);
  CHECK(r2.notes.empty());
}

TEST_CASE("nested conjugation rejects malformed interval systems") {
  Diffeo f = two_window_f();
  Diffeo g = two_window_g();
  std::vector<Ival> Ys{{0.2, 0.3}, {0.6, 0.7}};
  std::vector<Ival> Zs{{0.1, 0.4}, {0.5, 0.8}};

  CHECK_THROWS_AS(nested_conjugation_lemma(f, g, Ys, Zs, -1), DomainError);
  CHECK_THROWS_AS(nested_conjugation_lemma(f, g, Ys, Zs, 3), DomainError);
  CHECK_THROWS_AS(nested_conjugation_lemma(f, g, Ys, {{0.1, 0.4}}, 1), DomainError);

  CHECK(contains(message_of<PreconditionError>([&] {
          nested_conjugation_lemma(f, g, {{0.05, 0.3}, {0.6, 0.7}}, Zs, 2);
        }),
        "pair 1: Y"));

  CHECK(contains(message_of<PreconditionError>([&] {
          nested_conjugation_lemma(f, g, Ys, {{0.1, 0.4}, {0.35, 0.8}}, 2);
        }),
        "Z intervals 1 and 2 overlap"));

  CHECK(contains(message_of<PreconditionError>([&] {
          nested_conjugation_lemma(f, g, {{0.21, 0.25}, {0.6, 0.7}}, Zs, 2);
        }),
        "of f lies outside every Y"));

  CHECK(contains(message_of<PreconditionError>([&] {
          nested_conjugation_lemma(f, g, {{0.2, 0.3}, {0.6, 0.7}},
                                   {{0.15, 0.4}, {0.5, 0.8}}, 2);
        }),
        "of g lies outside every Z"));
}

TEST_CASE("central splitting exponents kill finite-order commutators") {
  auto exps = central_split_exponents(
      {"a", "b", "c", "d"},
      {CommutatorOrder{"a", "b", 2}, CommutatorOrder{"b", "c", 3}});
  CHECK(exps.at("a") == 2);
  CHECK(exps.at("b") == 6);
  CHECK(exps.at("c") == 3);
  CHECK(exps.at("d") == 1);

  CHECK_THROWS_AS(central_split_exponents({"a", "b"}, {CommutatorOrder{"a", "b", 0}}),
                  DomainError);
  CHECK_THROWS_AS(central_split_exponents({"a"}, {CommutatorOrder{"a", "z", 2}}),
                  DomainError);
}

TEST_CASE("freeness screen on a fixed-point-free abelian pair") {
  ActionAssignment rots = pair_action("a", Diffeo::rotation(0.3), "b",
                                      Diffeo::rotation(0.41), true, Manifold::circle);
  HolderReport rep = holder_diagnostic(rots, 3);
  CHECK(rep.applicable);
  CHECK(rep.words_checked > 0);
  CHECK(rep.free_action);
  CHECK(rep.fixed_word.empty());
  CHECK(rep.predicted_abelian);
  CHECK(rep.abelian_verified == Tri::yes);
}

TEST_CASE("freeness screen bails out when a generator is grounded") {
  HolderReport rep = holder_diagnostic(trio_action(), 2);
  CHECK_FALSE(rep.applicable);
  CHECK(rep.not_applicable_reason ==
        "grounded elements present: generator 'c' has interior fixed points");
}

TEST_CASE("freeness screen with one generator is abelian outright") {
  ActionAssignment solo;
  solo.presentation.graph = SimplicialGraph({"a"}, {});
  solo.assignment = {{"a", Diffeo::rotation(0.3)}};
  solo.manifold = Manifold::circle;
  HolderReport rep = holder_diagnostic(solo, 2);
  CHECK(rep.applicable);
  CHECK(rep.free_action);
  CHECK(rep.abelian_verified == Tri::yes);
  REQUIRE(rep.findings.size() == 1);
  CHECK(rep.findings[0] == "at most one generator: abelian outright");
}

TEST_CASE("freeness screen finds a word with interior fixed points") {
  // u presses down, v presses up; some short mixed word must cross the
  // diagonal in the interior
  Diffeo u = Diffeo::spline(Manifold::interval, {0.0, 0.5, 1.0}, {0.0, 0.4, 1.0},
                            {1.0, 0.8, 1.0});
  Diffeo v = Diffeo::spline(Manifold::interval, {0.0, 0.5, 1.0}, {0.0, 0.6, 1.0},
                            {1.0, 0.8, 1.0});
  ActionAssignment a = pair_action("u", u, "v", v, false, Manifold::interval);
  HolderReport rep = holder_diagnostic(a, 2);
  CHECK(rep.applicable);
  CHECK_FALSE(rep.free_action);
  CHECK_FALSE(rep.fixed_word.empty());
  REQUIRE(rep.findings.size() == 1);
  CHECK(contains(rep.findings[0], "has interior fixed points"));

  CHECK_THROWS_AS(holder_diagnostic(a, 0), DomainError);
}

TEST_CASE("rationality diagnostic on the three-generator circle action") {
  RationalityReport rep = rationality_diagnostic(trio_action());
  CHECK(rep.applicable);
  CHECK(rep.any_flagged);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& row : rep.rows) {
    if (row.label == "a") {
      CHECK(row.flagged);
      CHECK(row.finite_order == 0);
      CHECK(std::fabs(row.rot.value - trio_a_rot()) <= 1e-6);
    } else if (row.label == "b") {
      CHECK_FALSE(row.flagged);
      CHECK(row.rot.q == 2);
      CHECK(row.finite_order == 2);
    } else {
      CHECK_FALSE(row.flagged);
      CHECK(row.rot.value == 0.0);
      CHECK(row.finite_order == 0);
    }
  }
  REQUIRE(rep.notes.size() == 2);
  CHECK(contains(rep.notes[0], "period cap of 32"));
  CHECK(contains(rep.notes[1], "a finite-order generator is present"));
}

TEST_CASE("rationality diagnostic on a grounded circle action has no flags") {
  WindowParams p;
  p.manifold = Manifold::circle;
  RationalityReport rep = rationality_diagnostic(window_action(p));
  CHECK(rep.applicable);
  CHECK_FALSE(rep.any_flagged);
  REQUIRE(rep.rows.size() == 4);
  for (const auto& row : rep.rows) {
    CHECK(row.rot.value == 0.0);
    CHECK(row.rot.rational);
  }
}

TEST_CASE("rationality diagnostic reports why it does not apply") {
  RationalityReport r1 = rationality_diagnostic(rotations_action());
  CHECK_FALSE(r1.applicable);
  CHECK(r1.not_applicable_reason == "no visibly nonabelian pair of generators");

  ActionAssignment complete = pair_action("a", trio_a(), "b", trio_b(), true,
                                          Manifold::circle);
  RationalityReport r2 = rationality_diagnostic(complete);
  CHECK_FALSE(r2.applicable);
  CHECK(r2.not_applicable_reason == "the presentation declares every pair commuting");

  ActionAssignment split;
  split.presentation.graph = SimplicialGraph({"a", "b", "c", "d"},
                                             {{"a", "b"}, {"c", "d"}});
  split.assignment = {{"a", Diffeo::rotation(0.1)},
                      {"b", Diffeo::rotation(0.2)},
                      {"c", Diffeo::rotation(0.3)},
                      {"d", Diffeo::rotation(0.4)}};
  split.manifold = Manifold::circle;
  RationalityReport r3 = rationality_diagnostic(split);
  CHECK_FALSE(r3.applicable);
  CHECK(r3.not_applicable_reason ==
        "commutation graph of the generators is disconnected");

  ActionAssignment none;
  none.presentation.graph = SimplicialGraph({}, {});
  none.manifold = Manifold::circle;
  RationalityReport r4 = rationality_diagnostic(none);
  CHECK_FALSE(r4.applicable);
  CHECK(r4.not_applicable_reason == "empty presentation");

  CHECK_THROWS_AS(rationality_diagnostic(window_action(WindowParams{})), DomainError);
}

TEST_CASE("actions as json") {
  ActionAssignment a = trio_action();
  ActionAssignment back = action_from_json(action_to_json(a));
  CHECK(back.manifold == a.manifold);
  CHECK(back.presentation.graph.order() == 3);
  for (const auto& [label, d] : a.assignment) {
    const Diffeo& bd = back.assignment.at(label);
    for (int i = 0; i <= 16; ++i) {
      double x = i / 16.0;
      CHECK(bd.lift(x) == Approx(d.lift(x)).epsilon(1e-12).scale(1));
    }
  }

  CHECK_THROWS_AS(action_from_json(nlohmann::json{{"assignment", {}}}), DomainError);

  // assignments must cover every generator on the right manifold
  ActionAssignment missing;
  missing.presentation.graph = SimplicialGraph({"a", "b"}, {});
  missing.assignment = {{"a", Diffeo::rotation(0.25)}};
  missing.manifold = Manifold::circle;
  CHECK_THROWS_AS(check_action(missing), DomainError);

  ActionAssignment wrong;
  wrong.presentation.graph = SimplicialGraph({"a"}, {});
  wrong.assignment = {{"a", Diffeo::rotation(0.25)}};
  wrong.manifold = Manifold::interval;
  CHECK_THROWS_AS(check_action(wrong), DomainError);
}
