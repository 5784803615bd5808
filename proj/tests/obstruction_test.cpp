#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "constructions.hpp"
#include "onedim/analysis.hpp"
#include "onedim/errors.hpp"
#include "onedim/obstruction.hpp"

using namespace onedim;
using namespace onedim::testing;
using doctest::Approx;

namespace {

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

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

Diffeo random_grounded(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nb(1, 2);
  int n = nb(gen);
  std::vector<Diffeo> parts;
  double cursor = 0.02;
  for (int i = 0; i < n; ++i) {
    double lo = cursor + u(gen) * (0.9 - cursor) * 0.5;
    double len = 0.05 + 0.25 * u(gen);
    double hi = std::min(lo + len, 0.98);
    if (hi - lo < 0.02) break;
    double smax = 0.8 * (hi - lo) / std::numbers::pi;
    double s = (u(gen) * 2.0 - 1.0) * smax;
    if (std::fabs(s) < 1e-3) s = smax / 2.0;
    parts.push_back(Diffeo::bump_push(Manifold::interval, lo, hi, s));
    cursor = hi + 0.01;
    if (cursor > 0.9) break;
  }
  if (parts.empty())
    parts.push_back(Diffeo::bump_push(Manifold::interval, 0.3, 0.5, 0.03));
  return parts.size() == 1 ? parts[0] : Diffeo::compose(parts);
}

}  // namespace

TEST_CASE("commutator region of overlapping unequal window supports") {
  ActionAssignment win = window_action(WindowParams{});
  CommutatorRegion r =
      commutator_region(win.assignment.at("b"), win.assignment.at("c"));
  REQUIRE(r.components.size() == 2);
  for (const auto& c : r.components) CHECK(c.reason == "overlap-unequal");
  REQUIRE(r.region.size() == 1);
  CHECK(r.region.parts()[0].lo == Approx(0.09).epsilon(1e-9).scale(1));
  CHECK(r.region.parts()[0].hi == Approx(0.33).epsilon(1e-9).scale(1));
  CHECK(r.region.contains(0.2, 0.0));
  CHECK(r.post_check_ok);
  CHECK(r.notes.empty());
}

TEST_CASE("commutator region is empty for disjointly supported maps") {
  CommutatorRegion r =
      commutator_region(Diffeo::bump_push(Manifold::interval, 0.1, 0.2, 0.01),
                        Diffeo::bump_push(Manifold::interval, 0.3, 0.4, 0.01));
  CHECK(r.components.empty());
  CHECK(r.region.is_empty());
  CHECK(r.post_check_ok);
}

TEST_CASE("whole-support maps count as one full component") {
  // the half rotation commutes exactly with the two-lobe perturbation, but
  // its support is everything, so the region conservatively covers the circle
  CommutatorRegion r = commutator_region(trio_b(), trio_c());
  CHECK_FALSE(r.components.empty());
  CHECK(r.region.measure() == Approx(1.0).epsilon(1e-9).scale(1));
  CHECK(r.region.contains(0.37, 0.0));
  CHECK(r.post_check_ok);
}

TEST_CASE("shared support components are classified by restricted displacement") {
  Diffeo f = Diffeo::bump_push(Manifold::interval, 0.2, 0.4, 0.02);
  Diffeo g = Diffeo::bump_push(Manifold::interval, 0.2, 0.4, -0.03);
  CommutatorRegion r = commutator_region(f, g);
  REQUIRE(r.components.size() == 1);
  CHECK(r.components[0].reason == "shared-nonabelian");
  CHECK(r.components[0].part.lo == Approx(0.2).epsilon(1e-9).scale(1));
  CHECK(r.components[0].part.hi == Approx(0.4).epsilon(1e-9).scale(1));
  CHECK(r.post_check_ok);

  Diffeo tf = Diffeo::bump_push(Manifold::interval, 0.2, 0.4, 1e-3);
  Diffeo tg = Diffeo::bump_push(Manifold::interval, 0.2, 0.4, -1.5e-3);
  CommutatorRegion tiny = commutator_region(tf, tg);
  REQUIRE(tiny.components.size() == 1);
  CHECK(tiny.components[0].reason == "indeterminate-shared");
  REQUIRE(tiny.notes.size() == 1);
  CHECK(contains(tiny.notes[0], "included conservatively"));
}

TEST_CASE("sampled commutator support stays inside the region") {
  auto gen = rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    Diffeo f = random_grounded(gen);
    Diffeo g = random_grounded(gen);
    CommutatorRegion r = commutator_region(f, g);
    CHECK(r.post_check_ok);
  }
}

TEST_CASE("disjointness check on commuting grounded maps") {
  Diffeo f = Diffeo::bump_push(Manifold::interval, 0.2, 0.4, 0.01);

  DisjointnessReport same = disjointness_check(f, f.pow(2));
  CHECK(same.pass);
  CHECK(same.detail == "every component pair is equal or disjoint");

  DisjointnessReport apart =
      disjointness_check(f, Diffeo::bump_push(Manifold::interval, 0.6, 0.8, 0.01));
  CHECK(apart.pass);

  // nearly-identity strengths keep the commutator below the identity
  // threshold, so the precondition passes and the overlap is caught
  Diffeo wf = Diffeo::bump_push(Manifold::interval, 0.2, 0.4, 1e-6);
  Diffeo wg = Diffeo::bump_push(Manifold::interval, 0.3, 0.5, 1e-6);
  DisjointnessReport bad = disjointness_check(wf, wg);
  CHECK_FALSE(bad.pass);
  CHECK(bad.f_part.lo == Approx(0.2).epsilon(1e-9).scale(1));
  CHECK(bad.f_part.hi == Approx(0.4).epsilon(1e-9).scale(1));
  CHECK(bad.g_part.lo == Approx(0.3).epsilon(1e-9).scale(1));
  CHECK(bad.g_part.hi == Approx(0.5).epsilon(1e-9).scale(1));
  CHECK(contains(bad.detail, "overlap without agreeing"));
}

TEST_CASE("disjointness check enforces its preconditions") {
  Diffeo f = Diffeo::bump_push(Manifold::interval, 0.2, 0.4, 0.03);
  Diffeo g = Diffeo::bump_push(Manifold::interval, 0.3, 0.5, 0.03);
  CHECK(contains(message_of<PreconditionError>([&] { disjointness_check(f, g); }),
                 "requires commuting maps"));
  CHECK(contains(message_of<PreconditionError>([&] {
          disjointness_check(Diffeo::rotation(0.3), Diffeo::rotation(0.4));
        }),
        "requires grounded maps"));
  CHECK_THROWS_AS(disjointness_check(f, Diffeo::rotation(0.3)), DomainError);
}

TEST_CASE("chain detection on the staircase of windows") {
  auto chains = detect_chains(window_action(WindowParams{}));
  REQUIRE(chains.size() == 1);
  const ChainWitness& w = chains[0];
  CHECK(w.roles == std::array<std::string, 4>{{"a", "b", "c", "d"}});
  const double lo[4] = {0.01, 0.09, 0.17, 0.25};
  for (int i = 0; i < 4; ++i) {
    CHECK(w.intervals[i].lo == Approx(lo[i]).epsilon(1e-9).scale(1));
    CHECK(w.intervals[i].hi == Approx(lo[i] + 0.16).epsilon(1e-9).scale(1));
  }
  CHECK(w.x == Approx(0.11664062).epsilon(1e-6).scale(1));
  CHECK(w.bx == Approx(0.19314512).epsilon(1e-6).scale(1));
  CHECK(w.cbx == Approx(0.25193278).epsilon(1e-6).scale(1));

  ActionAssignment win = window_action(WindowParams{});
  CHECK(w.bx == Approx(win.assignment.at("b")(w.x)).epsilon(1e-12).scale(1));
  CHECK(w.cbx == Approx(win.assignment.at("c")(w.bx)).epsilon(1e-12).scale(1));
}

TEST_CASE("chain detection finds every scale of the cascade") {
  auto chains = detect_chains(cascade_action());
  REQUIRE(chains.size() == 4);
  const double origins[4] = {0.01, 0.55, 0.70, 0.74};
  for (int k = 0; k < 4; ++k) {
    double u = 0.02 / std::pow(4.0, k);
    for (int j = 0; j < 4; ++j) {
      CHECK(chains[k].intervals[j].lo ==
            Approx(origins[k] + 4.0 * u * j).epsilon(1e-9).scale(1));
      CHECK(chains[k].intervals[j].hi ==
            Approx(origins[k] + 4.0 * u * j + 8.0 * u).epsilon(1e-9).scale(1));
    }
  }
  CHECK(chains[0].x == Approx(0.11664062).epsilon(1e-6).scale(1));
}

TEST_CASE("chain detection degenerate cases") {
  CHECK(detect_chains(abelian_bumps_action()).empty());
  CHECK(contains(message_of<PreconditionError>(
                     [&] { detect_chains(rotations_action()); }),
                 "requires grounded generators"));
}

TEST_CASE("envelopes of the window action") {
  ActionAssignment win = window_action(WindowParams{});
  EnvelopeReport rep = compute_envelopes(win);
  CHECK(rep.findings.empty());
  REQUIRE(rep.envelopes.size() == 2);

  const Envelope& e0 = rep.envelopes[0];
  CHECK(e0.Y.lo == Approx(0.0).epsilon(1e-9).scale(1));
  CHECK(e0.Y.hi == Approx(0.17).epsilon(1e-9).scale(1));
  CHECK(e0.Z.lo == Approx(0.0).epsilon(1e-9).scale(1));
  double cb_top = win.assignment.at("c")(win.assignment.at("b")(0.17));
  CHECK(e0.Z.hi == Approx(cb_top).epsilon(1e-9).scale(1));
  CHECK(e0.Z.hi == Approx(0.3184293555).epsilon(1e-6).scale(1));
  CHECK(e0.in_region0);

  const Envelope& e1 = rep.envelopes[1];
  CHECK(e1.Y.lo == Approx(0.41).epsilon(1e-9).scale(1));
  CHECK(e1.Y.hi == Approx(1.0).epsilon(1e-9).scale(1));
  CHECK(e1.Z.lo == Approx(e1.Y.lo).epsilon(1e-12).scale(1));
  CHECK(e1.Z.hi == Approx(e1.Y.hi).epsilon(1e-12).scale(1));
  CHECK_FALSE(e1.in_region0);
}

TEST_CASE("envelopes of a fully commuting assignment cover everything") {
  EnvelopeReport rep = compute_envelopes(abelian_bumps_action());
  CHECK(rep.findings.empty());
  REQUIRE(rep.envelopes.size() == 1);
  CHECK(rep.envelopes[0].Y.lo == Approx(0.0).epsilon(1e-12).scale(1));
  CHECK(rep.envelopes[0].Y.hi == Approx(1.0).epsilon(1e-12).scale(1));
  CHECK(rep.envelopes[0].Z.len() == Approx(rep.envelopes[0].Y.len()).epsilon(1e-9));
  CHECK_FALSE(rep.envelopes[0].in_region0);

  CHECK_THROWS_AS(compute_envelopes(rotations_action()), PreconditionError);
}

TEST_CASE("interval pairs feeding the chain search") {
  ActionAssignment win = window_action(WindowParams{});
  PropositionReport one = find_proposition_intervals(win, 1);
  REQUIRE(one.pairs.size() == 1);
  CHECK_FALSE(one.exhausted);
  const PropositionPair& p = one.pairs[0];
  CHECK(p.chain_found);
  CHECK(p.Ia.lo == Approx(0.01).epsilon(1e-9).scale(1));
  CHECK(p.Ia.hi == Approx(0.17).epsilon(1e-9).scale(1));
  CHECK(p.Id.lo == Approx(0.25).epsilon(1e-9).scale(1));
  CHECK(p.Id.hi == Approx(0.41).epsilon(1e-9).scale(1));
  CHECK(p.cb_Ia.lo == Approx(0.01).epsilon(1e-6).scale(1));
  CHECK(p.cb_Ia.hi == Approx(0.3184293555).epsilon(1e-6).scale(1));

  PropositionReport four = find_proposition_intervals(win, 4);
  CHECK(four.pairs.size() == 1);
  CHECK(four.exhausted);

  PropositionReport c4 = find_proposition_intervals(cascade_action(), 4);
  CHECK(c4.pairs.size() == 4);
  CHECK_FALSE(c4.exhausted);
  for (const auto& pr : c4.pairs) CHECK(pr.chain_found);

  PropositionReport c8 = find_proposition_intervals(cascade_action(), 8);
  CHECK(c8.pairs.size() == 4);
  CHECK(c8.exhausted);

  PropositionReport clipped = find_proposition_intervals(cascade_action(), 1);
  CHECK(clipped.pairs.size() == 1);
  CHECK_FALSE(clipped.exhausted);
  REQUIRE(clipped.notes.size() == 1);
  CHECK(contains(clipped.notes[0], "budget reached"));

  CHECK_THROWS_AS(find_proposition_intervals(win, 0), DomainError);
}

TEST_CASE("derivative probes accept the symmetric and asymmetric jump pairs") {
  for (double r : {1.0, 2.0, 5.0}) {
    double y = r > 4.0 ? 0.15 : r > 1.0 ? 0.3 : 0.5;
    for (int k = 3; k <= 10; ++k) {
      double h = std::pow(2.0, -k);
      JumpPair jp = jump_pair(Manifold::interval, y, h, r);
      TwoJumpsReport rep = two_jumps(jp.f, jp.g, {jp.config});
      CHECK(rep.rejections.empty());
      REQUIRE(rep.witnesses.size() == 1);
      const TwoJumpsWitness& w = rep.witnesses[0];
      CHECK(w.accepted);
      CHECK_FALSE(w.mirrored);
      CHECK(w.bound == Approx(jp.bound).epsilon(1e-12));
      CHECK(w.quotient_g == Approx(1.0 + r).epsilon(1e-5).scale(1));
      CHECK(w.quotient_f == Approx(1.0 + 1.0 / r).epsilon(1e-5).scale(1));
      CHECK(w.product >= w.bound - 1e-9);
      CHECK(w.product <= w.bound + 1e-4);
      CHECK(w.s == Approx(y - h).epsilon(1e-8).scale(1));
      CHECK(w.t == Approx(y + r * h).epsilon(1e-8).scale(1));
      CHECK(w.deriv_g_u >= w.quotient_g - 1e-6);
      CHECK(w.deriv_f_v >= w.quotient_f - 1e-6);
      CHECK(w.bound >= 4.0 - 1e-12);
    }
  }
}

TEST_CASE("derivative probes track a swapped configuration as mirrored") {
  JumpPair jp = jump_pair(Manifold::interval, 0.5, 0.0625, 1.0);
  TwoJumpsReport rep = two_jumps(jp.g, jp.f, {jp.config});
  REQUIRE(rep.witnesses.size() == 1);
  CHECK(rep.witnesses[0].mirrored);
  CHECK(rep.witnesses[0].accepted);
  CHECK(rep.witnesses[0].product == Approx(4.0).epsilon(1e-6));
}

TEST_CASE("derivative probes work on the circle") {
  JumpPair jp = jump_pair(Manifold::circle, 0.5, 0.0625, 1.0);
  TwoJumpsReport rep = two_jumps(jp.f, jp.g, {jp.config});
  REQUIRE(rep.witnesses.size() == 1);
  CHECK(rep.witnesses[0].accepted);
  CHECK(rep.witnesses[0].product >= 4.0 - 1e-6);
}

TEST_CASE("derivative probes reject malformed configurations with reasons") {
  JumpPair jp = jump_pair(Manifold::interval, 0.5, 0.0625, 2.0);
  std::vector<TwoJumpsConfig> cfgs{
      {0.5, Ival{0.5, 0.5 + 1e-10}},        // nothing to measure
      {0.9, Ival{0.4, 0.6}},                // y outside
      {0.8, Ival{0.7, 0.9}},                // f (and g) fix y
      {0.5, Ival{0.3, 0.7}},                // ends are not f(y), g(y)
  };
  TwoJumpsReport rep = two_jumps(jp.f, jp.g, cfgs);
  CHECK(rep.witnesses.empty());
  REQUIRE(rep.rejections.size() == 4);
  CHECK(rep.rejections[0] == "config 0: interval has negligible length");
  CHECK(rep.rejections[1] == "config 1: y is not interior to the interval");
  CHECK(rep.rejections[2] == "config 2: f fixes y");
  CHECK(rep.rejections[3] == "config 3: interval is not bounded by f(y) and g(y)");

  CHECK_THROWS_AS(
      two_jumps(jp.f, Diffeo::rotation(0.2), {jp.config}), DomainError);
}

TEST_CASE("interval-swap probes on the window pair certify one witness") {
  ActionAssignment win = window_action(WindowParams{});
  const Diffeo& b = win.assignment.at("b");
  const Diffeo& c = win.assignment.at("c");

  FgReport rep = fg_obstruction(b, c, {Ival{0.09, 0.25}}, {Ival{0.17, 0.33}},
                                {0.11664062});
  CHECK(rep.rejections.empty());
  REQUIRE(rep.witnesses.size() == 1);
  const TwoJumpsWitness& w = rep.witnesses[0];
  CHECK(w.accepted);
  CHECK(w.I.len() == Approx(0.13529215).epsilon(1e-6).scale(1));
  CHECK(w.quotient_g == Approx(3.5400).epsilon(1e-3));
  CHECK(w.quotient_f == Approx(2.3456).epsilon(1e-3));
  CHECK(w.product == Approx(8.3034).epsilon(1e-3));
  CHECK(w.bound == Approx(4.0698).epsilon(1e-3));
  CHECK(w.product >= w.bound - 1e-6);
  CHECK_FALSE(rep.family);
  CHECK(rep.conclusion ==
        "isolated probes certified (product >= 4), but no shrinking family of "
        "at least three was assembled");

  FgReport bad = fg_obstruction(b, c, {Ival{0.09, 0.2}}, {Ival{0.17, 0.33}},
                                {0.11664062});
  CHECK(bad.witnesses.empty());
  REQUIRE(bad.rejections.size() == 1);
  CHECK(bad.rejections[0] == "index 0: f does not preserve its interval");

  CHECK_THROWS_AS(fg_obstruction(b, c, {Ival{0.09, 0.25}}, {}, {0.11}), DomainError);
}

TEST_CASE("full analysis certifies the shrinking cascade") {
  P4Analysis an = analyze_p4_action(cascade_action());
  CHECK(an.verdict == P4Verdict::blowup_witness);
  CHECK(std::string(p4_verdict_name(an.verdict)) == "BLOWUP-WITNESS");
  CHECK(an.relations.ok == Tri::yes);
  CHECK_FALSE(an.roles_swapped);
  CHECK(an.chains.size() == 4);
  CHECK(an.obstruction.family);
  REQUIRE(an.obstruction.witnesses.size() == 4);
  const double lens[4] = {0.13529215, 0.03382304, 0.00845576, 0.00211394};
  for (int k = 0; k < 4; ++k) {
    const TwoJumpsWitness& w = an.obstruction.witnesses[k];
    CHECK(w.accepted);
    CHECK(w.I.len() == Approx(lens[k]).epsilon(1e-6).scale(1));
    CHECK(w.product >= 4.0 - 1e-6);
    CHECK(w.product == Approx(8.3034).epsilon(1e-3));
    CHECK(w.bound == Approx(4.0698).epsilon(1e-3));
  }
  for (int k = 0; k + 1 < 4; ++k)
    CHECK(an.obstruction.witnesses[k].I.len() /
              an.obstruction.witnesses[k + 1].I.len() ==
          Approx(4.0).epsilon(1e-6));
  CHECK(contains(an.obstruction.conclusion,
                 "difference-quotient products stay at or above 4"));
}

TEST_CASE("full analysis on the single-scale window stops at isolated probes") {
  P4Analysis an = analyze_p4_action(window_action(WindowParams{}));
  CHECK(an.verdict == P4Verdict::blowup_witness);
  CHECK(an.relations.ok == Tri::yes);
  CHECK(an.chains.size() == 1);
  CHECK_FALSE(an.obstruction.family);
  REQUIRE(an.obstruction.witnesses.size() == 1);
  CHECK(an.obstruction.witnesses[0].accepted);
  CHECK(an.obstruction.conclusion ==
        "isolated probes certified (product >= 4), but no shrinking family of "
        "at least three was assembled");
}

TEST_CASE("full analysis flags a broken defining relation") {
  P4Analysis an = analyze_p4_action(broken_edge_action(WindowParams{}));
  CHECK(an.verdict == P4Verdict::relations_fail);
  CHECK(std::string(p4_verdict_name(an.verdict)) == "RELATIONS-FAIL");
  REQUIRE(an.notes.size() == 1);
  CHECK(an.notes[0] ==
        "the defining relation [b, d] fails; the assignment is not an action "
        "of this presentation");
}

TEST_CASE("full analysis reports exhaustion on honest but chainless actions") {
  P4Analysis ab = analyze_p4_action(abelian_bumps_action());
  CHECK(ab.verdict == P4Verdict::config_exhausted);
  CHECK(std::string(p4_verdict_name(ab.verdict)) == "CONFIG-EXHAUSTED");
  CHECK(ab.chains.empty());
  bool found = false;
  for (const auto& n : ab.notes) found = found || contains(n, "no chain witness found");
  CHECK(found);

  P4Analysis rot = analyze_p4_action(rotations_action());
  CHECK(rot.verdict == P4Verdict::config_exhausted);
  REQUIRE(rot.notes.size() == 4);
  CHECK(rot.notes[0] == "generators a and b commute although no relation "
                        "requires it; the action is not faithful");
  CHECK(contains(rot.notes[1], "generators b and c commute"));
  CHECK(contains(rot.notes[2], "generators c and d commute"));
  CHECK(rot.notes[3] == "generator 'a' has no fixed point; probe a power of "
                        "the action whose generators are grounded");
}

TEST_CASE("role swapping relabels the path before analysis") {
  P4Analysis an = analyze_p4_action(window_action(WindowParams{}), true);
  CHECK(an.roles_swapped);
  REQUIRE_FALSE(an.notes.empty());
  CHECK(an.notes[0] == "roles swapped: generators relabeled a<->d, b<->c");
  // the staircase only climbs one way; reversed roles find no chain
  CHECK(an.verdict == P4Verdict::config_exhausted);
}

TEST_CASE("analysis rejects presentations that are not the labeled path") {
  ActionAssignment trio = trio_action();
  CHECK(contains(message_of<DomainError>([&] { analyze_p4_action(trio); }),
                 "generators must be labeled a, b, c, d"));

  ActionAssignment complete;
  complete.presentation.graph = SimplicialGraph(
      {"a", "b", "c", "d"},
      {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}, {"c", "d"}});
  for (const auto& [label, lo] :
       std::vector<std::pair<std::string, double>>{
           {"a", 0.1}, {"b", 0.3}, {"c", 0.5}, {"d", 0.7}})
    complete.assignment.emplace(
        label, Diffeo::bump_push(Manifold::interval, lo, lo + 0.1, 0.02));
  complete.manifold = Manifold::interval;
  CHECK(contains(message_of<DomainError>([&] { analyze_p4_action(complete); }),
                 "presentation must be the path b - d - a - c"));
}
