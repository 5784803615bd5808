// Acceptance gate: one pass/fail line per criterion, exit 0 iff all pass.
// Each criterion re-derives its expectations independently of the library
// (closed forms, brute-force oracles, or frozen reference values) and also
// enforces a wall-clock budget.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "constructions.hpp"
#include "onedim/action.hpp"
#include "onedim/analysis.hpp"
#include "onedim/diffeo.hpp"
#include "onedim/graph.hpp"
#include "onedim/interval_set.hpp"
#include "onedim/manifold.hpp"
#include "onedim/obstruction.hpp"
#include "onedim/verdict.hpp"
#include "onedim/word.hpp"

using namespace onedim;
using namespace onedim::testing;

namespace {

bool near(double a, double b, double m) { return std::fabs(a - b) <= m; }

// ---- 1: the model circle action ------------------------------------------

bool criterion_trio(std::string& why) {
  Diffeo a = trio_a(), b = trio_b(), c = trio_c();
  double ab = sup_displacement(commutator(a, b)).value;
  double bc = sup_displacement(commutator(b, c)).value;
  double ac = sup_displacement(commutator(a, c)).value;
  if (!(ab < 1e-8)) { why = "[a,b] not numerically trivial"; return false; }
  if (!(bc < 1e-8)) { why = "[b,c] not numerically trivial"; return false; }
  if (!(ac > 1e-3)) { why = "[a,c] not visibly nontrivial"; return false; }

  RationalityReport rep = rationality_diagnostic(trio_action());
  if (!rep.applicable) { why = "rationality scan not applicable"; return false; }
  for (const auto& row : rep.rows) {
    if (row.label == "a") {
      if (!near(row.rot.value, 0.0471975512, 1e-6)) {
        why = "rotation number of a off the reference value";
        return false;
      }
      if (row.rot.rational || !row.flagged) {
        why = "a not flagged as irrational";
        return false;
      }
    }
    if (row.label == "b") {
      if (!row.rot.rational || row.rot.p != 1 || row.rot.q != 2) {
        why = "b not tagged as rotation number 1/2";
        return false;
      }
    }
  }
  return true;
}

// ---- 2: difference-quotient probes ----------------------------------------

bool criterion_jumps(std::string& why) {
  for (double r : {1.0, 2.0, 5.0}) {
    double y = r > 4.0 ? 0.15 : r > 1.0 ? 0.3 : 0.5;
    for (int k = 3; k <= 10; ++k) {
      double h = std::pow(2.0, -k);
      JumpPair jp = jump_pair(Manifold::interval, y, h, r);
      TwoJumpsReport rep = two_jumps(jp.f, jp.g, {jp.config});
      if (rep.witnesses.size() != 1 || !rep.witnesses[0].accepted) {
        why = "probe rejected at r=" + std::to_string(r) + " h=2^-" + std::to_string(k);
        return false;
      }
      const TwoJumpsWitness& w = rep.witnesses[0];
      if (!(w.product >= 4.0 - 1e-6 && w.product >= w.bound - 1e-6)) {
        why = "quotient product below the length-ratio bound";
        return false;
      }
    }
  }
  JumpPair jp = jump_pair(Manifold::interval, 0.5, 0.0625, 1.0);
  TwoJumpsReport rep = two_jumps(jp.g, jp.f, {jp.config});
  if (rep.witnesses.size() != 1 || !rep.witnesses[0].accepted ||
      !rep.witnesses[0].mirrored) {
    why = "mirrored configuration not certified";
    return false;
  }
  return true;
}

// ---- 3: cograph classification against brute force ------------------------

bool classify_and_check(const SimplicialGraph& g, bool oracle_p4, std::string& why) {
  CographDecomposition d = build_cotree(g);
  if (d.is_cograph() == oracle_p4) {
    why = "classification disagrees with the brute-force oracle";
    return false;
  }
  if (d.is_cograph()) {
    if (!cotree_canonical(*d.cotree)) { why = "cotree not canonical"; return false; }
    SimplicialGraph back = cotree_to_graph(*d.cotree);
    if (back.order() != g.order()) { why = "cotree roundtrip lost vertices"; return false; }
    for (const auto& u : g.vertices())
      for (const auto& v : g.vertices())
        if (u < v && back.adjacent(u, v) != g.adjacent(u, v)) {
          why = "cotree roundtrip changed adjacency";
          return false;
        }
  } else {
    if (!p4_witness_valid(g, *d.p4)) { why = "invalid induced-path witness"; return false; }
  }
  return true;
}

bool criterion_graphs(std::string& why) {
  std::vector<std::uint32_t> canon7 = canonical_masks(7);
  if (canon7.size() != 1044) {
    why = "expected 1044 canonical graphs on seven vertices, got " +
          std::to_string(canon7.size());
    return false;
  }
  for (std::uint32_t mask : canon7)
    if (!classify_and_check(graph_from_mask(7, mask),
                            oracle_has_induced_p4(7, mask), why))
      return false;

  long total = 0;
  for (int n = 1; n <= 6; ++n) {
    std::uint32_t pairs = static_cast<std::uint32_t>(n * (n - 1) / 2);
    for (std::uint32_t mask = 0; mask < (1u << pairs); ++mask) {
      ++total;
      if (!classify_and_check(graph_from_mask(n, mask),
                              oracle_has_induced_p4(n, mask), why))
        return false;
    }
  }
  if (total != 33867) { why = "labeled enumeration miscounted"; return false; }

  std::mt19937_64 gen = rng(303);
  std::uniform_int_distribution<int> nd(4, 10);
  const double probs[3] = {0.2, 0.5, 0.8};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    int n = nd(gen);
    double p = probs[trial % 3];
    std::vector<std::pair<int, int>> edges;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back("g" + std::to_string(i));
    std::vector<std::pair<std::string, std::string>> named;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (u(gen) < p) {
          edges.emplace_back(i, j);
          named.emplace_back(labels[i], labels[j]);
        }
    SimplicialGraph g(labels, named);
    if (!classify_and_check(g, oracle_has_induced_p4(n, edges), why)) return false;
  }
  return true;
}

// ---- 4: verdict tables -----------------------------------------------------

bool criterion_verdicts(std::string& why) {
  for (long g = 0; g <= 10; ++g)
    for (long n = 0; n <= 10; ++n)
      for (long b = 0; b <= 10; ++b) {
        bool possible =
            mod_verdict({g, n, b}).outcome == Outcome::embeds_virtually_possible;
        if (possible != (3 * g - 3 + n + b <= 1)) {
          why = "surface verdict disagrees with the complexity rule";
          return false;
        }
      }
  for (long n = 1; n <= 10; ++n) {
    bool possible = braid_verdict(n).outcome == Outcome::embeds_virtually_possible;
    if (possible != (n <= 3)) { why = "braid verdict split wrong"; return false; }
  }
  for (GroupFamily fam : {GroupFamily::aut_free, GroupFamily::out_free})
    for (long rank = 1; rank <= 6; ++rank) {
      Outcome o = group_catalog_verdict(fam, rank).outcome;
      if (o != (rank >= 3 ? Outcome::obstructed : Outcome::unknown)) {
        why = "free-group catalog row wrong";
        return false;
      }
    }
  for (long genus = 0; genus <= 6; ++genus) {
    Outcome o = group_catalog_verdict(GroupFamily::torelli, genus).outcome;
    if (o != (genus >= 3 ? Outcome::obstructed : Outcome::unknown)) {
      why = "Torelli catalog row wrong";
      return false;
    }
  }
  for (long k = 1; k <= 7; ++k)
    for (long genus = 0; genus <= 6; ++genus) {
      Outcome o = group_catalog_verdict(GroupFamily::johnson, genus, k).outcome;
      Outcome want = Outcome::unknown;
      if ((k == 2 || k == 3) && genus >= 3) want = Outcome::obstructed;
      if (k > 3 && genus >= 5) want = Outcome::obstructed;
      if (o != want) { why = "Johnson catalog row wrong"; return false; }
    }
  return true;
}

// ---- 5: rotation number invariants -----------------------------------------

bool criterion_rotation(std::string& why) {
  std::vector<Diffeo> catalog{
      Diffeo::rotation(0.37),
      Diffeo::rotation(2.0 / 7.0),
      trio_c(),
      Diffeo::sine_perturb(Manifold::circle, 3, 0.01),
      Diffeo::compose({Diffeo::rotation(0.5), trio_c()}),
  };
  std::vector<Diffeo> conjugators{
      Diffeo::sine_perturb(Manifold::circle, 1, 0.002),
      Diffeo::bump_push(Manifold::circle, 0.1, 0.35, 0.002),
  };
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const Diffeo& f = catalog[i];
    RotationNumber r0 = rotation_number(f);
    if (!r0.converged) { why = "rotation number did not converge"; return false; }
    for (int n : {2, 3, 5}) {
      RotationNumber rn = rotation_number(f.pow(n));
      if (point_dist(Manifold::circle, rn.value, frac(n * r0.value)) > 1e-6) {
        why = "rotation number not additive under powers (map " +
              std::to_string(i) + ", n=" + std::to_string(n) + ")";
        return false;
      }
    }
    for (const Diffeo& h : conjugators) {
      RotationNumber rc = rotation_number(conjugate(f, h));
      if (point_dist(Manifold::circle, rc.value, r0.value) > 1e-6) {
        why = "rotation number not conjugacy invariant (map " +
              std::to_string(i) + ")";
        return false;
      }
    }
    bool rot_zero = point_dist(Manifold::circle, r0.value, 0.0) < 1e-6;
    if (is_grounded(f) != rot_zero) {
      why = "groundedness disagrees with vanishing rotation number";
      return false;
    }
  }
  return true;
}

// ---- 6: commutator support containment --------------------------------------

bool criterion_containment(std::string& why) {
  struct Pair {
    Diffeo f, g;
    Pair(Diffeo f_, Diffeo g_) : f(std::move(f_)), g(std::move(g_)) {}
  };
  std::vector<Pair> pairs;
  {
    std::mt19937_64 gi = rng(106);
    for (int t = 0; t < 60; ++t) {
      Diffeo f = random_diffeo(gi, Manifold::interval);
      Diffeo g = random_diffeo(gi, Manifold::interval);
      pairs.emplace_back(f, g);
    }
    std::mt19937_64 gc = rng(107);
    for (int t = 0; t < 40; ++t) {
      Diffeo f = random_diffeo(gc, Manifold::circle);
      Diffeo g = random_diffeo(gc, Manifold::circle);
      pairs.emplace_back(f, g);
    }
  }
  RunConfig cfg;
  std::atomic<int> bad{-1};
  unsigned workers = std::max(2u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= pairs.size() || bad.load() >= 0) return;
      CommutatorRegion r = commutator_region(pairs[i].f, pairs[i].g, cfg);
      if (!r.post_check_ok) { bad.store(static_cast<int>(i)); return; }
      Diffeo comm = commutator(pairs[i].f, pairs[i].g);
      Manifold m = pairs[i].f.manifold();
      const int n = 1 << 12;
      for (int s = 0; s < n; ++s) {
        double x = (s + 0.5) / n;
        if (point_dist(m, comm(x), x) > cfg.tol.nz &&
            !r.region.contains(x, cfg.tol.geom)) {
          bad.store(static_cast<int>(i));
          return;
        }
      }
    }
  };
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (bad.load() >= 0) {
    why = "commutator escaped its region on pair " + std::to_string(bad.load());
    return false;
  }
  return true;
}

// ---- 7: envelope coherence under the conjugating word -----------------------

bool criterion_envelopes(std::string& why) {
  std::vector<WindowParams> variants;
  for (double u : {0.02, 0.012, 0.008, 0.005})
    for (double origin : {0.01, 0.15, 0.35, 0.5})
      variants.push_back(WindowParams{u, origin, Manifold::interval});
  for (double origin : {0.01, 0.2, 0.4, 0.55})
    variants.push_back(WindowParams{0.02, origin, Manifold::circle});

  RunConfig cfg;
  FreeWord word = FreeWord::parse("c b a b^-1 c^-1");
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    ActionAssignment act = window_action(variants[vi]);
    EnvelopeReport rep = compute_envelopes(act, cfg);
    std::string tag = " (variant " + std::to_string(vi) + ")";
    if (!rep.findings.empty()) { why = "unexpected findings" + tag; return false; }
    if (rep.envelopes.empty()) { why = "no envelopes" + tag; return false; }

    std::vector<Ival> zs;
    for (const auto& e : rep.envelopes) zs.push_back(e.Z);
    IntervalSet zset = IntervalSet::from_intervals(act.manifold, zs);
    if (zset.size() != zs.size()) {
      why = "envelope hulls overlap" + tag;
      return false;
    }

    Diffeo g = evaluate_word(act, word);
    for (const auto& e : rep.envelopes) {
      Ival img = image_interval(g, e.Z);
      if (point_dist(act.manifold, img.lo, e.Z.lo) > cfg.tol.geom ||
          point_dist(act.manifold, img.hi, e.Z.hi) > cfg.tol.geom) {
        why = "conjugated word does not preserve an envelope hull" + tag;
        return false;
      }
    }
    for (const auto& part : support(g, cfg).parts()) {
      const int n = 33;
      for (int s = 1; s < n; ++s) {
        double x = part.lo + part.len() * s / n;
        if (act.manifold == Manifold::circle) x = frac(x);
        if (!zset.contains(x, cfg.tol.geom)) {
          why = "support of the conjugated word leaks out of the hulls" + tag;
          return false;
        }
      }
    }
  }
  return true;
}

// ---- 8: pipeline verdict matrix ---------------------------------------------

bool criterion_pipeline(std::string& why) {
  P4Analysis ab = analyze_p4_action(abelian_bumps_action());
  if (ab.verdict != P4Verdict::config_exhausted) {
    why = "fully commuting action did not exhaust the probe supply";
    return false;
  }
  P4Analysis broken = analyze_p4_action(broken_edge_action(WindowParams{}));
  if (broken.verdict != P4Verdict::relations_fail) {
    why = "broken defining relation not detected";
    return false;
  }
  P4Analysis cas = analyze_p4_action(cascade_action());
  if (cas.verdict != P4Verdict::blowup_witness) {
    why = "cascade did not produce a blow-up witness";
    return false;
  }
  if (!cas.obstruction.family || cas.obstruction.witnesses.size() < 3) {
    why = "cascade did not assemble a shrinking family";
    return false;
  }
  for (const auto& w : cas.obstruction.witnesses)
    if (!w.accepted || !(w.product >= 4.0 - 1e-6)) {
      why = "a cascade witness fell below the bound";
      return false;
    }
  return true;
}

struct Criterion {
  const char* slug;
  double limit_s;
  std::function<bool(std::string&)> fn;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {"circle-trio-relations-and-rotation-tags", 5.0, criterion_trio},
      {"jump-pair-quotient-products", 10.0, criterion_jumps},
      {"cograph-classification-vs-oracle", 60.0, criterion_graphs},
      {"verdict-tables", 1.0, criterion_verdicts},
      {"rotation-number-invariants", 30.0, criterion_rotation},
      {"commutator-support-containment", 30.0, criterion_containment},
      {"envelope-coherence-under-conjugation", 60.0, criterion_envelopes},
      {"pipeline-verdict-matrix", 60.0, criterion_pipeline},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string why;
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = criteria[i].fn(why);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (ok && elapsed > criteria[i].limit_s) {
      ok = false;
      why = "exceeded the time budget of " + std::to_string(criteria[i].limit_s) + "s";
    }
    std::printf("[%s] %zu: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].slug, elapsed, why.empty() ? "" : " -- ",
                why.c_str());
    all = all && ok;
  }
  return all ? 0 : 1;
}
