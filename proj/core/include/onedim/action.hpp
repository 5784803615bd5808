#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "onedim/analysis.hpp"
#include "onedim/config.hpp"
#include "onedim/diffeo.hpp"
#include "onedim/interval_set.hpp"
#include "onedim/manifold.hpp"
#include "onedim/word.hpp"

namespace onedim {

// A candidate action: one diffeomorphism per presentation generator, all on
// the same manifold.
struct ActionAssignment {
  RaagPresentation presentation;
  std::map<std::string, Diffeo> assignment;
  Manifold manifold = Manifold::interval;
};

// Wire format:
//   {"presentation": <graph>, "assignment": {"a": <map>, ...}, "manifold": "circle"}
nlohmann::json action_to_json(const ActionAssignment& a);
ActionAssignment action_from_json(const nlohmann::json& j);

// Composition of the assigned maps in word order (leftmost letter applied
// last, matching function composition); the empty word is the identity.
Diffeo evaluate_word(const ActionAssignment& a, const FreeWord& w);
Diffeo evaluate_word(const std::map<std::string, Diffeo>& assignment, Manifold m,
                     const FreeWord& w);

struct PairCheck {
  std::string u, v;
  bool should_commute = false;
  Tri commutes = Tri::indeterminate;
  double commutator_disp = 0.0;
};

struct ActionCheckReport {
  std::vector<PairCheck> pairs;            // every unordered generator pair
  std::map<std::string, bool> grounded;    // generator has a fixed point
  Tri ok = Tri::indeterminate;             // yes iff every pair matches its relation
  std::vector<std::string> notes;
};

// Checks every defining relation numerically: edge pairs must commute
// (commutator displacement below tol id), non-edge pairs must visibly fail
// to commute (above tol nz); the gap between the thresholds is reported as
// indeterminate rather than guessed.
ActionCheckReport check_action(const ActionAssignment& a,
                               const RunConfig& cfg = default_config());
nlohmann::json action_check_to_json(const ActionCheckReport& r);

struct ConjugationChoice {
  int s = 1;
  int t = 1;
  int case_index = 1;      // which ordering branch selected t
  FreeWord word;           // (y x^s y^-1) x^t (y x^s y^-1)^-1
  bool verified = false;   // image of Y under the evaluated word lies in Y
  double slack = 0.0;      // worst protrusion of that image beyond Y
};

// Sign selection for the interval-shrinking conjugation trick. Given
// Y = (p,q) inside Z with every support component of f inside Y or clear of
// Z, and g preserving Z, picks s so that u = g f^s g^-1 moves p rightward
// and then t by the position of u(p), u(q) relative to q:
//   case 1: u(q) <= q          -> t = +1 (u already maps Y into Y)
//   case 2: u(p) <= q < u(q)   -> t picked so u f^t u^-1 pulls q back
//   case 3: q <= u(p)          -> t = +1 (u f^t u^-1 fixes both endpoints)
// Ties within tol geom resolve toward the lower case number.
ConjugationChoice choose_conjugation_signs(const Diffeo& f, const Diffeo& g,
                                           const Ival& Y, const Ival& Z,
                                           const RunConfig& cfg = default_config());
nlohmann::json conjugation_choice_to_json(const ConjugationChoice& c);

struct NestedConjugationReport {
  FreeWord word;
  std::vector<int> signs;
  std::vector<int> cases;              // per stage
  std::vector<bool> y_containment;     // stages 1..m
  bool support_contained = false;      // supp(w f w^-1) inside the target union
  bool ok = false;
  std::vector<std::string> notes;
};

// Iterated sign selection over interval pairs (Y_i inside Z_i, Z_i pairwise
// disjoint, supp f inside the Y's, supp g inside the Z's): stage i+1 reuses
// the evaluated word so far as the conjugator. The result maps every Y_j
// (j <= m) into itself and conjugates f into the first m Y's plus the
// remaining Z's.
NestedConjugationReport nested_conjugation_lemma(
    const Diffeo& f, const Diffeo& g, const std::vector<Ival>& Ys,
    const std::vector<Ival>& Zs, int m, const RunConfig& cfg = default_config());
nlohmann::json nested_conjugation_to_json(const NestedConjugationReport& r);

struct CommutatorOrder {
  std::string u, v;
  long order = 1;
};

// Exponents that kill central commutators: in a central extension
// [f^n, h] = ([f,h])^n, so raising each generator to the least common
// multiple of the orders of the central commutators it touches makes all of
// them trivial. Generators touching no listed pair get exponent 1.
std::map<std::string, long> central_split_exponents(
    const std::vector<std::string>& generators,
    const std::vector<CommutatorOrder>& orders);

struct HolderReport {
  bool applicable = false;
  std::string not_applicable_reason;
  int ball_radius = 0;
  long words_checked = 0;          // distinct group elements examined
  bool free_action = false;        // no interior fixed point found in the ball
  std::string fixed_word;          // first word with an interior fixed point
  bool predicted_abelian = false;
  Tri abelian_verified = Tri::indeterminate;
  std::vector<std::string> findings;
};

// Freeness screen: if no nontrivial word up to the radius has an interior
// fixed point, the group should be abelian; the prediction is then checked
// against the generator commutators and any mismatch is reported as a
// finding. Generators that already have interior fixed points make the
// screen inapplicable.
HolderReport holder_diagnostic(const ActionAssignment& a, int ball_radius,
                               const RunConfig& cfg = default_config());
nlohmann::json holder_to_json(const HolderReport& r);

struct RotationRow {
  std::string label;
  RotationNumber rot;
  bool flagged = false;    // rational test failed
  int finite_order = 0;    // least numeric order within period cap, else 0
};

struct RationalityReport {
  bool applicable = false;
  std::string not_applicable_reason;
  std::vector<RotationRow> rows;
  bool any_flagged = false;
  std::vector<std::string> notes;
};

// For a nonabelian circle action whose generators have a connected
// commutation graph, every infinite-order generator should have rational
// rotation number; irrational ones are flagged. Finite-order generators
// (certified only up to the period cap) void the conclusion and are noted.
RationalityReport rationality_diagnostic(const ActionAssignment& a,
                                         const RunConfig& cfg = default_config());
nlohmann::json rationality_to_json(const RationalityReport& r);

}  // namespace onedim
