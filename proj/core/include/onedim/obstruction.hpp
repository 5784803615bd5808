#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "onedim/action.hpp"
#include "onedim/analysis.hpp"
#include "onedim/config.hpp"
#include "onedim/diffeo.hpp"
#include "onedim/interval_set.hpp"

namespace onedim {

struct RegionComponent {
  Ival part;
  std::string reason;  // "overlap-unequal", "shared-nonabelian", "indeterminate-shared"
};

// The commutator region of a pair: support components that overlap without
// agreeing, plus shared components on which the restricted pair visibly
// fails to commute. The commutator's own support always lands inside it.
struct CommutatorRegion {
  IntervalSet region;
  std::vector<RegionComponent> components;
  bool post_check_ok = true;  // sampled commutator support lies in the region
  std::vector<std::string> notes;
};

CommutatorRegion commutator_region(const Diffeo& f, const Diffeo& g,
                                   const RunConfig& cfg = default_config());
nlohmann::json commutator_region_to_json(const CommutatorRegion& r);

// For commuting grounded maps, support components must be pairwise equal or
// disjoint; reports the first violating pair otherwise.
struct DisjointnessReport {
  bool pass = true;
  Ival f_part, g_part;  // the violating pair when pass is false
  std::string detail;
};

DisjointnessReport disjointness_check(const Diffeo& f, const Diffeo& g,
                                      const RunConfig& cfg = default_config());

// Four intervals meeting consecutively and only consecutively, found by
// following a sample point x through b then c.
struct ChainWitness {
  std::array<Ival, 4> intervals;             // I_a, I_b, I_c, I_d
  std::array<std::string, 4> roles{{"a", "b", "c", "d"}};
  double x = 0.0, bx = 0.0, cbx = 0.0;       // the witnessing trajectory
};

std::vector<ChainWitness> detect_chains(const ActionAssignment& a,
                                        const RunConfig& cfg = default_config());
nlohmann::json chain_to_json(const ChainWitness& w);

// One gap Y of the commutator region of (c,d), together with the minimal
// interval Z around it that also swallows cb(I_a) for every a-support
// component inside Y. in_region0 marks gaps where some cb(I_a) meets a
// d-support component at points outside Y.
struct Envelope {
  Ival Y, Z;
  bool in_region0 = false;
};

struct EnvelopeReport {
  std::vector<Envelope> envelopes;
  std::vector<std::string> findings;  // inconsistencies: the input is not a candidate
};

EnvelopeReport compute_envelopes(const ActionAssignment& a,
                                 const RunConfig& cfg = default_config());
nlohmann::json envelopes_to_json(const EnvelopeReport& r);

// Component pairs (I_a, I_d) with I_a distinct from I_d and cb(I_a) meeting
// I_d; each pair is cross-checked by trying to grow a chain witness from it.
struct PropositionPair {
  Ival Ia, Id, cb_Ia;
  bool chain_found = false;
};

struct PropositionReport {
  std::vector<PropositionPair> pairs;
  bool exhausted = false;  // fewer than the requested count exist
  std::vector<std::string> notes;
};

PropositionReport find_proposition_intervals(const ActionAssignment& a, int count,
                                             const RunConfig& cfg = default_config());
nlohmann::json proposition_to_json(const PropositionReport& r);

// One probe for the derivative blow-up estimate: I is the closed interval
// bounded by f(y) and g(y), with y interior.
struct TwoJumpsConfig {
  double y = 0.0;
  Ival I;
};

struct TwoJumpsWitness {
  int index = 0;  // position in the input list
  double y = 0.0;
  Ival I, A, B;               // I = A u B, meeting exactly at y
  double s = 0.0, t = 0.0;    // fixed point of g in A, of f in B, nearest y
  double u = 0.0, v = 0.0;    // where the difference quotients are realized
  double quotient_g = 0.0;    // (g(y)-s)/(y-s)
  double quotient_f = 0.0;    // (t-f(y))/(t-y)
  double product = 0.0;       // quotient_f * quotient_g
  double bound = 0.0;         // (1+|B|/|A|)(1+|A|/|B|), always >= 4
  double deriv_g_u = 0.0, deriv_f_v = 0.0;
  bool mirrored = false;      // the configuration runs right-to-left
  bool accepted = false;
};

struct TwoJumpsReport {
  std::vector<TwoJumpsWitness> witnesses;
  std::vector<std::string> rejections;  // indexed reasons for dropped configs
};

// Measures both difference quotients against the nearest flanking fixed
// points and certifies their product against the length-ratio bound; u and v
// are located by maximizing the derivatives, which can only overshoot the
// mean-value quotients.
TwoJumpsReport two_jumps(const Diffeo& f, const Diffeo& g,
                         const std::vector<TwoJumpsConfig>& configs,
                         const RunConfig& cfg = default_config());
nlohmann::json two_jumps_to_json(const TwoJumpsReport& r);

struct FgReport {
  std::vector<TwoJumpsWitness> witnesses;
  std::vector<std::string> rejections;
  bool family = false;  // at least three accepted probes with lengths
                        // non-increasing and shrinking by a factor of four
  std::string conclusion;
};

// Interval-swap configurations: x in I_f with f(x) in I_g and g(f(x)) beyond
// I_f translate into two-jumps probes for (f^-1, g) at f(x).
FgReport fg_obstruction(const Diffeo& f, const Diffeo& g,
                        const std::vector<Ival>& If_list,
                        const std::vector<Ival>& Ig_list,
                        const std::vector<double>& x_list,
                        const RunConfig& cfg = default_config());
nlohmann::json fg_to_json(const FgReport& r);

enum class P4Verdict { relations_fail, config_exhausted, blowup_witness };
const char* p4_verdict_name(P4Verdict v);

struct P4Analysis {
  P4Verdict verdict = P4Verdict::config_exhausted;
  ActionCheckReport relations;
  PropositionReport proposition;
  std::vector<ChainWitness> chains;
  FgReport obstruction;
  bool roles_swapped = false;
  std::vector<std::string> notes;
};

// Full pipeline over a path presentation labeled b - d - a - c: relation
// check, groundedness, interval-pair search, chain extraction, and the
// derivative blow-up probes with f = b and g = c (roles switch to the
// mirror labeling when swap_roles is set).
P4Analysis analyze_p4_action(const ActionAssignment& a, bool swap_roles = false,
                             const RunConfig& cfg = default_config());
nlohmann::json p4_analysis_to_json(const P4Analysis& r);

}  // namespace onedim
