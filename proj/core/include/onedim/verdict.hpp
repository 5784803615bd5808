#pragma once

#include <string>

#include <json.hpp>

#include "onedim/graph.hpp"

namespace onedim {

// A surface of genus g with n marked points and b boundary components.
struct SurfaceSignature {
  long g = 0;
  long n = 0;
  long b = 0;
};

// 3g - 3 + n + b; negative for spheres with few punctures.
long complexity(const SurfaceSignature& s);

enum class Outcome { embeds_virtually_possible, obstructed, unknown };
const char* outcome_name(Outcome o);

// A table lookup result. The citation quotes the statement the outcome rests
// on; `unknown` means no assertion covers the queried parameters, and the
// table never extrapolates.
struct Verdict {
  Outcome outcome = Outcome::unknown;
  std::string citation;
};

// Mapping class group of the surface: some finite index subgroup embeds into
// the interval/circle diffeomorphism group (of regularity C^{1+bv}) exactly
// when the complexity is at most 1.
Verdict mod_verdict(const SurfaceSignature& s);

// n-strand braid group: virtually embeds exactly when n <= 3.
Verdict braid_verdict(long n);

enum class GroupFamily { aut_free, out_free, torelli, johnson };
const char* group_family_name(GroupFamily f);

// The no-faithful-action catalog. `primary` is the free-group rank for
// aut_free/out_free and the genus for torelli/johnson; `k` is the filtration
// index (johnson only). The second filtration term is the Torelli group and
// inherits its row; the first is the whole mapping class group, which this
// table does not cover.
Verdict group_catalog_verdict(GroupFamily family, long primary, long k = 0);

// The two standard labelings of a four-chain of curves: consecutive curve
// names, and the window labeling b - d - a - c whose commutation pattern the
// action machinery consumes. Both are induced paths on four vertices.
enum class ChainCase { curves, windows };
SimplicialGraph chain_graph(ChainCase c);

// {"verdict": "...", "cite": "..."}
nlohmann::json verdict_to_json(const Verdict& v);

}  // namespace onedim
