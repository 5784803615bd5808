#include "onedim/verdict.hpp"

#include <string>

#include "onedim/errors.hpp"

namespace onedim {

namespace {

void validate(const SurfaceSignature& s) {
  if (s.g < 0 || s.n < 0 || s.b < 0)
    throw DomainError("surface signature entries must be nonnegative");
}

const char* kModIff =
    "there exists a finite index subgroup G of Mod(S) and an injective "
    "homomorphism from G to Diff^{1+bv}(M) if and only if c(S) <= 1";

const char* kModLowComplexity =
    "for surfaces with c(S) < 2, Mod(S) is virtually a product of a free "
    "group and a cyclic group, and thus virtually admits a C^{1+bv} action "
    "on M";

const char* kBraidIff =
    "the n-strand braid group B_n virtually embeds into Diff^{1+bv}(M) if "
    "and only if n <= 3";

const char* kCatalogFree =
    "no finite index subgroup of Aut(F_n) or Out(F_n) for n >= 3 acts "
    "faithfully by C^{1+bv} diffeomorphisms on a compact one-manifold";

const char* kCatalogTorelli =
    "no finite index subgroup of the Torelli group, or of the third Johnson "
    "filtration term, acts faithfully by C^{1+bv} diffeomorphisms when the "
    "genus is at least 3";

const char* kCatalogJohnson =
    "no finite index subgroup of a Johnson filtration term J_k with k > 3 "
    "acts faithfully by C^{1+bv} diffeomorphisms when the genus is at "
    "least 5";

const char* kNoClaim = "no assertion covers this family at these parameters";

}  // namespace

long complexity(const SurfaceSignature& s) {
  validate(s);
  return 3 * s.g - 3 + s.n + s.b;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::embeds_virtually_possible:
      return "EmbedsVirtuallyPossible";
    case Outcome::obstructed:
      return "Obstructed";
    case Outcome::unknown:
      return "Unknown";
  }
  return "?";
}

Verdict mod_verdict(const SurfaceSignature& s) {
  long c = complexity(s);
  if (c <= 1) return Verdict{Outcome::embeds_virtually_possible, kModLowComplexity};
  return Verdict{Outcome::obstructed, kModIff};
}

Verdict braid_verdict(long n) {
  if (n < 1) throw DomainError("braid groups need at least one strand");
  if (n <= 3) return Verdict{Outcome::embeds_virtually_possible, kBraidIff};
  return Verdict{Outcome::obstructed, kBraidIff};
}

const char* group_family_name(GroupFamily f) {
  switch (f) {
    case GroupFamily::aut_free:
      return "AutFn";
    case GroupFamily::out_free:
      return "OutFn";
    case GroupFamily::torelli:
      return "Torelli";
    case GroupFamily::johnson:
      return "Johnson";
  }
  return "?";
}

Verdict group_catalog_verdict(GroupFamily family, long primary, long k) {
  switch (family) {
    case GroupFamily::aut_free:
    case GroupFamily::out_free: {
      if (primary < 1) throw DomainError("free-group rank must be at least 1");
      if (primary >= 3) return Verdict{Outcome::obstructed, kCatalogFree};
      return Verdict{Outcome::unknown, kNoClaim};
    }
    case GroupFamily::torelli: {
      if (primary < 0) throw DomainError("genus must be nonnegative");
      if (primary >= 3) return Verdict{Outcome::obstructed, kCatalogTorelli};
      return Verdict{Outcome::unknown, kNoClaim};
    }
    case GroupFamily::johnson: {
      if (primary < 0) throw DomainError("genus must be nonnegative");
      if (k < 1) throw DomainError("filtration index must be at least 1");
      if (k == 1)
        return Verdict{Outcome::unknown,
                       std::string(kNoClaim) +
                           "; the first filtration term is the whole mapping "
                           "class group -- query the surface verdict instead"};
      // The second term is the Torelli group; it and the third term share
      // the genus >= 3 row, later terms need genus >= 5.
      if ((k == 2 || k == 3) && primary >= 3)
        return Verdict{Outcome::obstructed, kCatalogTorelli};
      if (k > 3 && primary >= 5)
        return Verdict{Outcome::obstructed, kCatalogJohnson};
      return Verdict{Outcome::unknown, kNoClaim};
    }
  }
  throw DomainError("unknown group family");
}

SimplicialGraph chain_graph(ChainCase c) {
  if (c == ChainCase::curves)
    return SimplicialGraph({"gamma1", "gamma2", "gamma3", "gamma4"},
                           {{"gamma1", "gamma2"},
                            {"gamma2", "gamma3"},
                            {"gamma3", "gamma4"}});
  return SimplicialGraph({"a", "b", "c", "d"},
                         {{"b", "d"}, {"d", "a"}, {"a", "c"}});
}

nlohmann::json verdict_to_json(const Verdict& v) {
  return nlohmann::json{{"verdict", outcome_name(v.outcome)},
                        {"cite", v.citation}};
}

}  // namespace onedim
