#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "onedim/graph.hpp"

namespace onedim {

// One syllable: a generator label raised to a nonzero power.
struct Letter {
  std::string gen;
  int exp = 1;
};

inline bool operator==(const Letter& a, const Letter& b) {
  return a.gen == b.gen && a.exp == b.exp;
}

// Freely reduced word over string-labeled generators. Adjacent letters carry
// distinct labels and no exponent is zero; the empty word is the identity.
class FreeWord {
 public:
  FreeWord() = default;

  // Merges adjacent same-label letters and drops vanishing exponents until
  // the sequence is freely reduced as written.
  static FreeWord from_letters(std::vector<Letter> letters);
  static FreeWord generator(const std::string& gen, int exp = 1);
  // Accepts syllables like "a b^-1 c^2", separated by whitespace or '*'.
  static FreeWord parse(const std::string& text);

  const std::vector<Letter>& letters() const { return letters_; }
  bool empty() const { return letters_.empty(); }
  // Letter count with multiplicity: |a^3 b^-2| = 5.
  std::size_t length() const;
  int exponent_sum(const std::string& gen) const;

  FreeWord inverse() const;
  FreeWord concat(const FreeWord& rhs) const;
  FreeWord pow(int n) const;

  // Round-trips through parse(); the empty word prints as "".
  std::string str() const;

 private:
  std::vector<Letter> letters_;
};

inline bool operator==(const FreeWord& a, const FreeWord& b) {
  return a.letters() == b.letters();
}
inline bool operator!=(const FreeWord& a, const FreeWord& b) { return !(a == b); }
inline FreeWord operator*(const FreeWord& a, const FreeWord& b) { return a.concat(b); }

// Group presentation where generators are graph vertices and the defining
// relations are exactly [u,v] = 1 for edges uv.
struct RaagPresentation {
  SimplicialGraph graph;
};

struct ReducedWord {
  FreeWord word;
  bool trivial = false;
};

// Canonical normal form: cancel inverse pairs separated only by letters that
// commute with them, then linearize the resulting heap left-greedily by label
// order. Two words are equal in the group iff their normal forms coincide.
ReducedWord reduce_in_raag(const FreeWord& w, const RaagPresentation& p);
bool is_trivial_in_raag(const FreeWord& w, const RaagPresentation& p);

// Image of w under the monomorphism sending every generator to its N-th
// power (the subgroup those powers generate is again presented by p.graph).
FreeWord power_subgroup(const RaagPresentation& p, int N, const FreeWord& w);

// w_1 = y x^{s_1} y^{-1}, w_{i+1} = w_i x^{s_{i+1}} w_i^{-1}; returns w_n.
// Every sign must be +1 or -1 and the list must be nonempty.
FreeWord successive_conjugation(const std::vector<int>& signs,
                                const std::string& x = "x",
                                const std::string& y = "y");

// Words travel as their display string, e.g. "a b^-1 c^2".
nlohmann::json word_to_json(const FreeWord& w);
FreeWord word_from_json(const nlohmann::json& j);

}  // namespace onedim
