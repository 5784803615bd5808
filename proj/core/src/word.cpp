#include "onedim/word.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdlib>
#include <set>
#include <utility>

#include "onedim/errors.hpp"

namespace onedim {

FreeWord FreeWord::from_letters(std::vector<Letter> letters) {
  FreeWord w;
  for (auto& l : letters) {
    if (l.gen.empty()) throw DomainError("letter with empty generator label");
    if (l.exp == 0) continue;
    if (!w.letters_.empty() && w.letters_.back().gen == l.gen) {
      w.letters_.back().exp += l.exp;
      if (w.letters_.back().exp == 0) w.letters_.pop_back();
    } else {
      w.letters_.push_back(std::move(l));
    }
  }
  return w;
}

FreeWord FreeWord::generator(const std::string& gen, int exp) {
  return from_letters({Letter{gen, exp}});
}

namespace {

bool label_char(char c, bool first) {
  if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return true;
  return !first && std::isdigit(static_cast<unsigned char>(c));
}

Letter parse_token(const std::string& tok) {
  std::size_t i = 0;
  while (i < tok.size() && label_char(tok[i], i == 0)) ++i;
  if (i == 0) throw DomainError("cannot parse word token: '" + tok + "'");
  Letter l{tok.substr(0, i), 1};
  if (i == tok.size()) return l;
  if (tok[i] != '^') throw DomainError("cannot parse word token: '" + tok + "'");
  ++i;
  std::size_t j = i;
  if (j < tok.size() && (tok[j] == '+' || tok[j] == '-')) ++j;
  std::size_t digits = j;
  while (j < tok.size() && std::isdigit(static_cast<unsigned char>(tok[j]))) ++j;
  if (j == digits || j != tok.size())
    throw DomainError("cannot parse word token: '" + tok + "'");
  l.exp = std::atoi(tok.c_str() + i);
  return l;
}

}  // namespace

FreeWord FreeWord::parse(const std::string& text) {
  std::vector<Letter> letters;
  std::string tok;
  auto flush = [&] {
    if (!tok.empty()) {
      letters.push_back(parse_token(tok));
      tok.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*') {
      flush();
    } else {
      tok.push_back(c);
    }
  }
  flush();
  return from_letters(std::move(letters));
}

std::size_t FreeWord::length() const {
  std::size_t n = 0;
  for (const auto& l : letters_) n += static_cast<std::size_t>(std::abs(l.exp));
  return n;
}

int FreeWord::exponent_sum(const std::string& gen) const {
  int s = 0;
  for (const auto& l : letters_)
    if (l.gen == gen) s += l.exp;
  return s;
}

FreeWord FreeWord::inverse() const {
  FreeWord w;
  w.letters_.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
    w.letters_.push_back(Letter{it->gen, -it->exp});
  return w;
}

FreeWord FreeWord::concat(const FreeWord& rhs) const {
  std::vector<Letter> all = letters_;
  all.insert(all.end(), rhs.letters_.begin(), rhs.letters_.end());
  return from_letters(std::move(all));
}

FreeWord FreeWord::pow(int n) const {
  if (n < 0) return inverse().pow(-n);
  FreeWord w;
  for (int i = 0; i < n; ++i) w = w.concat(*this);
  return w;
}

std::string FreeWord::str() const {
  std::string s;
  for (const auto& l : letters_) {
    if (!s.empty()) s += ' ';
    s += l.gen;
    if (l.exp != 1) s += '^' + std::to_string(l.exp);
  }
  return s;
}

namespace {

struct Unit {
  std::size_t g;
  int s;
};

// Cancellation partner scan: an incoming letter may cancel the nearest
// opposite letter of its own generator provided everything in between
// commutes with that generator (same-generator letters always do). Inserting
// letters one at a time with this rule keeps the list fully cancelled, hence
// geodesic.
std::vector<Unit> cancelled_pile(const std::vector<Unit>& units, const SimplicialGraph& g) {
  std::vector<Unit> pile;
  pile.reserve(units.size());
  for (const Unit& u : units) {
    bool cancelled = false;
    for (std::size_t j = pile.size(); j-- > 0;) {
      const Unit& t = pile[j];
      if (t.g == u.g) {
        if (t.s == -u.s) {
          pile.erase(pile.begin() + static_cast<std::ptrdiff_t>(j));
          cancelled = true;
        }
        if (cancelled) break;
        continue;
      }
      if (!g.adjacent(t.g, u.g)) break;
    }
    if (!cancelled) pile.push_back(u);
  }
  return pile;
}

// Lexicographically least linearization of the pile: repeatedly emit the
// least-labeled letter whose every earlier non-commuting (or same-generator)
// letter has already been emitted.
std::vector<Unit> lex_least_order(const std::vector<Unit>& pile, const SimplicialGraph& g) {
  const std::size_t n = pile.size();
  std::vector<std::size_t> rank(g.order());
  {
    std::vector<std::size_t> idx(g.order());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return g.vertices()[a] < g.vertices()[b];
    });
    for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = r;
  }
  auto dependent = [&](std::size_t a, std::size_t b) {
    return a == b || !g.adjacent(a, b);
  };
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (dependent(pile[j].g, pile[i].g)) {
        ++indeg[i];
        succ[j].push_back(i);
      }
  std::set<std::pair<std::size_t, std::size_t>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.insert({rank[pile[i].g], i});
  std::vector<Unit> out;
  out.reserve(n);
  while (!ready.empty()) {
    std::size_t i = ready.begin()->second;
    ready.erase(ready.begin());
    out.push_back(pile[i]);
    for (std::size_t k : succ[i])
      if (--indeg[k] == 0) ready.insert({rank[pile[k].g], k});
  }
  return out;
}

}  // namespace

ReducedWord reduce_in_raag(const FreeWord& w, const RaagPresentation& p) {
  const SimplicialGraph& g = p.graph;
  std::vector<Unit> units;
  units.reserve(w.length());
  for (const auto& l : w.letters()) {
    std::size_t gi = g.index_of(l.gen);
    int s = l.exp > 0 ? 1 : -1;
    for (int k = 0; k < std::abs(l.exp); ++k) units.push_back({gi, s});
  }
  std::vector<Unit> order = lex_least_order(cancelled_pile(units, g), g);
  std::vector<Letter> letters;
  letters.reserve(order.size());
  for (const Unit& u : order) letters.push_back({g.vertices()[u.g], u.s});
  ReducedWord r;
  r.word = FreeWord::from_letters(std::move(letters));
  r.trivial = r.word.empty();
  return r;
}

bool is_trivial_in_raag(const FreeWord& w, const RaagPresentation& p) {
  return reduce_in_raag(w, p).trivial;
}

FreeWord power_subgroup(const RaagPresentation& p, int N, const FreeWord& w) {
  if (N < 1) throw DomainError("power substitution needs N >= 1");
  std::vector<Letter> letters;
  letters.reserve(w.letters().size());
  for (const auto& l : w.letters()) {
    p.graph.index_of(l.gen);
    long long e = static_cast<long long>(l.exp) * N;
    if (e > INT_MAX || e < INT_MIN)
      throw DomainError("exponent overflow in power substitution");
    letters.push_back({l.gen, static_cast<int>(e)});
  }
  return FreeWord::from_letters(std::move(letters));
}

FreeWord successive_conjugation(const std::vector<int>& signs,
                                const std::string& x, const std::string& y) {
  if (signs.empty())
    throw DomainError("successive conjugation needs at least one sign");
  if (x == y) throw DomainError("conjugation labels must differ");
  for (int s : signs)
    if (s != 1 && s != -1)
      throw DomainError("conjugation signs must be +1 or -1");
  FreeWord w = FreeWord::generator(y)
                   .concat(FreeWord::generator(x, signs[0]))
                   .concat(FreeWord::generator(y, -1));
  for (std::size_t i = 1; i < signs.size(); ++i)
    w = w.concat(FreeWord::generator(x, signs[i])).concat(w.inverse());
  return w;
}

nlohmann::json word_to_json(const FreeWord& w) { return nlohmann::json(w.str()); }

FreeWord word_from_json(const nlohmann::json& j) {
  if (!j.is_string()) throw DomainError("word json must be a string");
  return FreeWord::parse(j.get<std::string>());
}

}  // namespace onedim
