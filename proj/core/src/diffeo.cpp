#include "onedim/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "onedim/errors.hpp"

namespace onedim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// --- monotone cubic Hermite pieces ------------------------------------

std::size_t piece_index(const std::vector<double>& knots, double x) {
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  std::size_t i = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
  return std::min(i, knots.size() - 2);
}

double hermite_value(const SplineNode& s, double x) {
  std::size_t i = piece_index(s.knots, x);
  double h = s.knots[i + 1] - s.knots[i];
  double t = (x - s.knots[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  return s.values[i] * (2 * t3 - 3 * t2 + 1) + h * s.derivs[i] * (t3 - 2 * t2 + t) +
         s.values[i + 1] * (-2 * t3 + 3 * t2) + h * s.derivs[i + 1] * (t3 - t2);
}

double hermite_deriv(const SplineNode& s, double x) {
  std::size_t i = piece_index(s.knots, x);
  double h = s.knots[i + 1] - s.knots[i];
  double t = (x - s.knots[i]) / h;
  double t2 = t * t;
  return 6 * (t2 - t) * (s.values[i] - s.values[i + 1]) / h +
         s.derivs[i] * (3 * t2 - 4 * t + 1) + s.derivs[i + 1] * (3 * t2 - 2 * t);
}

// --- evaluation visitors ----------------------------------------------

double lift_eval(const DiffeoNode& n, double x);
double inverse_eval(const DiffeoNode& n, double x);
double deriv_eval(const DiffeoNode& n, double x);
double disp_bound(const DiffeoNode& n);

double lift_eval(const DiffeoNode& n, double x) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IdentityNode>) {
          return x;
        } else if constexpr (std::is_same_v<T, RotationNode>) {
          return x + node.c;
        } else if constexpr (std::is_same_v<T, SinePerturbNode>) {
          // displacement has period 1/k; reduce the argument for accuracy
          double u = n.m == Manifold::circle ? frac(x) : x;
          return x + node.eps * std::sin(kTwoPi * node.k * u);
        } else if constexpr (std::is_same_v<T, BumpPushNode>) {
          double L = node.hi - node.lo;
          double r = n.m == Manifold::circle ? frac(x - node.lo) : x - node.lo;
          if (r <= 0.0 || r >= L) return x;
          double s = std::sin(std::numbers::pi * r / L);
          return x + node.strength * s * s;
        } else if constexpr (std::is_same_v<T, SplineNode>) {
          if (n.m == Manifold::interval) {
            return hermite_value(node, std::clamp(x, 0.0, 1.0));
          }
          double w = std::floor(x);
          return hermite_value(node, x - w) + w;
        } else if constexpr (std::is_same_v<T, ComposeNode>) {
          double y = x;
          for (auto it = node.parts.rbegin(); it != node.parts.rend(); ++it)
            y = lift_eval(**it, y);
          return y;
        } else {  // InverseNode
          return inverse_eval(*node.of, x);
        }
      },
      n.v);
}

double inverse_eval(const DiffeoNode& n, double x) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IdentityNode>) {
          return x;
        } else if constexpr (std::is_same_v<T, RotationNode>) {
          return x - node.c;
        } else if constexpr (std::is_same_v<T, ComposeNode>) {
          // (p0 o ... o pk)^-1 applied to x: invert p0 first
          double y = x;
          for (const auto& p : node.parts) y = inverse_eval(*p, y);
          return y;
        } else if constexpr (std::is_same_v<T, InverseNode>) {
          return lift_eval(*node.of, x);
        } else {
          // monotone bisection on the lift of this primitive
          double bound = disp_bound(n) + 1e-9;
          double lo = x - bound, hi = x + bound;
          for (int guard = 0; guard < 8 && lift_eval(n, lo) > x; ++guard) lo -= bound;
          for (int guard = 0; guard < 8 && lift_eval(n, hi) < x; ++guard) hi += bound;
          if (lift_eval(n, lo) > x || lift_eval(n, hi) < x)
            throw NumericError("inverse bracketing failed");
          for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
            double mid = 0.5 * (lo + hi);
            (lift_eval(n, mid) < x ? lo : hi) = mid;
          }
          return 0.5 * (lo + hi);
        }
      },
      n.v);
}

double deriv_eval(const DiffeoNode& n, double x) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IdentityNode> || std::is_same_v<T, RotationNode>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, SinePerturbNode>) {
          double u = n.m == Manifold::circle ? frac(x) : x;
          return 1.0 + node.eps * kTwoPi * node.k * std::cos(kTwoPi * node.k * u);
        } else if constexpr (std::is_same_v<T, BumpPushNode>) {
          double L = node.hi - node.lo;
          double r = n.m == Manifold::circle ? frac(x - node.lo) : x - node.lo;
          if (r <= 0.0 || r >= L) return 1.0;
          return 1.0 + node.strength * (std::numbers::pi / L) * std::sin(kTwoPi * r / L);
        } else if constexpr (std::is_same_v<T, SplineNode>) {
          if (n.m == Manifold::interval) return hermite_deriv(node, std::clamp(x, 0.0, 1.0));
          return hermite_deriv(node, x - std::floor(x));
        } else if constexpr (std::is_same_v<T, ComposeNode>) {
          double d = 1.0, y = x;
          for (auto it = node.parts.rbegin(); it != node.parts.rend(); ++it) {
            d *= deriv_eval(**it, y);
            y = lift_eval(**it, y);
          }
          return d;
        } else {  // InverseNode
          double y = inverse_eval(*node.of, x);
          return 1.0 / deriv_eval(*node.of, y);
        }
      },
      n.v);
}

double disp_bound(const DiffeoNode& n) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IdentityNode>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, RotationNode>) {
          return std::fabs(node.c);
        } else if constexpr (std::is_same_v<T, SinePerturbNode>) {
          return std::fabs(node.eps);
        } else if constexpr (std::is_same_v<T, BumpPushNode>) {
          return std::fabs(node.strength);
        } else if constexpr (std::is_same_v<T, SplineNode>) {
          return node.disp_bound;
        } else if constexpr (std::is_same_v<T, ComposeNode>) {
          double b = 0.0;
          for (const auto& p : node.parts) b += disp_bound(*p);
          return b;
        } else {
          return disp_bound(*node.of);
        }
      },
      n.v);
}

}  // namespace

// --- factories ---------------------------------------------------------

namespace {
NodePtr make(Manifold m, std::variant<IdentityNode, RotationNode, SinePerturbNode,
                                      SplineNode, BumpPushNode, ComposeNode, InverseNode>
                             v) {
  auto n = std::make_shared<DiffeoNode>();
  n->m = m;
  n->v = std::move(v);
  return n;
}
}  // namespace

Diffeo Diffeo::identity(Manifold m) { return Diffeo(make(m, IdentityNode{})); }

Diffeo Diffeo::rotation(double c) {
  if (!std::isfinite(c)) throw DomainError("rotation constant must be finite");
  return Diffeo(make(Manifold::circle, RotationNode{frac(c)}));
}

Diffeo Diffeo::sine_perturb(Manifold m, int k, double eps) {
  if (k < 1) throw DomainError("sine_perturb needs k >= 1");
  if (!(std::fabs(eps) * kTwoPi * k < 1.0))
    throw DomainError("sine_perturb slope bound violated: need |eps|*2*pi*k < 1");
  return Diffeo(make(m, SinePerturbNode{k, eps}));
}

Diffeo Diffeo::spline(Manifold m, std::vector<double> knots, std::vector<double> values,
                      std::vector<double> derivs) {
  std::size_t n = knots.size();
  if (n < 2 || values.size() != n || derivs.size() != n)
    throw DomainError("spline needs matching knots/values/derivs, at least two");
  if (std::fabs(knots.front()) > 1e-12 || std::fabs(knots.back() - 1.0) > 1e-12)
    throw DomainError("spline knots must span [0,1]");
  knots.front() = 0.0;
  knots.back() = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(knots[i] < knots[i + 1])) throw DomainError("spline knots must increase");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(values[i] < values[i + 1])) throw DomainError("spline values must increase");
  if (m == Manifold::interval) {
    if (std::fabs(values.front()) > 1e-12 || std::fabs(values.back() - 1.0) > 1e-12)
      throw DomainError("interval spline must fix 0 and 1");
    values.front() = 0.0;
    values.back() = 1.0;
  } else {
    if (std::fabs(values.back() - values.front() - 1.0) > 1e-12)
      throw DomainError("circle spline needs values[last] = values[0] + 1");
    values.back() = values.front() + 1.0;
    if (std::fabs(derivs.front() - derivs.back()) > 1e-9)
      throw DomainError("circle spline needs matching end derivatives");
    derivs.back() = derivs.front();
  }
  for (double d : derivs)
    if (!(d > 0.0)) throw DomainError("spline derivatives must be positive");
  // Fritsch-Carlson style clamp: keep endpoint slopes within 3x the secant
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    secant[i] = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
  for (std::size_t i = 0; i < n; ++i) {
    double cap = 3.0 * std::min(i > 0 ? secant[i - 1] : secant[i],
                                i + 1 < n ? secant[i] : secant[i - 1]);
    derivs[i] = std::min(derivs[i], cap);
  }
  SplineNode node{std::move(knots), std::move(values), std::move(derivs), 0.0};
  double bound = 0.0;
  for (std::size_t i = 0; i + 1 < node.knots.size(); ++i) {
    bound = std::max(bound, std::fabs(node.values[i + 1] - node.knots[i]));
    bound = std::max(bound, std::fabs(node.values[i] - node.knots[i + 1]));
  }
  node.disp_bound = bound;
  // sampled strict-positivity validation of the derivative
  for (std::size_t i = 0; i + 1 < node.knots.size(); ++i)
    for (int s = 0; s <= 32; ++s) {
      double x = node.knots[i] + (node.knots[i + 1] - node.knots[i]) * s / 32.0;
      if (!(hermite_deriv(node, x) > 1e-12))
        throw DomainError("spline derivative not strictly positive after clamping");
    }
  return Diffeo(make(m, std::move(node)));
}

Diffeo Diffeo::bump_push(Manifold m, double lo, double hi, double strength) {
  double L;
  if (m == Manifold::interval) {
    if (!(0.0 <= lo && lo < hi && hi <= 1.0 + 1e-15))
      throw DomainError("bump support must satisfy 0 <= lo < hi <= 1");
    L = hi - lo;
  } else {
    lo = frac(lo);
    double len = frac(hi - lo);
    L = len == 0.0 ? 1.0 : len;
    hi = lo + L;
  }
  if (!(std::fabs(strength) * std::numbers::pi < L))
    throw DomainError("bump slope bound violated: need |strength|*pi < support length");
  return Diffeo(make(m, BumpPushNode{lo, hi, strength}));
}

Diffeo Diffeo::compose(std::vector<Diffeo> parts) {
  if (parts.empty()) throw DomainError("compose needs at least one factor");
  Manifold m = parts.front().manifold();
  ComposeNode node;
  for (const auto& p : parts) {
    if (p.manifold() != m) throw DomainError("compose mixes manifolds");
    node.parts.push_back(p.ptr());
  }
  if (node.parts.size() == 1) return Diffeo(node.parts.front());
  return Diffeo(make(m, std::move(node)));
}

Diffeo Diffeo::inverse(const Diffeo& f) {
  if (const auto* inv = std::get_if<InverseNode>(&f.node().v))
    return Diffeo(inv->of);  // collapse double inverse
  return Diffeo(make(f.manifold(), InverseNode{f.ptr()}));
}

Manifold Diffeo::manifold() const { return n_->m; }

double Diffeo::lift(double x) const { return lift_eval(*n_, x); }

double Diffeo::lift_inverse(double x) const {
  if (const auto* inv = std::get_if<InverseNode>(&n_->v)) return lift_eval(*inv->of, x);
  return inverse_eval(*n_, x);
}

double Diffeo::operator()(double x) const {
  if (manifold() == Manifold::circle) return frac(lift_eval(*n_, frac(x)));
  if (x < -1e-9 || x > 1.0 + 1e-9) throw DomainError("point outside [0,1]");
  return std::clamp(lift_eval(*n_, std::clamp(x, 0.0, 1.0)), 0.0, 1.0);
}

double Diffeo::derivative(double x) const {
  double u = manifold() == Manifold::circle ? frac(x) : std::clamp(x, 0.0, 1.0);
  double d = deriv_eval(*n_, u);
  if (!(d > 0.0)) throw NumericError("nonpositive derivative: not orientation-preserving");
  return d;
}

Diffeo Diffeo::pow(int n) const {
  if (n == 0) return identity(manifold());
  Diffeo base = n > 0 ? *this : inverse(*this);
  std::vector<Diffeo> parts(static_cast<std::size_t>(n > 0 ? n : -n), base);
  return compose(std::move(parts));
}

bool Diffeo::same_expr(const Diffeo& other) const {
  struct Cmp {
    static bool eq(const DiffeoNode& a, const DiffeoNode& b) {
      if (&a == &b) return true;
      if (a.m != b.m || a.v.index() != b.v.index()) return false;
      if (const auto* r = std::get_if<RotationNode>(&a.v))
        return r->c == std::get<RotationNode>(b.v).c;
      if (const auto* s = std::get_if<SinePerturbNode>(&a.v)) {
        const auto& t = std::get<SinePerturbNode>(b.v);
        return s->k == t.k && s->eps == t.eps;
      }
      if (const auto* s = std::get_if<SplineNode>(&a.v)) {
        const auto& t = std::get<SplineNode>(b.v);
        return s->knots == t.knots && s->values == t.values && s->derivs == t.derivs;
      }
      if (const auto* bp = std::get_if<BumpPushNode>(&a.v)) {
        const auto& t = std::get<BumpPushNode>(b.v);
        return bp->lo == t.lo && bp->hi == t.hi && bp->strength == t.strength;
      }
      if (const auto* c = std::get_if<ComposeNode>(&a.v)) {
        const auto& t = std::get<ComposeNode>(b.v);
        if (c->parts.size() != t.parts.size()) return false;
        for (std::size_t i = 0; i < c->parts.size(); ++i)
          if (!eq(*c->parts[i], *t.parts[i])) return false;
        return true;
      }
      if (const auto* inv = std::get_if<InverseNode>(&a.v))
        return eq(*inv->of, *std::get<InverseNode>(b.v).of);
      return true;  // IdentityNode
    }
  };
  return Cmp::eq(*n_, *other.n_);
}

Diffeo commutator(const Diffeo& f, const Diffeo& g) {
  return Diffeo::compose({Diffeo::inverse(f), Diffeo::inverse(g), f, g});
}

Diffeo conjugate(const Diffeo& g, const Diffeo& f) {
  return Diffeo::compose({g, f, Diffeo::inverse(g)});
}

double displacement_bound(const Diffeo& f) { return disp_bound(f.node()); }

// --- JSON --------------------------------------------------------------

namespace {

nlohmann::json node_to_json(const DiffeoNode& n) {
  nlohmann::json j;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IdentityNode>) {
          j["kind"] = "identity";
        } else if constexpr (std::is_same_v<T, RotationNode>) {
          j["kind"] = "rotation";
          j["c"] = node.c;
        } else if constexpr (std::is_same_v<T, SinePerturbNode>) {
          j["kind"] = "sine_perturb";
          j["k"] = node.k;
          j["eps"] = node.eps;
        } else if constexpr (std::is_same_v<T, SplineNode>) {
          j["kind"] = "spline";
          j["knots"] = node.knots;
          j["values"] = node.values;
          j["derivs"] = node.derivs;
        } else if constexpr (std::is_same_v<T, BumpPushNode>) {
          j["kind"] = "bump_push";
          j["support"] = {node.lo, n.m == Manifold::circle && node.hi > 1.0 ? frac(node.hi)
                                                                            : node.hi};
          j["strength"] = node.strength;
        } else if constexpr (std::is_same_v<T, ComposeNode>) {
          j["kind"] = "compose";
          auto arr = nlohmann::json::array();
          for (const auto& p : node.parts) arr.push_back(node_to_json(*p));
          j["of"] = arr;
        } else {  // InverseNode
          j["kind"] = "inverse";
          j["of"] = node_to_json(*node.of);
        }
      },
      n.v);
  return j;
}

Diffeo node_from_json(const nlohmann::json& j, Manifold m) {
  if (!j.is_object() || !j.contains("kind")) throw DomainError("diffeo json needs 'kind'");
  if (j.contains("manifold")) m = manifold_from_name(j.at("manifold").get<std::string>());
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return Diffeo::identity(m);
  if (kind == "rotation") {
    if (m != Manifold::circle) throw DomainError("rotation is circle-only");
    return Diffeo::rotation(j.at("c").get<double>());
  }
  if (kind == "sine_perturb")
    return Diffeo::sine_perturb(m, j.at("k").get<int>(), j.at("eps").get<double>());
  if (kind == "spline")
    return Diffeo::spline(m, j.at("knots").get<std::vector<double>>(),
                          j.at("values").get<std::vector<double>>(),
                          j.at("derivs").get<std::vector<double>>());
  if (kind == "bump_push") {
    auto sup = j.at("support").get<std::vector<double>>();
    if (sup.size() != 2) throw DomainError("bump_push support must be [lo,hi]");
    return Diffeo::bump_push(m, sup[0], sup[1], j.at("strength").get<double>());
  }
  if (kind == "compose") {
    std::vector<Diffeo> parts;
    for (const auto& p : j.at("of")) parts.push_back(node_from_json(p, m));
    return Diffeo::compose(std::move(parts));
  }
  if (kind == "inverse") return Diffeo::inverse(node_from_json(j.at("of"), m));
  throw DomainError("unknown diffeo kind: " + kind);
}

}  // namespace

nlohmann::json diffeo_to_json(const Diffeo& f) {
  nlohmann::json j = node_to_json(f.node());
  j["manifold"] = manifold_name(f.manifold());
  return j;
}

Diffeo diffeo_from_json(const nlohmann::json& j) {
  if (!j.contains("manifold"))
    throw DomainError("top-level diffeo json needs 'manifold'");
  return node_from_json(j, manifold_from_name(j.at("manifold").get<std::string>()));
}

}  // namespace onedim
