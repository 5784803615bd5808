#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <json.hpp>

#include "onedim/config.hpp"
#include "onedim/manifold.hpp"

namespace onedim {

struct DiffeoNode;
using NodePtr = std::shared_ptr<const DiffeoNode>;

struct IdentityNode {};
struct RotationNode {
  double c;  // normalized to [0,1); circle only
};
struct SinePerturbNode {
  int k;
  double eps;  // x + eps*sin(2*pi*k*x); requires |eps|*2*pi*k < 1
};
// Monotone cubic Hermite spline on knots spanning [0,1]. Derivative data is
// clamped (Fritsch-Carlson style, factor 3) to preserve monotonicity. On the
// interval it fixes 0 and 1; on the circle values.back() = values.front()+1
// and the end derivatives agree, so the spline is the lift restricted to a
// fundamental domain.
struct SplineNode {
  std::vector<double> knots, values, derivs;
  double disp_bound;  // sup |s(x)-x|, precomputed for inverse bracketing
};
// x + strength*sin(pi*(x-lo)/(hi-lo))^2 on the open support (lo,hi),
// identity elsewhere; C^1 across the support endpoints. Requires
// |strength|*pi < hi-lo. On the circle hi > 1 means the support wraps.
struct BumpPushNode {
  double lo, hi, strength;
};
struct ComposeNode {
  std::vector<NodePtr> parts;  // parts[0] applied last: compose({f,g}) = f o g
};
struct InverseNode {
  NodePtr of;
};

struct DiffeoNode {
  Manifold m;
  std::variant<IdentityNode, RotationNode, SinePerturbNode, SplineNode,
               BumpPushNode, ComposeNode, InverseNode>
      v;
};

// Immutable orientation-preserving C^1 diffeomorphism of the interval or the
// circle, represented as an expression tree over a small primitive family.
// Circle maps evaluate through their lift: a strictly increasing map of the
// line commuting with x -> x+1.
class Diffeo {
 public:
  static Diffeo identity(Manifold m);
  static Diffeo rotation(double c);
  static Diffeo sine_perturb(Manifold m, int k, double eps);
  static Diffeo spline(Manifold m, std::vector<double> knots,
                       std::vector<double> values, std::vector<double> derivs);
  static Diffeo bump_push(Manifold m, double lo, double hi, double strength);
  static Diffeo compose(std::vector<Diffeo> parts);
  static Diffeo inverse(const Diffeo& f);

  Manifold manifold() const;
  // Value at a point of the manifold (circle: coordinates in [0,1)).
  double operator()(double x) const;
  // Lift evaluation; for the interval this is the map itself on [0,1].
  double lift(double x) const;
  // Solves lift(y) = x. Analytic where possible, monotone bisection
  // (resolved below tol_eval) otherwise.
  double lift_inverse(double x) const;
  // Exact derivative via the chain rule; throws NumericError if it comes out
  // nonpositive anywhere it is evaluated.
  double derivative(double x) const;

  Diffeo pow(int n) const;  // negative n composes the inverse
  // Wraps an already-validated node (e.g. a child of a compose).
  static Diffeo from_node(NodePtr p) { return Diffeo(std::move(p)); }
  const DiffeoNode& node() const { return *n_; }
  NodePtr ptr() const { return n_; }
  bool same_expr(const Diffeo& other) const;

 private:
  explicit Diffeo(NodePtr p) : n_(std::move(p)) {}
  NodePtr n_;
};

// [f,g] = f^-1 g^-1 f g as an expression tree (no simplification).
Diffeo commutator(const Diffeo& f, const Diffeo& g);
// g f g^-1 as an expression tree.
Diffeo conjugate(const Diffeo& g, const Diffeo& f);

// Upper bound on |lift(x) - x|, used for inverse bracketing.
double displacement_bound(const Diffeo& f);

// JSON wire format, e.g.
//   {"manifold":"circle","kind":"rotation","c":0.5}
//   {"kind":"compose","of":[...]}, {"kind":"inverse","of":{...}}
//   {"kind":"bump_push","support":[0.2,0.4],"strength":0.05}
nlohmann::json diffeo_to_json(const Diffeo& f);
Diffeo diffeo_from_json(const nlohmann::json& j);

}  // namespace onedim
