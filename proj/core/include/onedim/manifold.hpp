#pragma once

#include <cmath>
#include <string>

#include "onedim/errors.hpp"

namespace onedim {

// The two phase spaces: the unit interval [0,1] and the circle R/Z with
// coordinates in [0,1).
enum class Manifold { interval, circle };

inline std::string manifold_name(Manifold m) {
  return m == Manifold::interval ? "interval" : "circle";
}

inline Manifold manifold_from_name(const std::string& s) {
  if (s == "interval") return Manifold::interval;
  if (s == "circle") return Manifold::circle;
  throw DomainError("unknown manifold: " + s);
}

// Fractional part in [0,1).
inline double frac(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;  // guards against floor rounding at negative epsilons
  return f;
}

// Distance between two points of the manifold.
inline double point_dist(Manifold m, double a, double b) {
  if (m == Manifold::interval) return std::fabs(a - b);
  double d = frac(a - b);
  return std::min(d, 1.0 - d);
}

// Distance from a real displacement to the nearest integer (circle only:
// a lift fixes a point iff its displacement there is an integer).
inline double dist_to_int(double d) {
  return std::fabs(d - std::round(d));
}

}  // namespace onedim
