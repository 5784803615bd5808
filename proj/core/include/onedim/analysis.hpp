#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "onedim/config.hpp"
#include "onedim/diffeo.hpp"
#include "onedim/interval_set.hpp"

namespace onedim {

// Fix f, reported as isolated points plus closed plateau intervals (maximal
// intervals where the map agrees with the identity within tol_id). The
// `whole` flag marks maps indistinguishable from the identity.
struct FixedSet {
  bool whole = false;
  std::vector<double> points;
  std::vector<Ival> plateaus;  // closed; circle plateaus may wrap (hi > 1)
  std::vector<std::string> warnings;
  bool empty() const { return !whole && points.empty() && plateaus.empty(); }
};

// Sign changes of the displacement on a uniform grid refined by bisection,
// plateau runs reported as intervals, tangential zeros recovered by local
// minimization. Inverses and conjugation wrappers are peeled structurally
// first (Fix f = Fix f^-1, Fix(g w g^-1) = g Fix w), so supports of
// conjugates line up with mapped supports to well below tol_geom.
FixedSet fixed_set(const Diffeo& f, const RunConfig& cfg = default_config());

// supp f = M minus the closure of Fix f, as open intervals.
IntervalSet support(const Diffeo& f, const RunConfig& cfg = default_config());

// Fix f nonempty. Interval maps are always grounded (0 and 1 are fixed).
bool is_grounded(const Diffeo& f, const RunConfig& cfg = default_config());

struct RotationNumber {
  double value = 0.0;  // in [0,1)
  bool rational = false;
  long p = 0;
  long q = 1;
  bool converged = true;
  long iterations = 0;
  std::vector<std::string> warnings;
};

// Orbit-average estimate (f~^n(0) - 0)/n with n doubling until successive
// estimates agree within tol_rot. Grounded maps short-circuit to zero.
// The rational tag requires a continued-fraction convergent p/q with
// q <= rational_q_cap within 1e-6 AND a nonempty fixed set of f^q.
RotationNumber rotation_number(const Diffeo& f, const RunConfig& cfg = default_config());

struct PeriodicEntry {
  int period = 1;  // least period
  bool whole = false;
  std::vector<double> points;
  std::vector<Ival> plateaus;
};

// Fixed sets of f^p for p = 1..cap, each new point tagged with its least
// period. Orientation-preserving interval maps only ever have period 1.
std::vector<PeriodicEntry> periodic_points(const Diffeo& f, int cap,
                                           const RunConfig& cfg = default_config());

struct VariationEstimate {
  double value = 0.0;
  int levels = 0;  // log2 of the final partition size
  bool converged = false;
};

// Total variation of f' via partition sums on dyadic grids, doubling from
// 2^var_start_pow until the increment drops below tol_var. Circle partitions
// close up (last node wraps to the first).
VariationEstimate derivative_variation(const Diffeo& f,
                                       const RunConfig& cfg = default_config());

struct Displacement {
  double value = 0.0;
  double argmax = 0.0;
  Tri nonzero = Tri::indeterminate;  // yes if > tol_nz, no if < tol_id
};

// sup over the manifold of dist(f(x), x): grid scan plus local refinement.
Displacement sup_displacement(const Diffeo& f, const RunConfig& cfg = default_config());

// Image of an open interval under an orientation-preserving map.
Ival image_interval(const Diffeo& f, const Ival& iv);

// Image of a fixed set under a diffeomorphism (conjugation transport).
FixedSet map_fixed_set(const Diffeo& g, const FixedSet& fs);

// Thread cap honoring the ONEDIM_THREADS environment variable. Grid sweeps
// use fixed chunk boundaries so results are identical at any thread count.
int thread_cap();
void parallel_chunks(std::size_t total, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace onedim
