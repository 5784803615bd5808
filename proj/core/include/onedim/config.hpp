#pragma once

#include <cstdint>

namespace onedim {

// Global tolerance ladder. Every numeric decision in the library goes through
// one of these knobs; nothing hard-codes its own epsilon.
struct Tolerances {
  double id = 1e-9;     // "is the identity here" threshold on |f(x)-x|
  double nz = 1e-3;     // "is definitely not the identity" threshold
  double root = 1e-11;  // bisection target for isolated fixed points
  double rot = 1e-7;    // rotation number convergence
  double geom = 1e-8;   // interval endpoint comparisons
  double var = 1e-6;    // variation refinement stopping increment
  double eval = 1e-12;  // inverse evaluation (monotone bisection) target
};

enum class Tri { yes, no, indeterminate };

inline const char* tri_name(Tri t) {
  switch (t) {
    case Tri::yes: return "yes";
    case Tri::no: return "no";
    default: return "indeterminate";
  }
}

struct RunConfig {
  Tolerances tol;
  int grid_pow = 14;              // uniform sampling grid has 2^grid_pow cells
  int period_cap = 32;            // periodic point search cap
  int proposition_budget = 64;    // max interval pairs examined per action
  int rational_q_cap = 64;        // max denominator for rational rotation tags
  int var_start_pow = 10;         // variation partitions start at 2^10 cells
  int var_max_pow = 20;           // and stop refining at 2^20
  int rot_start_pow = 6;          // rotation estimates start at 2^6 iterates
  long rot_max_iter = 1L << 22;   // orbit length cap for rotation estimates
  std::uint64_t seed = 1;
};

inline const RunConfig& default_config() {
  static const RunConfig cfg{};
  return cfg;
}

}  // namespace onedim
