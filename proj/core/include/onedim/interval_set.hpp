#pragma once

#include <vector>

#include "onedim/config.hpp"
#include "onedim/manifold.hpp"

namespace onedim {

// Open interval. On the interval manifold 0 <= lo < hi <= 1. On the circle
// lo is in [0,1) and lo < hi <= lo+1; hi > 1 means the interval wraps
// through 0. Length hi-lo, at most 1.
struct Ival {
  double lo = 0.0;
  double hi = 0.0;
  double len() const { return hi - lo; }
};

// Signed coordinate of x relative to iv.lo. On the circle the complementary
// arc is split in half: points just before lo come out negative, points just
// past hi come out > len().
double offset_in(Manifold m, const Ival& iv, double x);

// x lies in iv up to `slack` (positive slack = allow slightly outside,
// negative slack = require strictly inside by that margin).
bool ival_contains(Manifold m, const Ival& iv, double x, double slack);

// Total measure of the overlap of two open intervals.
double overlap_len(Manifold m, const Ival& a, const Ival& b);

bool ivals_intersect(Manifold m, const Ival& a, const Ival& b, double tol);
bool ivals_disjoint(Manifold m, const Ival& a, const Ival& b, double tol);
bool ivals_equal(Manifold m, const Ival& a, const Ival& b, double tol);

// inner is contained in outer up to slack at both endpoints.
bool ival_contains_ival(Manifold m, const Ival& outer, const Ival& inner, double slack);

// A finite disjoint union of open intervals of one manifold, plus a "whole
// manifold" special case (the support of a fixed-point-free circle map).
class IntervalSet {
 public:
  explicit IntervalSet(Manifold m) : m_(m) {}
  static IntervalSet empty(Manifold m) { return IntervalSet(m); }
  static IntervalSet whole(Manifold m);
  // Sorts, merges overlapping parts, validates ranges.
  static IntervalSet from_intervals(Manifold m, std::vector<Ival> parts);

  Manifold manifold() const { return m_; }
  bool is_whole() const { return whole_; }
  bool is_empty() const { return !whole_ && parts_.empty(); }
  const std::vector<Ival>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }

  bool contains(double x, double slack) const;
  double measure() const;

 private:
  Manifold m_;
  bool whole_ = false;
  std::vector<Ival> parts_;
};

// max over components of endpoint mismatch after greedy matching; huge value
// when the component counts differ. Used by tests comparing supports.
double interval_set_mismatch(const IntervalSet& a, const IntervalSet& b);

}  // namespace onedim
