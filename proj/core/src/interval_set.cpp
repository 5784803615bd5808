#include "onedim/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "onedim/errors.hpp"

namespace onedim {

double offset_in(Manifold m, const Ival& iv, double x) {
  if (m == Manifold::interval) return x - iv.lo;
  double r = frac(x - iv.lo);
  // split the complementary arc: offsets beyond its midpoint count as negative
  double cut = iv.len() + 0.5 * (1.0 - iv.len());
  if (r > cut) r -= 1.0;
  return r;
}

bool ival_contains(Manifold m, const Ival& iv, double x, double slack) {
  double o = offset_in(m, iv, x);
  return o >= -slack && o <= iv.len() + slack;
}

namespace {
double seg_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}
}  // namespace

double overlap_len(Manifold m, const Ival& a, const Ival& b) {
  if (m == Manifold::interval) return seg_overlap(a.lo, a.hi, b.lo, b.hi);
  double blo = frac(b.lo - a.lo);
  return seg_overlap(0.0, a.len(), blo, blo + b.len()) +
         seg_overlap(0.0, a.len(), blo - 1.0, blo - 1.0 + b.len());
}

bool ivals_intersect(Manifold m, const Ival& a, const Ival& b, double tol) {
  return overlap_len(m, a, b) > tol;
}

bool ivals_disjoint(Manifold m, const Ival& a, const Ival& b, double tol) {
  return overlap_len(m, a, b) <= tol;
}

bool ivals_equal(Manifold m, const Ival& a, const Ival& b, double tol) {
  if (std::fabs(a.len() - b.len()) > tol) return false;
  return m == Manifold::interval ? std::fabs(a.lo - b.lo) <= tol
                                 : point_dist(m, frac(a.lo), frac(b.lo)) <= tol;
}

bool ival_contains_ival(Manifold m, const Ival& outer, const Ival& inner, double slack) {
  double o = offset_in(m, outer, inner.lo);
  return o >= -slack && o + inner.len() <= outer.len() + slack;
}

IntervalSet IntervalSet::whole(Manifold m) {
  IntervalSet s(m);
  s.whole_ = true;
  return s;
}

IntervalSet IntervalSet::from_intervals(Manifold m, std::vector<Ival> parts) {
  IntervalSet s(m);
  for (auto& iv : parts) {
    if (!(iv.lo < iv.hi)) throw DomainError("interval with nonpositive length");
    if (m == Manifold::interval) {
      if (iv.lo < -1e-12 || iv.hi > 1.0 + 1e-12)
        throw DomainError("interval outside [0,1]");
      iv.lo = std::max(iv.lo, 0.0);
      iv.hi = std::min(iv.hi, 1.0);
    } else {
      if (iv.len() > 1.0 + 1e-12) throw DomainError("circle interval longer than 1");
      double len = std::min(iv.len(), 1.0);
      iv.lo = frac(iv.lo);
      iv.hi = iv.lo + len;
    }
  }
  std::sort(parts.begin(), parts.end(),
            [](const Ival& a, const Ival& b) { return a.lo < b.lo; });
  // Merge strictly overlapping parts only. Parts touching at a single point
  // stay separate: the union of the open intervals (a,p) and (p,b) omits p,
  // which is exactly how supports look around an isolated fixed point.
  std::vector<Ival> merged;
  for (const auto& iv : parts) {
    if (!merged.empty() && iv.lo < merged.back().hi - 1e-15) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  if (m == Manifold::circle) {
    // the last part may wrap past 1 and overlap parts at the start
    while (merged.size() > 1 && merged.back().hi > 1.0 &&
           merged.back().hi - 1.0 > merged.front().lo + 1e-15) {
      Ival& last = merged.back();
      last.hi = std::max(last.hi, merged.front().hi + 1.0);
      merged.erase(merged.begin());
      if (last.hi - last.lo > 1.0 + 1e-15) {
        s.whole_ = true;  // came strictly all the way around
        return s;
      }
      if (last.hi - last.lo >= 1.0) {
        last.hi = last.lo + 1.0;  // exactly once around: circle minus one point
        break;
      }
    }
  }
  s.parts_ = std::move(merged);
  return s;
}

bool IntervalSet::contains(double x, double slack) const {
  if (whole_) return true;
  for (const auto& iv : parts_)
    if (ival_contains(m_, iv, x, slack)) return true;
  return false;
}

double IntervalSet::measure() const {
  if (whole_) return 1.0;
  double s = 0.0;
  for (const auto& iv : parts_) s += iv.len();
  return s;
}

double interval_set_mismatch(const IntervalSet& a, const IntervalSet& b) {
  constexpr double kBig = std::numeric_limits<double>::infinity();
  if (a.is_whole() != b.is_whole()) return kBig;
  if (a.is_whole()) return 0.0;
  if (a.size() != b.size()) return kBig;
  Manifold m = a.manifold();
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const auto& pa : a.parts()) {
    double best = kBig;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const auto& pb = b.parts()[j];
      double d = std::max(point_dist(m, frac(pa.lo), frac(pb.lo)),
                          std::fabs(pa.len() - pb.len()));
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best == kBig) return kBig;
    used[best_j] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace onedim
