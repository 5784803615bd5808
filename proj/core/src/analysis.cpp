#include "onedim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <thread>
#include <utility>
#include <variant>

#include "onedim/errors.hpp"

namespace onedim {

int thread_cap() {
  static const int cap = [] {
    if (const char* env = std::getenv("ONEDIM_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) return static_cast<int>(std::min(v, 64L));
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(std::min(hc, 64u));
  }();
  return cap;
}

void parallel_chunks(std::size_t total,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  // Chunk boundaries are fixed regardless of the thread count, so any
  // reduction done chunk-by-chunk gives identical results at any parallelism.
  constexpr std::size_t kChunk = 8192;
  const int threads = thread_cap();
  if (threads <= 1 || total <= kChunk) {
    fn(0, total);
    return;
  }
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      fn(c * kChunk, std::min(total, c * kChunk + kChunk));
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min<std::size_t>(threads, chunks);
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

namespace {

constexpr double kEdgeTol = 1e-13;      // |f(x)-x| level anchoring plateau edges
constexpr double kNearTangency = 1e-6;  // local minima below this draw a warning
constexpr double kPointDedupe = 1e-9;

std::string fmt6(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

using Fn = std::function<double(double)>;

std::pair<double, double> golden_min(const Fn& fn, double a, double b) {
  constexpr double gr = 0.6180339887498949;  // (sqrt(5)-1)/2
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int i = 0; i < 90 && (b - a) > 1e-14; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = fn(d);
    }
  }
  double x = 0.5 * (a + b);
  return {x, fn(x)};
}

double bisect_sign_change(const Fn& fn, double a, double b, double fa, double xtol) {
  for (int i = 0; i < 200 && (b - a) > xtol; ++i) {
    double mid = 0.5 * (a + b);
    double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Warnings are capped so a long weakly-displaced stretch cannot flood the
// report with one near-tangency note per grid cell.
void add_warning(FixedSet& fs, std::string w) {
  if (fs.warnings.size() < 12)
    fs.warnings.push_back(std::move(w));
  else if (fs.warnings.size() == 12)
    fs.warnings.push_back("(further warnings suppressed)");
}

// ---- structural layer ------------------------------------------------------

bool is_inverse_pair(const NodePtr& a, const NodePtr& b) {
  return Diffeo::from_node(a).same_expr(Diffeo::inverse(Diffeo::from_node(b)));
}

struct Peeled {
  Diffeo core;
  std::vector<Diffeo> conj;  // outermost conjugator first
};

// Fix f = Fix f^-1, and Fix(g w g^-1) = g(Fix w). Conjugation wrappers are
// recognized one factor pair at a time on the flat factor list, so nested
// conjugation words peel completely even when built as a single compose.
Peeled peel_wrappers(const Diffeo& f) {
  Diffeo cur = f;
  std::vector<Diffeo> conj;
  for (;;) {
    const DiffeoNode& n = cur.node();
    if (const auto* inv = std::get_if<InverseNode>(&n.v)) {
      cur = Diffeo::from_node(inv->of);
      continue;
    }
    const auto* comp = std::get_if<ComposeNode>(&n.v);
    if (comp && comp->parts.size() >= 2 &&
        is_inverse_pair(comp->parts.front(), comp->parts.back())) {
      conj.push_back(Diffeo::from_node(comp->parts.front()));
      if (comp->parts.size() == 2) {
        cur = Diffeo::identity(n.m);
      } else if (comp->parts.size() == 3) {
        cur = Diffeo::from_node(comp->parts[1]);
      } else {
        std::vector<Diffeo> mid;
        mid.reserve(comp->parts.size() - 2);
        for (std::size_t i = 1; i + 1 < comp->parts.size(); ++i)
          mid.push_back(Diffeo::from_node(comp->parts[i]));
        cur = Diffeo::compose(std::move(mid));
      }
      continue;
    }
    break;
  }
  return {std::move(cur), std::move(conj)};
}

std::optional<Diffeo> power_base(const Diffeo& f) {
  const auto* comp = std::get_if<ComposeNode>(&f.node().v);
  if (!comp || comp->parts.size() < 2) return std::nullopt;
  Diffeo base = Diffeo::from_node(comp->parts.front());
  for (std::size_t i = 1; i < comp->parts.size(); ++i)
    if (!base.same_expr(Diffeo::from_node(comp->parts[i]))) return std::nullopt;
  return base;
}

void finalize_fixed_set(FixedSet& fs, Manifold m);
FixedSet fixed_set_impl(const Diffeo& f, const RunConfig& cfg);

void push_point(FixedSet& fs, Manifold m, double x) {
  fs.points.push_back(m == Manifold::circle ? frac(x) : std::clamp(x, 0.0, 1.0));
}

void push_plateau(FixedSet& fs, Manifold m, double lo, double hi) {
  if (!(hi > lo)) {
    push_point(fs, m, lo);
    return;
  }
  if (m == Manifold::circle) {
    double l = frac(lo);
    fs.plateaus.push_back({l, l + std::min(hi - lo, 1.0)});
  } else {
    fs.plateaus.push_back({std::max(lo, 0.0), std::min(hi, 1.0)});
  }
}

// ---- shared root scanning ---------------------------------------------------

// Scans the displacement e over [a,b] for isolated zeros: sign changes are
// bisected to tol_root, tangential dips recovered by golden-section. Appends
// points (and near-tangency warnings) to fs. Used for spline pieces.
void scan_segment(const Fn& e, double a, double b, int ns, const RunConfig& cfg,
                  Manifold m, FixedSet& fs) {
  std::vector<double> xs(ns + 1), ev(ns + 1);
  for (int i = 0; i <= ns; ++i) {
    xs[i] = a + (b - a) * i / ns;
    ev[i] = e(xs[i]);
  }
  auto marked = [&](int i) { return std::fabs(ev[i]) < cfg.tol.id; };
  bool all = true;
  for (int i = 0; i <= ns && all; ++i) all = marked(i);
  if (all) {
    // numerically the identity on the whole segment
    push_plateau(fs, m, a, b);
    return;
  }
  auto absf = [&](double x) { return std::fabs(e(x)); };
  for (int i = 0; i < ns; ++i) {
    if (!marked(i) && !marked(i + 1) && ev[i] * ev[i + 1] < 0.0)
      push_point(fs, m, bisect_sign_change(e, xs[i], xs[i + 1], ev[i], cfg.tol.root));
  }
  for (int i = 1; i < ns; ++i) {
    bool lm = std::fabs(ev[i]) < std::fabs(ev[i - 1]) &&
              std::fabs(ev[i]) <= std::fabs(ev[i + 1]);
    if (!lm) continue;
    if (!marked(i) && ev[i - 1] * ev[i + 1] < 0.0) continue;  // transversal: bisected above
    if (std::fabs(ev[i]) > 1e-4) continue;
    auto [x, v] = golden_min(absf, xs[i - 1], xs[i + 1]);
    if (v < cfg.tol.id)
      push_point(fs, m, x);
    else if (v < kNearTangency)
      add_warning(fs, "near-tangency: |f(x)-x| dips to " + fmt6(v) + " near x=" + fmt6(x));
  }
  // a zero hugging a segment end can hide behind a marked end sample
  if (marked(0) && !marked(1)) {
    auto [x, v] = golden_min(absf, xs[0], xs[1]);
    if (v < cfg.tol.id) push_point(fs, m, x);
  }
  if (marked(ns) && !marked(ns - 1)) {
    auto [x, v] = golden_min(absf, xs[ns - 1], xs[ns]);
    if (v < cfg.tol.id) push_point(fs, m, x);
  }
}

// ---- analytic primitives -----------------------------------------------------

FixedSet whole_set() {
  FixedSet fs;
  fs.whole = true;
  return fs;
}

FixedSet spline_fixed_set(const Diffeo& f, const SplineNode& s, const RunConfig& cfg) {
  Manifold m = f.manifold();
  FixedSet fs;
  const auto& K = s.knots;
  const auto& V = s.values;
  const auto& D = s.derivs;
  std::vector<long> shifts;
  if (m == Manifold::interval) {
    shifts.push_back(0);
  } else {
    double dmin = V[0] - K[0], dmax = dmin;
    for (std::size_t i = 1; i < K.size(); ++i) {
      double d = V[i] - K[i];
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    for (long mm = static_cast<long>(std::floor(dmin - 0.25));
         mm <= static_cast<long>(std::ceil(dmax + 0.25)); ++mm)
      shifts.push_back(mm);
  }
  // knot fixed points are exact in the stored data
  std::size_t nk = K.size() - (m == Manifold::circle ? 1 : 0);
  for (std::size_t i = 0; i < nk; ++i)
    for (long mm : shifts)
      if (V[i] == K[i] + static_cast<double>(mm)) {
        push_point(fs, m, K[i]);
        break;
      }
  for (std::size_t i = 0; i + 1 < K.size(); ++i) {
    double a = K[i], b = K[i + 1];
    if (!(b > a)) continue;
    if (V[i] == a && V[i + 1] == b && D[i] == 1.0 && D[i + 1] == 1.0) {
      // cubic interpolation reproduces the identity on this piece exactly
      push_plateau(fs, m, a, b);
      continue;
    }
    for (long mm : shifts) {
      double sh = static_cast<double>(mm);
      double ea = V[i] - a - sh, eb = V[i + 1] - b - sh;
      // e can move at most by the total variation of H(x)-x on the piece
      double reach = (V[i + 1] - V[i]) + (b - a);
      if (std::min(std::fabs(ea), std::fabs(eb)) > reach) continue;
      auto e = [&f, sh](double x) { return f.lift(x) - x - sh; };
      scan_segment(e, a, b, 48, cfg, m, fs);
    }
  }
  finalize_fixed_set(fs, m);
  return fs;
}

std::optional<FixedSet> analytic_fixed_set(const Diffeo& f, const RunConfig& cfg) {
  const DiffeoNode& n = f.node();
  Manifold m = n.m;
  if (std::get_if<IdentityNode>(&n.v)) return whole_set();
  if (const auto* r = std::get_if<RotationNode>(&n.v)) {
    if (r->c == 0.0) return whole_set();
    FixedSet fs;
    if (std::min(r->c, 1.0 - r->c) < cfg.tol.id)
      add_warning(fs, "rotation by " + fmt6(r->c) +
                          " is within tol_id of the identity but not exactly it");
    return fs;  // fixed-point free
  }
  if (const auto* s = std::get_if<SinePerturbNode>(&n.v)) {
    if (s->eps == 0.0) return whole_set();
    FixedSet fs;
    int top = 2 * s->k - (m == Manifold::circle ? 1 : 0);
    for (int j = 0; j <= top; ++j) fs.points.push_back(j / (2.0 * s->k));
    return fs;
  }
  if (const auto* b = std::get_if<BumpPushNode>(&n.v)) {
    if (b->strength == 0.0) return whole_set();
    FixedSet fs;
    if (m == Manifold::interval) {
      if (b->lo > 0.0)
        fs.plateaus.push_back({0.0, b->lo});
      else
        fs.points.push_back(0.0);
      if (b->hi < 1.0)
        fs.plateaus.push_back({b->hi, 1.0});
      else
        fs.points.push_back(1.0);
    } else {
      double L = b->hi - b->lo;  // in (0,1]
      if (L >= 1.0)
        fs.points.push_back(b->lo);
      else
        push_plateau(fs, m, frac(b->hi), frac(b->hi) + (1.0 - L));
    }
    finalize_fixed_set(fs, m);
    return fs;
  }
  if (const auto* s = std::get_if<SplineNode>(&n.v)) return spline_fixed_set(f, *s, cfg);
  return std::nullopt;  // compose / inverse: numeric
}

// ---- numeric layer -----------------------------------------------------------

// Boundary of {|eta| <= kEdgeTol} between a point inside a plateau and one
// outside, bisected and then sharpened by secant iteration on sqrt|eta|
// (the displacement grows quadratically out of a C^1 plateau).
double refine_edge(const Fn& etaf, double inside, double outside) {
  double a = inside, b = outside;
  for (int i = 0; i < 70 && std::fabs(b - a) > 1e-15; ++i) {
    double mid = 0.5 * (a + b);
    if (std::fabs(etaf(mid)) <= kEdgeTol)
      a = mid;
    else
      b = mid;
  }
  double edge = a;
  const double dir = (outside > inside) ? 1.0 : -1.0;
  const double span = std::fabs(outside - inside);
  for (double d : {std::min(0.25 * span, 1e-4), std::min(0.03 * span, 1e-5)}) {
    double x1 = edge + dir * d, x2 = edge + dir * 2.0 * d;
    double r1 = std::sqrt(std::fabs(etaf(x1)));
    double r2 = std::sqrt(std::fabs(etaf(x2)));
    if (!(r2 > r1 && r1 > 0.0)) break;
    double cand = x1 - dir * r1 * d / (r2 - r1);
    bool in_bracket = dir > 0 ? (cand >= inside && cand <= x1) : (cand <= inside && cand >= x1);
    if (!in_bracket || std::fabs(etaf(cand)) > 1e-11) break;
    edge = cand;
  }
  return edge;
}

FixedSet numeric_fixed_set(const Diffeo& f, const RunConfig& cfg) {
  const Manifold m = f.manifold();
  const std::size_t N = std::size_t{1} << cfg.grid_pow;
  std::vector<double> eta(N + 1);
  parallel_chunks(N + 1, [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      double x = static_cast<double>(i) / static_cast<double>(N);
      eta[i] = f.lift(x) - x;
    }
  });
  double shift = 0.0;
  if (m == Manifold::circle) {
    // a lift fixes a point iff its displacement is an integer there; the
    // displacement range has width < 1, so at most a couple are candidates
    double dmin = eta[0], dmax = eta[0];
    for (double d : eta) {
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    long best_m = 0;
    double best = std::numeric_limits<double>::infinity();
    for (long mm = static_cast<long>(std::floor(dmin));
         mm <= static_cast<long>(std::ceil(dmax)); ++mm) {
      double lo = std::numeric_limits<double>::infinity();
      for (double d : eta) lo = std::min(lo, std::fabs(d - static_cast<double>(mm)));
      if (lo < best) {
        best = lo;
        best_m = mm;
      }
    }
    shift = static_cast<double>(best_m);
    for (double& d : eta) d -= shift;
  }
  auto etaf = [&f, shift](double x) { return f.lift(x) - x - shift; };
  auto abse = [&etaf](double x) { return std::fabs(etaf(x)); };

  FixedSet fs;
  std::vector<char> mark(N + 1);
  bool allm = true;
  double minabs = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= N; ++i) {
    mark[i] = std::fabs(eta[i]) < cfg.tol.id;
    allm = allm && mark[i];
    minabs = std::min(minabs, std::fabs(eta[i]));
  }
  if (allm) {
    fs.whole = true;
    return fs;
  }
  if (m == Manifold::circle && minabs > 0.01) return fs;  // far from grounded

  // Choose the scanning origin so no run straddles the seam: on the circle
  // start at an unmarked sample (one exists), on the interval at 0.
  std::size_t k0 = 0;
  if (m == Manifold::circle)
    while (k0 < N && mark[k0]) ++k0;
  auto IDX = [&](std::size_t j) { return m == Manifold::circle ? (k0 + j) % N : j; };
  auto X = [&](std::size_t j) {
    return static_cast<double>(k0 + j) / static_cast<double>(N);
  };
  auto E = [&](std::size_t j) { return eta[IDX(j)]; };
  auto M = [&](std::size_t j) { return mark[IDX(j)] != 0; };

  // maximal marked runs -> plateaus (or isolated near-fixed samples)
  std::size_t j = 0;
  while (j <= N) {
    if (!M(j)) {
      ++j;
      continue;
    }
    std::size_t ja = j;
    while (j + 1 <= N && M(j + 1)) ++j;
    std::size_t jb = j;
    ++j;
    if (ja == jb) {
      if (m == Manifold::interval && (ja == 0 || ja == N)) {
        fs.points.push_back(ja == 0 ? 0.0 : 1.0);
        continue;
      }
      auto [x, v] = golden_min(abse, X(ja) - 1.0 / N, X(ja) + 1.0 / N);
      if (v < cfg.tol.id)
        push_point(fs, m, x);
      else if (v < kNearTangency)
        add_warning(fs, "near-tangency: |f(x)-x| dips to " + fmt6(v) + " near x=" +
                            fmt6(m == Manifold::circle ? frac(x) : x));
      continue;
    }
    std::size_t anchor = ja;
    for (std::size_t t = ja; t <= jb; ++t)
      if (std::fabs(E(t)) < std::fabs(E(anchor))) anchor = t;
    if (std::fabs(E(anchor)) > kEdgeTol) {
      push_plateau(fs, m, X(ja), X(jb));
      add_warning(fs, "plateau near x=" + fmt6(frac(X(ja))) +
                          " never settles below the edge threshold; edges are grid-resolution");
      continue;
    }
    double left, right;
    if (ja == 0) {
      left = 0.0;  // interval only: 0 is genuinely fixed
    } else {
      std::size_t in = ja;
      while (in < anchor && std::fabs(E(in)) > kEdgeTol) ++in;
      left = refine_edge(etaf, X(in), X(ja - 1));
    }
    if (jb == N) {
      right = 1.0;
    } else {
      std::size_t in = jb;
      while (in > anchor && std::fabs(E(in)) > kEdgeTol) --in;
      right = refine_edge(etaf, X(in), X(jb + 1));
    }
    push_plateau(fs, m, left, right);
  }

  // transversal roots between unmarked samples
  for (std::size_t t = 0; t < N; ++t) {
    if (!M(t) && !M(t + 1) && E(t) * E(t + 1) < 0.0)
      push_point(fs, m,
                 bisect_sign_change(etaf, X(t), X(t + 1), E(t), cfg.tol.root));
  }
  // tangential roots / near-tangencies at strict local minima of |eta|
  for (std::size_t t = 1; t < N; ++t) {
    if (M(t)) continue;
    double c = std::fabs(E(t));
    if (c > 1e-4) continue;
    if (!(c < std::fabs(E(t - 1)) && c <= std::fabs(E(t + 1)))) continue;
    if (E(t - 1) * E(t + 1) < 0.0) continue;  // transversal: bisected above
    auto [x, v] = golden_min(abse, X(t - 1), X(t + 1));
    if (v < cfg.tol.id)
      push_point(fs, m, x);
    else if (v < kNearTangency)
      add_warning(fs, "near-tangency: |f(x)-x| dips to " + fmt6(v) + " near x=" +
                          fmt6(m == Manifold::circle ? frac(x) : x));
  }
  if (m == Manifold::circle && !M(0)) {
    // minimum at the scanning origin itself
    double c = std::fabs(E(0));
    if (c <= 1e-4 && c < std::fabs(eta[(k0 + N - 1) % N]) && c <= std::fabs(E(1)) &&
        eta[(k0 + N - 1) % N] * E(1) >= 0.0) {
      auto [x, v] = golden_min(abse, X(0) - 1.0 / N, X(0) + 1.0 / N);
      if (v < cfg.tol.id)
        push_point(fs, m, x);
      else if (v < kNearTangency)
        add_warning(fs, "near-tangency: |f(x)-x| dips to " + fmt6(v) + " near x=" +
                            fmt6(frac(x)));
    }
  }
  return fs;
}

void finalize_fixed_set(FixedSet& fs, Manifold m) {
  if (fs.whole) {
    fs.points.clear();
    fs.plateaus.clear();
    return;
  }
  auto& P = fs.plateaus;
  std::sort(P.begin(), P.end(), [](const Ival& a, const Ival& b) { return a.lo < b.lo; });
  std::vector<Ival> merged;
  for (const auto& iv : P) {
    if (!merged.empty() && iv.lo <= merged.back().hi + 1e-12)
      merged.back().hi = std::max(merged.back().hi, iv.hi);  // closed sets: touching merges
    else
      merged.push_back(iv);
  }
  if (m == Manifold::circle) {
    while (merged.size() >= 2 &&
           merged.back().hi >= merged.front().lo + 1.0 - 1e-12) {
      merged.back().hi = std::max(merged.back().hi, merged.front().hi + 1.0);
      merged.erase(merged.begin());
    }
    if (merged.size() == 1 && merged.front().len() >= 1.0 - 1e-12) {
      fs.whole = true;
      fs.points.clear();
      fs.plateaus.clear();
      return;
    }
  } else if (merged.size() == 1 && merged.front().lo <= 1e-12 &&
             merged.front().hi >= 1.0 - 1e-12) {
    fs.whole = true;
    fs.points.clear();
    fs.plateaus.clear();
    return;
  }
  P = std::move(merged);

  auto inside_plateau = [&](double p) {
    for (const auto& iv : P) {
      if (m == Manifold::interval) {
        if (p >= iv.lo - 1e-10 && p <= iv.hi + 1e-10) return true;
      } else {
        double off = frac(p - iv.lo);
        if (off <= iv.len() + 1e-10 || off >= 1.0 - 1e-10) return true;
      }
    }
    return false;
  };
  std::sort(fs.points.begin(), fs.points.end());
  std::vector<double> pts;
  for (double p : fs.points) {
    if (inside_plateau(p)) continue;
    if (!pts.empty() && p - pts.back() < kPointDedupe) continue;
    pts.push_back(p);
  }
  if (m == Manifold::circle && pts.size() >= 2 &&
      point_dist(m, pts.front(), pts.back()) < kPointDedupe)
    pts.pop_back();
  fs.points = std::move(pts);
}

FixedSet fixed_set_impl(const Diffeo& f, const RunConfig& cfg) {
  Peeled pl = peel_wrappers(f);
  FixedSet fs;
  bool done = false;
  if (auto base = power_base(pl.core)) {
    if (f.manifold() == Manifold::interval) {
      // orientation-preserving interval maps have no higher-period points
      fs = fixed_set_impl(*base, cfg);
      done = true;
    } else {
      FixedSet fb = fixed_set_impl(*base, cfg);
      if (!fb.empty()) {
        // grounded circle maps: cutting at a fixed point reduces powers to
        // the interval case, so the power fixes exactly the same set
        fs = std::move(fb);
        done = true;
      }
    }
  }
  if (!done) {
    if (auto a = analytic_fixed_set(pl.core, cfg))
      fs = std::move(*a);
    else
      fs = numeric_fixed_set(pl.core, cfg);
  }
  for (auto it = pl.conj.rbegin(); it != pl.conj.rend(); ++it)
    fs = map_fixed_set(*it, fs);
  finalize_fixed_set(fs, f.manifold());
  return fs;
}

}  // namespace

FixedSet fixed_set(const Diffeo& f, const RunConfig& cfg) { return fixed_set_impl(f, cfg); }

FixedSet map_fixed_set(const Diffeo& g, const FixedSet& fs) {
  FixedSet out;
  out.whole = fs.whole;
  out.warnings = fs.warnings;
  if (fs.whole) return out;
  Manifold m = g.manifold();
  for (double p : fs.points) out.points.push_back(g(p));
  for (const Ival& iv : fs.plateaus) {
    if (m == Manifold::interval) {
      out.plateaus.push_back({g(iv.lo), g(iv.hi)});
    } else {
      double a = g.lift(iv.lo);
      double b = g.lift(iv.hi);  // iv.hi may exceed 1; lifts accept that
      double lo = frac(a);
      out.plateaus.push_back({lo, lo + (b - a)});
    }
  }
  return out;
}

IntervalSet support(const Diffeo& f, const RunConfig& cfg) {
  FixedSet fs = fixed_set(f, cfg);
  const Manifold m = f.manifold();
  if (fs.whole) return IntervalSet::empty(m);
  std::vector<Ival> blocks;
  for (double p : fs.points) blocks.push_back({p, p});
  for (const Ival& iv : fs.plateaus) blocks.push_back(iv);
  if (blocks.empty()) {
    return m == Manifold::circle ? IntervalSet::whole(m)
                                 : IntervalSet::from_intervals(m, {{0.0, 1.0}});
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const Ival& a, const Ival& b) { return a.lo < b.lo; });
  std::vector<Ival> mg;
  for (const auto& b : blocks) {
    if (!mg.empty() && b.lo <= mg.back().hi + 1e-12)
      mg.back().hi = std::max(mg.back().hi, b.hi);
    else
      mg.push_back(b);
  }
  std::vector<Ival> parts;
  if (m == Manifold::interval) {
    double cur = 0.0;
    for (const auto& b : mg) {
      if (b.lo - cur > 1e-12) parts.push_back({cur, b.lo});
      cur = std::max(cur, b.hi);
    }
    if (1.0 - cur > 1e-12) parts.push_back({cur, 1.0});
  } else {
    while (mg.size() >= 2 && mg.back().hi >= mg.front().lo + 1.0 - 1e-12) {
      mg.back().hi = std::max(mg.back().hi, mg.front().hi + 1.0);
      mg.erase(mg.begin());
    }
    if (mg.size() == 1 && mg.front().len() >= 1.0 - 1e-12)
      return IntervalSet::empty(m);  // fixed everywhere up to tolerance
    for (std::size_t i = 0; i < mg.size(); ++i) {
      double gap_end = (i + 1 < mg.size()) ? mg[i + 1].lo : mg.front().lo + 1.0;
      double glen = gap_end - mg[i].hi;
      if (glen > 1e-12) {
        double lo = frac(mg[i].hi);
        parts.push_back({lo, lo + glen});
      }
    }
  }
  return IntervalSet::from_intervals(m, std::move(parts));
}

bool is_grounded(const Diffeo& f, const RunConfig& cfg) {
  if (f.manifold() == Manifold::interval) return true;  // 0 and 1 are fixed
  return !fixed_set(f, cfg).empty();
}

namespace {

// Best rational approximation p/q of x in [0,1) with q <= qcap. Anything
// within 1e-6 of such a p/q has it among its continued-fraction convergents
// (1e-6 < 1/(2*64^2)), so scanning convergents suffices.
std::pair<long, long> best_convergent(double x, long qcap) {
  long h0 = 1, k0 = 0;  // previous convergent
  long h1 = 0, k1 = 1;  // current convergent (a0 = 0 for x in [0,1))
  long bp = 0, bq = 1;
  double best = std::fabs(x);
  double rem = x;
  for (int it = 0; it < 48; ++it) {
    double err = std::fabs(x - static_cast<double>(h1) / static_cast<double>(k1));
    if (err < best) {
      best = err;
      bp = h1;
      bq = k1;
    }
    if (rem < 1e-12) break;
    double inv = 1.0 / rem;
    double af = std::floor(inv);
    if (af > 1e9) break;
    rem = inv - af;
    long a = static_cast<long>(af);
    long h2 = a * h1 + h0, k2 = a * k1 + k0;
    h0 = h1;
    k0 = k1;
    h1 = h2;
    k1 = k2;
    if (k1 > qcap) break;
  }
  return {bp, bq};
}

}  // namespace

RotationNumber rotation_number(const Diffeo& f, const RunConfig& cfg) {
  if (f.manifold() != Manifold::circle)
    throw DomainError("rotation number is defined for circle maps only");
  RotationNumber out;
  {
    FixedSet fs = fixed_set(f, cfg);
    if (!fs.empty()) {
      out.value = 0.0;
      out.rational = true;
      out.p = 0;
      out.q = 1;
      out.converged = true;
      return out;  // grounded: the orbit average is exactly zero
    }
  }
  double y = 0.0, D = 0.0;
  long n = 0;
  long next = 1L << cfg.rot_start_pow;
  std::optional<double> prev;
  bool converged = false;
  std::optional<std::pair<long, long>> exact;  // (p, q) from an exactly periodic orbit
  while (n < cfg.rot_max_iter) {
    double d = f.lift(y) - y;
    D += d;
    y = frac(y + d);
    ++n;
    if (std::min(y, 1.0 - y) < 1e-13) {
      double P = std::round(D);
      if (std::fabs(D - P) < 1e-9) {
        long p = std::lround(P), q = n;
        long g = std::gcd(std::labs(p) == 0 ? q : std::labs(p), q);
        exact = {p / g, q / g};
        converged = true;
        break;
      }
    }
    if (n == next) {
      double est = D / static_cast<double>(n);
      if (prev && std::fabs(est - *prev) < cfg.tol.rot) {
        converged = true;
        break;
      }
      prev = est;
      next <<= 1;
    }
  }
  out.iterations = n;
  out.converged = converged;
  out.value = frac(D / static_cast<double>(n));
  if (!converged)
    out.warnings.push_back("rotation estimate did not converge within the iteration cap");
  long cp, cq;
  if (exact) {
    cp = exact->first;
    cq = exact->second;
    if (cq > cfg.rational_q_cap) {
      out.warnings.push_back("orbit is periodic with denominator above the rational cap");
      return out;
    }
  } else {
    auto [p, q] = best_convergent(out.value, cfg.rational_q_cap);
    cp = p;
    cq = q;
    if (std::fabs(out.value - static_cast<double>(cp) / static_cast<double>(cq)) >= 1e-6)
      return out;
  }
  if (cq < 1) return out;
  FixedSet fsq = fixed_set(f.pow(static_cast<int>(cq)), cfg);
  if (!fsq.empty()) {
    out.rational = true;
    out.q = cq;
    out.p = ((cp % cq) + cq) % cq;
    out.value = frac(static_cast<double>(cp) / static_cast<double>(cq));
  }
  return out;
}

std::vector<PeriodicEntry> periodic_points(const Diffeo& f, int cap, const RunConfig& cfg) {
  std::vector<PeriodicEntry> out;
  FixedSet fs1 = fixed_set(f, cfg);
  if (!fs1.empty()) {
    PeriodicEntry e;
    e.period = 1;
    e.whole = fs1.whole;
    e.points = fs1.points;
    e.plateaus = fs1.plateaus;
    out.push_back(std::move(e));
  }
  if (f.manifold() == Manifold::interval) return out;
  if (!fs1.empty()) return out;  // grounded circle maps have no higher periods

  auto covered = [&](double p) {
    for (const auto& e : out) {
      for (double q : e.points)
        if (point_dist(Manifold::circle, p, q) < 1e-7) return true;
      for (const auto& iv : e.plateaus) {
        double off = frac(p - iv.lo);
        if (off <= iv.len() + 1e-7 || off >= 1.0 - 1e-7) return true;
      }
    }
    return false;
  };

  long base_q = 0;  // once f^q is grounded, only multiples of q can be
  for (int p = 2; p <= cap; ++p) {
    if (base_q != 0 && p % base_q != 0) continue;
    FixedSet fsp = fixed_set(f.pow(p), cfg);
    if (fsp.empty()) continue;
    if (base_q == 0) base_q = p;
    if (fsp.whole) {
      PeriodicEntry e;
      e.period = p;
      e.whole = true;
      out.push_back(std::move(e));
      break;  // the whole circle is periodic; higher powers add nothing
    }
    PeriodicEntry e;
    e.period = p;
    for (double pt : fsp.points)
      if (!covered(pt)) e.points.push_back(pt);
    for (const auto& iv : fsp.plateaus)
      if (!covered(frac(iv.lo + 0.5 * iv.len())) || !covered(frac(iv.lo)) ||
          !covered(frac(iv.hi)))
        e.plateaus.push_back(iv);
    if (!e.points.empty() || !e.plateaus.empty()) out.push_back(std::move(e));
  }
  return out;
}

VariationEstimate derivative_variation(const Diffeo& f, const RunConfig& cfg) {
  auto tv = [&](int pow2) {
    const std::size_t N = std::size_t{1} << pow2;
    std::vector<double> dv(N + 1);
    parallel_chunks(N + 1, [&](std::size_t i0, std::size_t i1) {
      for (std::size_t i = i0; i < i1; ++i)
        dv[i] = f.derivative(static_cast<double>(i) / static_cast<double>(N));
    });
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += std::fabs(dv[i + 1] - dv[i]);
    return s;
  };
  VariationEstimate est;
  double prev = tv(cfg.var_start_pow);
  est.value = prev;
  est.levels = cfg.var_start_pow;
  for (int pw = cfg.var_start_pow + 1; pw <= cfg.var_max_pow; ++pw) {
    double cur = tv(pw);
    est.value = cur;
    est.levels = pw;
    if (cur - prev < cfg.tol.var) {  // partition sums only grow under refinement
      est.converged = true;
      break;
    }
    prev = cur;
  }
  return est;
}

Displacement sup_displacement(const Diffeo& f, const RunConfig& cfg) {
  const Manifold m = f.manifold();
  const std::size_t N = std::size_t{1} << cfg.grid_pow;
  const std::size_t count = (m == Manifold::circle) ? N : N + 1;
  std::vector<double> d(count);
  parallel_chunks(count, [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      double x = static_cast<double>(i) / static_cast<double>(N);
      double disp = f.lift(x) - x;
      d[i] = (m == Manifold::circle) ? dist_to_int(disp) : std::fabs(disp);
    }
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i)
    if (d[i] > d[best]) best = i;
  auto fn = [&](double x) {
    if (m == Manifold::circle) return -dist_to_int(f.lift(x) - x);
    double cx = std::clamp(x, 0.0, 1.0);
    return -std::fabs(f.lift(cx) - cx);
  };
  double xb = static_cast<double>(best) / static_cast<double>(N);
  auto [x, neg] = golden_min(fn, xb - 1.0 / N, xb + 1.0 / N);
  Displacement out;
  out.value = std::max(-neg, d[best]);
  out.argmax = (-neg >= d[best]) ? (m == Manifold::circle ? frac(x) : std::clamp(x, 0.0, 1.0))
                                 : (m == Manifold::circle ? frac(xb) : xb);
  out.nonzero = out.value > cfg.tol.nz  ? Tri::yes
                : out.value < cfg.tol.id ? Tri::no
                                         : Tri::indeterminate;
  return out;
}

Ival image_interval(const Diffeo& f, const Ival& iv) {
  if (f.manifold() == Manifold::interval) {
    return {std::clamp(f.lift(iv.lo), 0.0, 1.0), std::clamp(f.lift(iv.hi), 0.0, 1.0)};
  }
  double a = f.lift(iv.lo);
  double b = f.lift(iv.hi);  // hi <= lo+1, and lifts commute with +1, so b-a <= 1
  double lo = frac(a);
  return {lo, lo + (b - a)};
}

}  // namespace onedim
