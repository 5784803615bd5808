#include "onedim/obstruction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "onedim/errors.hpp"
#include "onedim/manifold.hpp"

namespace onedim {

namespace {

using nlohmann::json;

json ival_json(const Ival& iv) { return json::array({iv.lo, iv.hi}); }

std::string ival_str(const Ival& iv) {
  std::ostringstream os;
  os << "(" << iv.lo << ", " << iv.hi << ")";
  return os.str();
}

std::vector<Ival> parts_of(const IntervalSet& s) {
  if (s.is_whole()) return {Ival{0.0, 1.0}};
  return s.parts();
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Point of the manifold at signed offset `off` from iv.lo.
double at_offset(Manifold m, const Ival& iv, double off) {
  double x = iv.lo + off;
  return m == Manifold::circle ? frac(x) : clamp01(x);
}

// Coarse scan plus golden-section refinement around the best sample. Returns
// the maximum found; *arg receives its location. fn need not be unimodal --
// the scan grid keeps the refinement honest.
double scan_max(double lo, double hi, int n,
                const std::function<double(double)>& fn, double* arg) {
  if (!(hi > lo)) {
    if (arg) *arg = lo;
    return fn(lo);
  }
  double best = -std::numeric_limits<double>::infinity(), best_x = lo;
  for (int i = 0; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n;
    double v = fn(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  double step = (hi - lo) / n;
  double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
  const double r = 0.38196601125010515;  // 2 - golden ratio
  double x1 = a + r * (b - a), x2 = b - r * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 60 && b - a > 1e-13; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = a + r * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = b - r * (b - a);
      f2 = fn(x2);
    }
    if (f1 > best) {
      best = f1;
      best_x = x1;
    }
    if (f2 > best) {
      best = f2;
      best_x = x2;
    }
  }
  if (arg) *arg = best_x;
  return best;
}

// Components of the manifold minus the closure of the set, dropping slivers
// thinner than min_len. Circle gaps are returned lo-normalized.
std::vector<Ival> set_gaps(Manifold m, const IntervalSet& s, double min_len) {
  if (s.is_whole()) return {};
  if (s.is_empty()) return {Ival{0.0, 1.0}};
  const auto& ps = s.parts();
  std::vector<Ival> gaps;
  if (m == Manifold::interval) {
    double cur = 0.0;
    for (const auto& p : ps) {
      if (p.lo - cur > min_len) gaps.push_back({cur, p.lo});
      cur = std::max(cur, p.hi);
    }
    if (1.0 - cur > min_len) gaps.push_back({cur, 1.0});
  } else {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      double end = ps[i].hi;
      double next = i + 1 < ps.size() ? ps[i + 1].lo : ps[0].lo + 1.0;
      double len = next - end;
      if (len > min_len) {
        double lo = frac(end);
        gaps.push_back({lo, lo + len});
      }
    }
    std::sort(gaps.begin(), gaps.end(),
              [](const Ival& x, const Ival& y) { return x.lo < y.lo; });
  }
  return gaps;
}

// Intersection of two open intervals as explicit segments (up to two on the
// circle).
std::vector<Ival> ival_intersection(Manifold m, const Ival& a, const Ival& b) {
  std::vector<Ival> out;
  if (m == Manifold::interval) {
    double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
    if (hi - lo > 1e-15) out.push_back({lo, hi});
    return out;
  }
  double base = frac(b.lo - a.lo);
  for (double shift : {base, base - 1.0}) {
    double lo = std::max(0.0, shift), hi = std::min(a.len(), shift + b.len());
    if (hi - lo > 1e-15) {
      double abs_lo = frac(a.lo + lo);
      out.push_back({abs_lo, abs_lo + (hi - lo)});
    }
  }
  return out;
}

void validate_p4_labels(const ActionAssignment& act) {
  const SimplicialGraph& g = act.presentation.graph;
  std::vector<std::string> vs = g.vertices();
  std::sort(vs.begin(), vs.end());
  if (vs != std::vector<std::string>{"a", "b", "c", "d"})
    throw DomainError("generators must be labeled a, b, c, d");
  bool path = g.adjacent("b", "d") && g.adjacent("d", "a") && g.adjacent("a", "c") &&
              !g.adjacent("a", "b") && !g.adjacent("b", "c") && !g.adjacent("c", "d");
  if (!path) throw DomainError("presentation must be the path b - d - a - c");
  for (const auto& v : vs)
    if (!act.assignment.count(v))
      throw DomainError("assignment is missing generator '" + v + "'");
}

void require_grounded(const ActionAssignment& act, const RunConfig& cfg,
                      const char* op) {
  for (const auto& [name, f] : act.assignment)
    if (!is_grounded(f, cfg))
      throw PreconditionError(std::string(op) + " requires grounded generators; '" +
                              name + "' has no fixed point");
}

// Supports of the four generators of a path action, ready for chain hunting.
struct P4Supports {
  Manifold m = Manifold::interval;
  Diffeo a, b, c, d;
  std::vector<Ival> Sa, Sb, Sc, Sd;
};

P4Supports p4_supports(const ActionAssignment& act, const RunConfig& cfg) {
  P4Supports s{act.manifold,
               act.assignment.at("a"), act.assignment.at("b"),
               act.assignment.at("c"), act.assignment.at("d"),
               {}, {}, {}, {}};
  s.Sa = parts_of(support(s.a, cfg));
  s.Sb = parts_of(support(s.b, cfg));
  s.Sc = parts_of(support(s.c, cfg));
  s.Sd = parts_of(support(s.d, cfg));
  return s;
}

int find_part(Manifold m, const std::vector<Ival>& parts, double x, double slack) {
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (ival_contains(m, parts[i], x, slack)) return static_cast<int>(i);
  return -1;
}

bool chain_pattern(Manifold m, const std::array<Ival, 4>& iv, double tol) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      bool want = (j == i + 1);
      if (ivals_intersect(m, iv[i], iv[j], tol) != want) return false;
    }
  return true;
}

struct ChainHit {
  ChainWitness w;
  std::array<int, 4> key{};  // component indices (a, b, c, d)
};

// Follows x through b then c and checks the four touched components form a
// chain. require_id restricts the landing d-component.
bool chain_at(const P4Supports& sp, int ia, double x, const RunConfig& cfg,
              const Ival* require_id, ChainHit* out) {
  const Manifold m = sp.m;
  const double tg = cfg.tol.geom;
  const Ival& Ia = sp.Sa[ia];
  double bx = sp.b(x);
  if (point_dist(m, bx, x) <= cfg.tol.id) return false;
  double cbx = sp.c(bx);
  if (point_dist(m, cbx, bx) <= cfg.tol.id) return false;
  int ib = find_part(m, sp.Sb, x, tg);
  if (ib < 0 || !ival_contains(m, sp.Sb[ib], bx, tg)) return false;
  int ic = find_part(m, sp.Sc, bx, tg);
  if (ic < 0 || !ival_contains(m, sp.Sc[ic], cbx, tg)) return false;
  int id = find_part(m, sp.Sd, cbx, tg);
  if (id < 0) return false;
  const Ival& Id = sp.Sd[id];
  if (ivals_equal(m, Ia, Id, tg)) return false;
  if (require_id && !ivals_equal(m, Id, *require_id, tg)) return false;
  std::array<Ival, 4> ch{Ia, sp.Sb[ib], sp.Sc[ic], Id};
  if (!chain_pattern(m, ch, tg)) return false;
  out->w.intervals = ch;
  out->w.x = x;
  out->w.bx = bx;
  out->w.cbx = cbx;
  out->key = {ia, ib, ic, id};
  return true;
}

// Length of the arc from x to cbx passing through bx (the probe interval the
// chain will hand to the derivative estimate).
double probe_len(Manifold m, double x, double bx, double cbx) {
  if (m == Manifold::interval) return std::fabs(cbx - x);
  double fwd = frac(cbx - x);
  bool through = frac(bx - x) < fwd;
  return through ? fwd : 1.0 - fwd;
}

// One derivative probe; shared by the public entry points so family reports
// can label rejections by their own indices.
bool probe_two_jumps(const Diffeo& f, const Diffeo& g, const FixedSet& Ff,
                     const FixedSet& Fg, const TwoJumpsConfig& c, int report_index,
                     const char* label, const RunConfig& cfg,
                     std::vector<TwoJumpsWitness>* ws,
                     std::vector<std::string>* rej) {
  const Manifold m = f.manifold();
  const Tolerances& tol = cfg.tol;
  auto reject = [&](const std::string& why) {
    rej->push_back(std::string(label) + " " + std::to_string(report_index) + ": " + why);
    return false;
  };
  const Ival& I = c.I;
  const double len = I.len();
  if (len <= tol.geom) return reject("interval has negligible length");
  double oy = offset_in(m, I, c.y);
  if (!(oy > tol.geom && oy < len - tol.geom))
    return reject("y is not interior to the interval");
  if (point_dist(m, f(c.y), c.y) <= tol.id) return reject("f fixes y");
  if (point_dist(m, g(c.y), c.y) <= tol.id) return reject("g fixes y");
  double ofy = offset_in(m, I, f(c.y));
  double ogy = offset_in(m, I, g(c.y));
  const double eps_end = std::max(1e-9, tol.geom);
  bool standard = std::fabs(ofy) <= eps_end && std::fabs(ogy - len) <= eps_end;
  bool mirrored = std::fabs(ogy) <= eps_end && std::fabs(ofy - len) <= eps_end;
  if (!standard && !mirrored)
    return reject("interval is not bounded by f(y) and g(y)");

  // Signed window coordinate: the f(y) end sits at 0, the g(y) end at len.
  auto xi = [&](double off) { return mirrored ? len - off : off; };
  const double ym = xi(oy);

  auto fixed_candidates = [&](const FixedSet& fs) {
    std::vector<double> pts = fs.points;
    for (const auto& pl : fs.plateaus) {
      pts.push_back(pl.lo);
      pts.push_back(pl.hi);
    }
    return pts;
  };

  // Nearest fixed point of g strictly below y (inside A = [f(y), y]).
  double s_xi = 0.0;
  bool have_s = false;
  for (double p : fixed_candidates(Fg)) {
    double op = offset_in(m, I, p);
    if (op < -eps_end || op > len + eps_end) continue;
    double xp = xi(op);
    if (xp >= ym - 1e-13 || xp < -eps_end) continue;
    if (!have_s || xp > s_xi) {
      s_xi = xp;
      have_s = true;
    }
  }
  if (!have_s) return reject("no fixed point of g between f(y) and y");
  // Nearest fixed point of f strictly above y (inside B = [y, g(y)]).
  double t_xi = 0.0;
  bool have_t = false;
  for (double p : fixed_candidates(Ff)) {
    double op = offset_in(m, I, p);
    if (op < -eps_end || op > len + eps_end) continue;
    double xp = xi(op);
    if (xp <= ym + 1e-13 || xp > len + eps_end) continue;
    if (!have_t || xp < t_xi) {
      t_xi = xp;
      have_t = true;
    }
  }
  if (!have_t) return reject("no fixed point of f between y and g(y)");
  s_xi = std::max(0.0, s_xi);
  t_xi = std::min(len, t_xi);

  auto abs_pt = [&](double xp) { return at_offset(m, I, mirrored ? len - xp : xp); };

  TwoJumpsWitness w;
  w.index = report_index;
  w.y = c.y;
  w.I = I;
  w.mirrored = mirrored;
  double y_abs = at_offset(m, I, oy);
  if (!mirrored) {
    w.A = Ival{I.lo, I.lo + oy};
    w.B = Ival{y_abs, y_abs + (len - oy)};
  } else {
    w.B = Ival{I.lo, I.lo + oy};
    w.A = Ival{y_abs, y_abs + (len - oy)};
  }
  w.s = abs_pt(s_xi);
  w.t = abs_pt(t_xi);
  w.quotient_g = (len - s_xi) / (ym - s_xi);
  w.quotient_f = t_xi / (t_xi - ym);
  w.product = w.quotient_f * w.quotient_g;
  const double a_len = ym, b_len = len - ym;
  w.bound = (1.0 + b_len / a_len) * (1.0 + a_len / b_len);
  double u_arg = s_xi, v_arg = t_xi;
  w.deriv_g_u = scan_max(
      s_xi, ym, 96, [&](double xp) { return g.derivative(abs_pt(xp)); }, &u_arg);
  w.deriv_f_v = scan_max(
      ym, t_xi, 96, [&](double xp) { return f.derivative(abs_pt(xp)); }, &v_arg);
  w.u = abs_pt(u_arg);
  w.v = abs_pt(v_arg);
  w.accepted = w.product >= w.bound - 1e-6 &&
               w.deriv_g_u >= w.quotient_g - 1e-6 &&
               w.deriv_f_v >= w.quotient_f - 1e-6;
  ws->push_back(w);
  return true;
}

json witness_json(const TwoJumpsWitness& w) {
  return json{{"index", w.index},
              {"y", w.y},
              {"I", ival_json(w.I)},
              {"A", ival_json(w.A)},
              {"B", ival_json(w.B)},
              {"s", w.s},
              {"t", w.t},
              {"u", w.u},
              {"v", w.v},
              {"quotient_g", w.quotient_g},
              {"quotient_f", w.quotient_f},
              {"product", w.product},
              {"bound", w.bound},
              {"deriv_g_u", w.deriv_g_u},
              {"deriv_f_v", w.deriv_f_v},
              {"mirrored", w.mirrored},
              {"accepted", w.accepted}};
}

}  // namespace

CommutatorRegion commutator_region(const Diffeo& f, const Diffeo& g,
                                   const RunConfig& cfg) {
  if (f.manifold() != g.manifold())
    throw DomainError("maps live on different manifolds");
  const Manifold m = f.manifold();
  const Tolerances& tol = cfg.tol;
  CommutatorRegion out{IntervalSet::empty(m), {}, true, {}};
  std::vector<Ival> Sf = parts_of(support(f, cfg));
  std::vector<Ival> Sg = parts_of(support(g, cfg));
  Diffeo comm = commutator(f, g);

  std::vector<Ival> included;
  auto push = [&](const Ival& part, const char* reason) {
    for (const auto& c : out.components)
      if (c.reason == reason && ivals_equal(m, c.part, part, 1e-12)) return;
    out.components.push_back(RegionComponent{part, reason});
    included.push_back(part);
  };

  for (const auto& If : Sf) {
    for (const auto& Ig : Sg) {
      if (ivals_equal(m, If, Ig, tol.geom)) {
        // Shared component: does the restricted pair visibly fail to commute?
        const int n = 1 << 10;
        double disp = 0.0, arg_off = 0.0;
        for (int i = 0; i < n; ++i) {
          double off = If.len() * (i + 0.5) / n;
          double x = at_offset(m, If, off);
          double d = point_dist(m, comm(x), x);
          if (d > disp) {
            disp = d;
            arg_off = off;
          }
        }
        double step = If.len() / n;
        disp = std::max(disp, scan_max(std::max(0.0, arg_off - step),
                                       std::min(If.len(), arg_off + step), 32,
                                       [&](double off) {
                                         double x = at_offset(m, If, off);
                                         return point_dist(m, comm(x), x);
                                       },
                                       nullptr));
        if (disp > tol.nz) {
          push(If, "shared-nonabelian");
        } else if (disp >= tol.id) {
          push(If, "indeterminate-shared");
          out.notes.push_back("restricted commutator displacement " +
                              std::to_string(disp) + " on shared component " +
                              ival_str(If) +
                              " is in the indeterminate band; included conservatively");
        }
      } else if (ivals_intersect(m, If, Ig, tol.geom)) {
        push(If, "overlap-unequal");
        push(Ig, "overlap-unequal");
      }
    }
  }
  out.region = IntervalSet::from_intervals(m, included);

  // The commutator's own support must land inside the region.
  const int n = 1 << 13;
  for (int i = 0; i < n; ++i) {
    double x = (i + 0.5) / n;
    double d = point_dist(m, comm(x), x);
    if (d > tol.nz && !out.region.contains(x, tol.geom)) {
      out.post_check_ok = false;
      std::ostringstream os;
      os << "commutator moves x=" << x << " by " << d << " outside the region";
      out.notes.push_back(os.str());
      break;
    }
  }
  return out;
}

nlohmann::json commutator_region_to_json(const CommutatorRegion& r) {
  json parts = json::array();
  for (const auto& p : r.region.parts()) parts.push_back(ival_json(p));
  json comps = json::array();
  for (const auto& c : r.components)
    comps.push_back(json{{"part", ival_json(c.part)}, {"reason", c.reason}});
  return json{{"region", parts},
              {"whole", r.region.is_whole()},
              {"components", comps},
              {"post_check_ok", r.post_check_ok},
              {"notes", r.notes}};
}

DisjointnessReport disjointness_check(const Diffeo& f, const Diffeo& g,
                                      const RunConfig& cfg) {
  if (f.manifold() != g.manifold())
    throw DomainError("maps live on different manifolds");
  const Manifold m = f.manifold();
  if (!is_grounded(f, cfg) || !is_grounded(g, cfg))
    throw PreconditionError(
        "disjointness requires grounded maps (nonempty fixed sets)");
  Displacement cd = sup_displacement(commutator(f, g), cfg);
  if (cd.nonzero != Tri::no) {
    std::ostringstream os;
    os << "disjointness requires commuting maps; commutator displacement "
       << cd.value
       << (cd.nonzero == Tri::yes ? " is visibly nonzero"
                                  : " is in the indeterminate band");
    throw PreconditionError(os.str());
  }
  DisjointnessReport r;
  for (const auto& If : parts_of(support(f, cfg))) {
    for (const auto& Ig : parts_of(support(g, cfg))) {
      if (ivals_equal(m, If, Ig, cfg.tol.geom)) continue;
      if (ivals_disjoint(m, If, Ig, cfg.tol.geom)) continue;
      r.pass = false;
      r.f_part = If;
      r.g_part = Ig;
      r.detail = "components " + ival_str(If) + " and " + ival_str(Ig) +
                 " overlap without agreeing";
      return r;
    }
  }
  r.detail = "every component pair is equal or disjoint";
  return r;
}

std::vector<ChainWitness> detect_chains(const ActionAssignment& act,
                                        const RunConfig& cfg) {
  validate_p4_labels(act);
  require_grounded(act, cfg, "chain detection");
  P4Supports sp = p4_supports(act, cfg);
  std::set<std::array<int, 4>> seen;
  std::vector<ChainWitness> out;
  const int per = std::max<int>(
      16, std::min<int>(1024, (1 << cfg.grid_pow) /
                                  static_cast<int>(std::max<std::size_t>(
                                      1, sp.Sa.size()))));
  for (std::size_t ia = 0; ia < sp.Sa.size(); ++ia) {
    const Ival& Ia = sp.Sa[ia];
    for (int k = 0; k < per; ++k) {
      double x = at_offset(sp.m, Ia, Ia.len() * (k + 0.5) / per);
      ChainHit hit;
      if (!chain_at(sp, static_cast<int>(ia), x, cfg, nullptr, &hit)) continue;
      if (!seen.insert(hit.key).second) continue;
      out.push_back(hit.w);
    }
  }
  return out;
}

nlohmann::json chain_to_json(const ChainWitness& w) {
  json iv = json::array();
  for (const auto& i : w.intervals) iv.push_back(ival_json(i));
  return json{{"intervals", iv},
              {"roles", w.roles},
              {"x", w.x},
              {"bx", w.bx},
              {"cbx", w.cbx}};
}

EnvelopeReport compute_envelopes(const ActionAssignment& act, const RunConfig& cfg) {
  validate_p4_labels(act);
  require_grounded(act, cfg, "envelope computation");
  const Manifold m = act.manifold;
  const Tolerances& tol = cfg.tol;
  EnvelopeReport rep;

  const Diffeo& A = act.assignment.at("a");
  const Diffeo& B = act.assignment.at("b");
  const Diffeo& C = act.assignment.at("c");
  const Diffeo& D = act.assignment.at("d");
  CommutatorRegion J = commutator_region(C, D, cfg);
  for (const auto& note : J.notes)
    rep.findings.push_back("commutator region of (c,d): " + note);

  std::vector<Ival> gaps = set_gaps(m, J.region, tol.geom);
  if (gaps.empty()) {
    rep.findings.push_back(
        "the commutator region of (c,d) leaves no gap; no envelopes exist");
    return rep;
  }

  std::vector<Ival> Sa = parts_of(support(A, cfg));
  std::vector<Ival> Sd = parts_of(support(D, cfg));
  Diffeo cb = Diffeo::compose({C, B});

  // Sort a-components into gaps; a component inside no gap is an
  // inconsistency (it would have to meet the commutator region).
  std::vector<std::vector<int>> gap_as(gaps.size());
  for (std::size_t i = 0; i < Sa.size(); ++i) {
    bool placed = false;
    for (std::size_t gi = 0; gi < gaps.size(); ++gi)
      if (ival_contains_ival(m, gaps[gi], Sa[i], tol.geom)) {
        gap_as[gi].push_back(static_cast<int>(i));
        placed = true;
        break;
      }
    if (!placed)
      rep.findings.push_back("support component " + ival_str(Sa[i]) +
                             " of 'a' is not contained in any gap of the "
                             "commutator region of (c,d)");
  }

  for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
    const Ival& Y = gaps[gi];
    std::vector<Ival> pushed;  // cb(I_a) for components inside Y
    for (int ai : gap_as[gi]) pushed.push_back(image_interval(cb, Sa[ai]));

    // Minimal interval containing Y and every pushed image.
    Ival Z = Y;
    if (!pushed.empty()) {
      if (m == Manifold::interval) {
        double lo = Y.lo, hi = Y.hi;
        for (const auto& p : pushed) {
          lo = std::min(lo, p.lo);
          hi = std::max(hi, p.hi);
        }
        Z = Ival{lo, hi};
      } else {
        std::vector<Ival> arcs = pushed;
        arcs.push_back(Y);
        IntervalSet merged = IntervalSet::from_intervals(m, arcs);
        std::vector<Ival> holes = set_gaps(m, merged, 1e-12);
        if (holes.empty()) {
          rep.findings.push_back("hull of gap " + ival_str(Y) +
                                 " and its pushed images covers the whole "
                                 "circle; envelope kept at the gap itself");
        } else {
          const Ival* widest = &holes[0];
          for (const auto& h : holes)
            if (h.len() > widest->len()) widest = &h;
          double lo = frac(widest->hi);
          Z = Ival{lo, lo + (1.0 - widest->len())};
        }
      }
    }

    // The envelope may not cross the neighboring gaps.
    if (gaps.size() > 1) {
      const Ival& prev = gaps[(gi + gaps.size() - 1) % gaps.size()];
      const Ival& next = gaps[(gi + 1) % gaps.size()];
      double wlo = 0.0, wlen = 1.0;
      if (m == Manifold::interval) {
        wlo = gi == 0 ? 0.0 : prev.hi;
        double whi = gi + 1 == gaps.size() ? 1.0 : next.lo;
        wlen = whi - wlo;
      } else {
        wlo = frac(prev.hi);
        wlen = frac(next.lo - prev.hi);
        if (wlen <= 0.0) wlen = 1.0;
      }
      Ival W{wlo, wlo + wlen};
      if (!ival_contains_ival(m, W, Z, tol.geom)) {
        rep.findings.push_back("envelope of gap " + ival_str(Y) +
                               " spills past a neighboring gap; clipped");
        double zl = std::max(0.0, offset_in(m, W, Z.lo));
        double zh = std::min(wlen, offset_in(m, W, Z.lo) + Z.len());
        double lo_abs = at_offset(m, W, zl);
        Z = Ival{lo_abs, lo_abs + std::max(0.0, zh - zl)};
      }
    }

    // Does some pushed image meet a d-component outside Y?
    bool in0 = false;
    for (const auto& p : pushed) {
      for (const auto& Id : Sd) {
        for (const auto& seg : ival_intersection(m, p, Id)) {
          double outside = seg.len() - overlap_len(m, seg, Y);
          if (outside > tol.geom) in0 = true;
        }
      }
    }
    rep.envelopes.push_back(Envelope{Y, Z, in0});
  }

  for (std::size_t i = 0; i < rep.envelopes.size(); ++i)
    for (std::size_t j = i + 1; j < rep.envelopes.size(); ++j)
      if (!ivals_disjoint(m, rep.envelopes[i].Z, rep.envelopes[j].Z, tol.geom))
        rep.findings.push_back("envelopes " + ival_str(rep.envelopes[i].Z) +
                               " and " + ival_str(rep.envelopes[j].Z) +
                               " overlap; the input is not a genuine candidate");
  return rep;
}

nlohmann::json envelopes_to_json(const EnvelopeReport& r) {
  json es = json::array();
  for (const auto& e : r.envelopes)
    es.push_back(json{{"Y", ival_json(e.Y)},
                      {"Z", ival_json(e.Z)},
                      {"in_region0", e.in_region0}});
  return json{{"envelopes", es}, {"findings", r.findings}};
}

PropositionReport find_proposition_intervals(const ActionAssignment& act, int count,
                                             const RunConfig& cfg) {
  if (count < 1) throw DomainError("count must be positive");
  validate_p4_labels(act);
  require_grounded(act, cfg, "interval-pair search");
  P4Supports sp = p4_supports(act, cfg);
  const Manifold m = sp.m;
  const double tg = cfg.tol.geom;
  Diffeo cb = Diffeo::compose({sp.c, sp.b});
  PropositionReport rep;
  bool budget_hit = false;
  for (std::size_t ia = 0; ia < sp.Sa.size() && !budget_hit; ++ia) {
    const Ival& Ia = sp.Sa[ia];
    Ival cbIa = image_interval(cb, Ia);
    for (const auto& Id : sp.Sd) {
      if (static_cast<int>(rep.pairs.size()) >= count) {
        budget_hit = true;
        rep.notes.push_back("budget reached; component scan stopped early");
        break;
      }
      if (ivals_equal(m, Ia, Id, tg)) continue;
      if (!ivals_intersect(m, cbIa, Id, tg)) continue;
      if (ivals_intersect(m, Ia, Id, tg)) {
        rep.notes.push_back("components " + ival_str(Ia) + " of 'a' and " +
                            ival_str(Id) +
                            " of 'd' overlap without agreeing; pair skipped");
        continue;
      }
      PropositionPair pr{Ia, Id, cbIa, false};
      const int samples = 256;
      for (int k = 0; k < samples && !pr.chain_found; ++k) {
        double x = at_offset(m, Ia, Ia.len() * (k + 0.5) / samples);
        ChainHit hit;
        pr.chain_found = chain_at(sp, static_cast<int>(ia), x, cfg, &Id, &hit);
      }
      rep.pairs.push_back(pr);
    }
  }
  rep.exhausted = static_cast<int>(rep.pairs.size()) < count;
  return rep;
}

nlohmann::json proposition_to_json(const PropositionReport& r) {
  json ps = json::array();
  for (const auto& p : r.pairs)
    ps.push_back(json{{"Ia", ival_json(p.Ia)},
                      {"Id", ival_json(p.Id)},
                      {"cb_Ia", ival_json(p.cb_Ia)},
                      {"chain_found", p.chain_found}});
  return json{{"pairs", ps}, {"exhausted", r.exhausted}, {"notes", r.notes}};
}

TwoJumpsReport two_jumps(const Diffeo& f, const Diffeo& g,
                         const std::vector<TwoJumpsConfig>& configs,
                         const RunConfig& cfg) {
  if (f.manifold() != g.manifold())
    throw DomainError("maps live on different manifolds");
  FixedSet Ff = fixed_set(f, cfg), Fg = fixed_set(g, cfg);
  TwoJumpsReport rep;
  for (std::size_t i = 0; i < configs.size(); ++i)
    probe_two_jumps(f, g, Ff, Fg, configs[i], static_cast<int>(i), "config", cfg,
                    &rep.witnesses, &rep.rejections);
  return rep;
}

nlohmann::json two_jumps_to_json(const TwoJumpsReport& r) {
  json ws = json::array();
  for (const auto& w : r.witnesses) ws.push_back(witness_json(w));
  return json{{"witnesses", ws}, {"rejections", r.rejections}};
}

FgReport fg_obstruction(const Diffeo& f, const Diffeo& g,
                        const std::vector<Ival>& If_list,
                        const std::vector<Ival>& Ig_list,
                        const std::vector<double>& x_list, const RunConfig& cfg) {
  if (f.manifold() != g.manifold())
    throw DomainError("maps live on different manifolds");
  if (If_list.size() != Ig_list.size() || If_list.size() != x_list.size())
    throw DomainError("family lists must have equal length");
  const Manifold m = f.manifold();
  const Tolerances& tol = cfg.tol;
  FgReport rep;
  Diffeo finv = Diffeo::inverse(f);
  FixedSet Ffinv = fixed_set(finv, cfg), Fg = fixed_set(g, cfg);

  for (std::size_t j = 0; j < x_list.size(); ++j) {
    const Ival& If = If_list[j];
    const Ival& Ig = Ig_list[j];
    double x = x_list[j];
    auto reject = [&](const std::string& why) {
      rep.rejections.push_back("index " + std::to_string(j) + ": " + why);
    };
    if (!ivals_equal(m, image_interval(f, If), If, 8 * tol.geom)) {
      reject("f does not preserve its interval");
      continue;
    }
    if (!ivals_equal(m, image_interval(g, Ig), Ig, 8 * tol.geom)) {
      reject("g does not preserve its interval");
      continue;
    }
    if (!ival_contains(m, If, x, tol.geom)) {
      reject("x is not in the f-interval");
      continue;
    }
    if (ival_contains(m, Ig, x, -tol.geom)) {
      reject("x already lies in the g-interval");
      continue;
    }
    double y = f(x);
    if (!ival_contains(m, Ig, y, tol.geom)) {
      reject("f(x) is not in the g-interval");
      continue;
    }
    double gy = g(y);
    if (ival_contains(m, If, gy, -tol.geom)) {
      reject("g(f(x)) lands back in the f-interval");
      continue;
    }
    // Probe interval: from x to g(f(x)), through y.
    Ival I;
    if (m == Manifold::interval) {
      I = Ival{std::min(x, gy), std::max(x, gy)};
    } else {
      Ival fwd{frac(x), frac(x) + frac(gy - x)};
      Ival bwd{frac(gy), frac(gy) + frac(x - gy)};
      I = ival_contains(m, fwd, y, 0.0) ? fwd : bwd;
    }
    probe_two_jumps(finv, g, Ffinv, Fg, TwoJumpsConfig{y, I},
                    static_cast<int>(j), "index", cfg, &rep.witnesses,
                    &rep.rejections);
  }

  std::vector<double> lens;
  for (const auto& w : rep.witnesses)
    if (w.accepted) lens.push_back(w.I.len());
  rep.family = lens.size() >= 3;
  for (std::size_t k = 0; k + 1 < lens.size() && rep.family; ++k)
    if (lens[k + 1] > lens[k] + tol.geom) rep.family = false;
  if (rep.family && !(lens.back() <= lens.front() / 4.0 + tol.geom))
    rep.family = false;

  if (rep.family) {
    rep.conclusion =
        "difference-quotient products stay at or above 4 while the probe "
        "intervals shrink by a factor of four; extending this family forces "
        "the derivative of f or g to blow up, so no such family exists for a "
        "pair of C^1 maps";
  } else if (!lens.empty()) {
    rep.conclusion =
        "isolated probes certified (product >= 4), but no shrinking family of "
        "at least three was assembled";
  } else {
    rep.conclusion = "no probe survived its preconditions";
  }
  return rep;
}

nlohmann::json fg_to_json(const FgReport& r) {
  json ws = json::array();
  for (const auto& w : r.witnesses) ws.push_back(witness_json(w));
  return json{{"witnesses", ws},
              {"rejections", r.rejections},
              {"family", r.family},
              {"conclusion", r.conclusion}};
}

const char* p4_verdict_name(P4Verdict v) {
  switch (v) {
    case P4Verdict::relations_fail:
      return "RELATIONS-FAIL";
    case P4Verdict::config_exhausted:
      return "CONFIG-EXHAUSTED";
    case P4Verdict::blowup_witness:
      return "BLOWUP-WITNESS";
  }
  return "?";
}

P4Analysis analyze_p4_action(const ActionAssignment& a0, bool swap_roles,
                             const RunConfig& cfg) {
  ActionAssignment act = a0;
  P4Analysis out;
  if (swap_roles) {
    validate_p4_labels(a0);
    act.assignment.at("a") = a0.assignment.at("d");
    act.assignment.at("d") = a0.assignment.at("a");
    act.assignment.at("b") = a0.assignment.at("c");
    act.assignment.at("c") = a0.assignment.at("b");
    out.roles_swapped = true;
    out.notes.push_back("roles swapped: generators relabeled a<->d, b<->c");
  }
  validate_p4_labels(act);

  out.relations = check_action(act, cfg);
  // Only a failed *defining* relation disqualifies the assignment. A non-edge
  // pair that commutes anyway just means the action cannot be faithful; the
  // probe search still runs (and will come up empty).
  for (const auto& pc : out.relations.pairs) {
    if (pc.should_commute && pc.commutes == Tri::no) {
      out.verdict = P4Verdict::relations_fail;
      out.notes.push_back("the defining relation [" + pc.u + ", " + pc.v +
                          "] fails; the assignment is not an action of this "
                          "presentation");
      return out;
    }
  }
  for (const auto& pc : out.relations.pairs) {
    if (pc.should_commute && pc.commutes == Tri::indeterminate)
      out.notes.push_back("commutation of the edge pair (" + pc.u + ", " +
                          pc.v + ") is numerically indeterminate; proceeding");
    if (!pc.should_commute && pc.commutes == Tri::yes)
      out.notes.push_back("generators " + pc.u + " and " + pc.v +
                          " commute although no relation requires it; the "
                          "action is not faithful");
  }

  for (const auto& [name, ok] : out.relations.grounded) {
    if (!ok) {
      out.verdict = P4Verdict::config_exhausted;
      out.notes.push_back("generator '" + name +
                          "' has no fixed point; probe a power of the action "
                          "whose generators are grounded");
      return out;
    }
  }

  out.proposition = find_proposition_intervals(act, cfg.proposition_budget, cfg);
  out.chains = detect_chains(act, cfg);

  const Manifold m = act.manifold;
  struct Probe {
    Ival If, Ig;
    double x, len;
  };
  std::vector<Probe> probes;
  for (const auto& ch : out.chains)
    probes.push_back(Probe{ch.intervals[1], ch.intervals[2], ch.x,
                           probe_len(m, ch.x, ch.bx, ch.cbx)});
  std::stable_sort(probes.begin(), probes.end(),
                   [](const Probe& p, const Probe& q) { return p.len > q.len; });
  std::vector<Ival> Ifs, Igs;
  std::vector<double> xs;
  for (const auto& p : probes) {
    Ifs.push_back(p.If);
    Igs.push_back(p.Ig);
    xs.push_back(p.x);
  }
  out.obstruction =
      fg_obstruction(act.assignment.at("b"), act.assignment.at("c"), Ifs, Igs,
                     xs, cfg);

  bool any = false;
  for (const auto& w : out.obstruction.witnesses) any = any || w.accepted;
  out.verdict = any ? P4Verdict::blowup_witness : P4Verdict::config_exhausted;
  if (!any && out.chains.empty())
    out.notes.push_back(
        "no chain witness found; the probe supply is exhausted at this "
        "resolution");
  return out;
}

nlohmann::json p4_analysis_to_json(const P4Analysis& r) {
  json chains = json::array();
  for (const auto& c : r.chains) chains.push_back(chain_to_json(c));
  return json{{"verdict", p4_verdict_name(r.verdict)},
              {"relations", action_check_to_json(r.relations)},
              {"proposition", proposition_to_json(r.proposition)},
              {"chains", chains},
              {"obstruction", fg_to_json(r.obstruction)},
              {"roles_swapped", r.roles_swapped},
              {"notes", r.notes}};
}

}  // namespace onedim
