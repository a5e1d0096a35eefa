#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tmob/codec.hpp"
#include "tmob/geom.hpp"
#include "tmob/params.hpp"
#include "tmob/world.hpp"

// The basic three-robot machine: role identification, rest-frame recovery,
// the midway-triangle geometry, and the per-robot oblivious rule. Everything
// here is a pure function of robot positions expressed in any common
// coordinate system; chirality comes from the scalene triangle itself, never
// from the observer's handedness.

namespace tmob::basic {

struct Roles {
  bool valid = false;
  int commander = -1;
  int reference = -1;
  int number = -1;
};

// The two closest robots are Commander and Reference, the two farthest are
// Commander and Number. Any two pair-distances within eta is ambiguous.
inline Roles identify_roles(const std::array<Vec, 3>& p, double eta) {
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  double len[3];
  for (int k = 0; k < 3; ++k) len[k] = dist(p[pairs[k][0]], p[pairs[k][1]]);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (std::abs(len[a] - len[b]) <= eta) return {};
  int lo = 0, hi = 0;
  for (int k = 1; k < 3; ++k) {
    if (len[k] < len[lo]) lo = k;
    if (len[k] > len[hi]) hi = k;
  }
  Roles r;
  for (int i = 0; i < 3; ++i) {
    bool in_lo = (pairs[lo][0] == i || pairs[lo][1] == i);
    bool in_hi = (pairs[hi][0] == i || pairs[hi][1] == i);
    if (in_lo && in_hi) r.commander = i;
    else if (in_lo) r.reference = i;
    else if (in_hi) r.number = i;
  }
  r.valid = r.commander >= 0 && r.reference >= 0 && r.number >= 0;
  return r;
}

inline Vec reject_all(Vec v, const std::vector<Vec>& axes) {
  for (const auto& a : axes) v = reject(v, a);
  return v;
}

// Tolerance for the stored-value match (line 8's equality and the Number's
// arrival test). The protocol makes these quantities exactly equal, and the
// codec's offset increments shrink quadratically with the stored value, so
// this sits well below eta (but well above cross-observer rounding noise) to
// keep large counters countable.
inline double value_match_tol(const MachineParams& p) {
  return 1e-3 * p.eta;
}

// Rest frame recovered from the Reference and Number robots: origin R,
// xhat toward N, yhat toward the Virtual Commander. For machines embedded
// in higher dimension the caller supplies the out-of-plane layout axes;
// displacements along them (an out-of-plane move in progress) are projected
// away so the recovered plane is the machine's own.
struct RestFrame {
  bool valid = false;
  Vec r;
  Vec xhat;
  Vec yhat;
  Vec cprime;
  // Honest distance of N from the recovered number line (out-of-plane parts
  // included). Nonzero while the Number trades planes in phases 4-5, which is
  // exactly when the line-recovery guards must not be trusted.
  double n_lateral = 0.0;
};

inline RestFrame rest_frame_from_rn(const Vec& r, const Vec& n, const Vec& c,
                                    const MachineParams& p,
                                    const std::vector<Vec>& offplane = {}) {
  RestFrame f;
  Vec along = reject_all(n - r, offplane);
  double na = norm(along);
  if (na <= p.eta) return f;
  f.xhat = along / na;
  Vec up = reject(reject_all(c - r, offplane), f.xhat);
  double nu = norm(up);
  if (nu <= p.eta) return f;  // C equidistant from both candidates
  f.yhat = up / nu;
  f.r = r;
  f.cprime = r + p.d * f.yhat;
  f.n_lateral = norm(reject(n - r, f.xhat));
  f.valid = true;
  return f;
}

// Spec name: C' from R and N (C picks the side).
inline std::optional<Vec> virtual_commander_from_rn(const Vec& r, const Vec& n,
                                                    const Vec& c,
                                                    const MachineParams& p) {
  RestFrame f = rest_frame_from_rn(r, n, c, p);
  if (!f.valid) return std::nullopt;
  return f.cprime;
}

// A travel direction together with its altitude normal (both unit vectors).
struct DirEntry {
  Vec u;
  Vec n;
};

// u1 along yhat (D1 collinear with R and C'), u2/u3 at +-120 degrees with u2
// on the far side from the Number robot. Altitude apexes sit on the left
// normal of u_i in the machine frame.
inline std::vector<DirEntry> canonical_directions(const RestFrame& f) {
  const double h = std::sqrt(3.0) / 2.0;
  std::vector<DirEntry> ds;
  ds.push_back({f.yhat, -1.0 * f.xhat});
  ds.push_back({-h * f.xhat - 0.5 * f.yhat, 0.5 * f.xhat - h * f.yhat});
  ds.push_back({h * f.xhat - 0.5 * f.yhat, 0.5 * f.xhat + h * f.yhat});
  return ds;
}

struct GeoCtx {
  std::vector<Vec> offplane_axes;  // orthogonal layout axes v_3..v_m
  std::vector<Vec> offplane_dirs;  // direction candidates +-v_j
};

// Direction candidates in guard-priority order: the three in-plane ones,
// then the out-of-plane pairs. Out-of-plane midway triangles live in
// span(w, xhat) with the apex toward xhat.
inline std::vector<DirEntry> direction_set(const RestFrame& f,
                                           const GeoCtx& ctx) {
  std::vector<DirEntry> ds = canonical_directions(f);
  for (const auto& w : ctx.offplane_dirs) ds.push_back({w, f.xhat});
  return ds;
}

struct MidwayPoints {
  Vec a, s, b, d, sp;  // A_i, S_i, B_i, D_i, S'_i
};

inline MidwayPoints derived_points(const RestFrame& f, const DirEntry& e,
                                   const MachineParams& p) {
  MidwayPoints m;
  m.a = f.cprime + (p.mu / 2 - p.lambda / 2) * e.u;
  m.s = f.cprime + (p.mu / 2) * e.u;
  m.b = f.cprime + (p.mu / 2 + p.lambda / 2) * e.u;
  m.d = f.cprime + p.mu * e.u;
  m.sp = m.s + p.lambda * e.n;
  return m;
}

inline Vec point_q(const RestFrame& f, const MachineParams& p) {
  return f.r + (2 * p.d - p.lambda / 2) * f.xhat;
}
inline Vec point_q_prime(const RestFrame& f, const MachineParams& p) {
  return f.r + (2 * p.d + p.lambda / 2) * f.xhat;
}

// Number robot's offset from Q along the number line.
inline double number_offset(const RestFrame& f, const Vec& n,
                            const MachineParams& p) {
  return dot(n - f.r, f.xhat) - (2 * p.d - p.lambda / 2);
}

// C' recovered from C and R alone, usable once the Commander sits at a final
// destination: |CR| = d+mu pins D1, |CR| = d' pins D2/D3 via the angle NRC,
// and |CR| = sqrt(d^2+mu^2) pins an out-of-plane destination.
struct VcFromCr {
  bool valid = false;
  Vec cprime;
  int dir = -1;  // index into the direction_set order
};

inline VcFromCr virtual_commander_from_cr(const Vec& c, const Vec& r,
                                          const Vec& n, const MachineParams& p,
                                          const GeoCtx& ctx = {}) {
  VcFromCr out;
  double cr = dist(c, r);
  if (std::abs(cr - (p.d + p.mu)) <= p.eta) {
    out.valid = true;
    out.dir = 0;
    out.cprime = r + (p.d / cr) * (c - r);
    return out;
  }
  if (std::abs(cr - p.dprime()) <= p.eta) {
    double ang = angle_at(r, n, c);
    const double half_pi = 2.0 * std::atan(1.0);
    if (std::abs(ang - half_pi) <= p.eta) return out;
    int dir = ang > half_pi ? 1 : 2;
    // C-R has rest-frame coordinates (-+ sqrt3*mu/2, d - mu/2); invert to
    // recover yhat, using the Number's side to orient the plane.
    double ax = (dir == 1 ? -1.0 : 1.0) * std::sqrt(3.0) * p.mu / 2.0;
    double ay = p.d - p.mu / 2.0;
    Vec e = (c - r) / cr;
    Vec eperp = reject(reject_all(n - r, ctx.offplane_axes), e);
    double np = norm(eperp);
    if (np <= p.eta) return out;
    eperp = eperp / np;
    Vec yhat = (ay / cr) * e - (ax / cr) * eperp;
    out.valid = true;
    out.dir = dir;
    out.cprime = r + p.d * yhat;
    return out;
  }
  double d_orth = std::sqrt(p.d * p.d + p.mu * p.mu);
  if (std::abs(cr - d_orth) <= p.eta) {
    for (size_t k = 0; k < ctx.offplane_dirs.size(); ++k) {
      const Vec& w = ctx.offplane_dirs[k];
      if (std::abs(dot(c - r, w) - p.mu) > 4 * p.eta) continue;
      Vec res = (c - r) - p.mu * w;
      if (std::abs(norm(res) - p.d) > 4 * p.eta) continue;
      out.valid = true;
      out.dir = 3 + static_cast<int>(k);
      out.cprime = r + res;
      return out;
    }
  }
  return out;
}

// Interruption-invariant phase-4 target: intersect the mover's line of
// travel with the number line translated by the step vector.
inline Vec phase4_target(const Vec& n, const Vec& r, const Vec& xhat,
                         const Vec& step_vec, const MachineParams& p) {
  Vec q = reject(step_vec, xhat);
  double want = norm(q);
  if (want <= p.eta) throw std::domain_error("parallel");
  Vec qhat = q / want;
  double have = dot(n - r, qhat);
  return n + ((want - have) / want) * step_vec;
}

// The old number-line direction seen from the Number robot mid-flight: its
// own displacement is along yhat (in-plane) or along a layout axis, both of
// which project away exactly.
inline std::optional<Vec> number_line_xhat(const Vec& n, const Vec& r,
                                           const Vec& yhat,
                                           const MachineParams& p,
                                           const GeoCtx& ctx) {
  Vec along = reject_all(reject(n - r, yhat), ctx.offplane_axes);
  double na = norm(along);
  if (na <= p.eta) return std::nullopt;
  return along / na;
}

// The Reference robot's target: the intersection of the circle around C of
// radius d with the circle of diameter CN that is nearest R, solved in the
// machine's own plane (exact even while an out-of-plane step is completing).
inline std::optional<Vec> reference_target(const Vec& c, const Vec& r,
                                           const Vec& n, const RestFrame& f,
                                           const MachineParams& p) {
  Vec e1 = f.xhat, e2 = f.yhat;
  Vec n2(dot(n - c, e1), dot(n - c, e2));
  Vec r2(dot(r - c, e1), dot(r - c, e2));
  try {
    Vec t2 = nearest_on_circle_pair(Vec(0.0, 0.0), p.d, n2, r2, p.eta);
    return c + t2.x() * e1 + t2.y() * e2;
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

// --- classification ---------------------------------------------------------

enum class Phase {
  Invalid = -1,
  Rest = 0,
  P1ToA,         // Commander on segment C'A_i
  P1InTriangle,  // Commander at A_i or inside triangle A_i S_i S'_i
  P2OnAltitude,  // Commander parked on S_i S'_i
  P3ToD,         // Commander past the altitude, up to (but excluding) D_i
  P4NumToD,      // Commander at D_i, Number en route to D'_i
  P5RefMoving,   // Number at D'_i, Reference completing the translation
};

struct PhaseState {
  Phase phase = Phase::Invalid;
  int dir = -1;
  bool matched = false;  // P2 only: |NQ| equals |CS_i| within eta
};

inline int rank(Phase ph) { return static_cast<int>(ph); }

// Coarse per-component label (the five phases plus Rest).
enum class Label { Invalid = -1, Rest = 0, P1, P2, P3, P4, P5 };

inline Label label_of(Phase ph) {
  switch (ph) {
    case Phase::Rest: return Label::Rest;
    case Phase::P1ToA:
    case Phase::P1InTriangle: return Label::P1;
    case Phase::P2OnAltitude: return Label::P2;
    case Phase::P3ToD: return Label::P3;
    case Phase::P4NumToD: return Label::P4;
    case Phase::P5RefMoving: return Label::P5;
    default: return Label::Invalid;
  }
}

// Evaluates the guard chain in priority order and names the configuration.
inline PhaseState classify(const Vec& c, const Vec& r, const Vec& n,
                           const MachineParams& p, const GeoCtx& ctx = {}) {
  const double eta = p.eta;
  RestFrame f = rest_frame_from_rn(r, n, c, p, ctx.offplane_axes);
  if (f.valid) {
    double off = number_offset(f, n, p);
    bool n_on_line =
        f.n_lateral <= eta && off >= -4 * eta && off <= p.lambda + 4 * eta;
    if (n_on_line) {
      std::vector<DirEntry> ds = direction_set(f, ctx);
      if (dist(c, f.cprime) <= eta) return {Phase::Rest, -1, false};
      for (size_t i = 0; i < ds.size(); ++i) {
        MidwayPoints m = derived_points(f, ds[i], p);
        if (on_segment(c, f.cprime, m.a, eta) && dist(c, m.a) > eta)
          return {Phase::P1ToA, static_cast<int>(i), false};
      }
      for (size_t i = 0; i < ds.size(); ++i) {
        MidwayPoints m = derived_points(f, ds[i], p);
        if (dist(c, m.a) <= eta || (in_triangle(c, m.a, m.s, m.sp, eta) &&
                                    !on_segment(c, m.s, m.sp, eta)))
          return {Phase::P1InTriangle, static_cast<int>(i), false};
      }
      for (size_t i = 0; i < ds.size(); ++i) {
        MidwayPoints m = derived_points(f, ds[i], p);
        if (on_segment(c, m.s, m.sp, eta)) {
          double cs = dot(c - m.s, ds[i].n);
          bool matched = std::abs(off - cs) <= value_match_tol(p);
          return {Phase::P2OnAltitude, static_cast<int>(i), matched};
        }
      }
      for (size_t i = 0; i < ds.size(); ++i) {
        MidwayPoints m = derived_points(f, ds[i], p);
        bool in_b_half =
            in_triangle(c, m.b, m.s, m.sp, eta) && !on_segment(c, m.s, m.sp, eta);
        bool on_exit = on_segment(c, m.b, m.d, eta) && dist(c, m.d) > eta;
        if (in_b_half || on_exit)
          return {Phase::P3ToD, static_cast<int>(i), false};
      }
    }
  }
  // Commander at a final destination: phase 4 until the Number arrives.
  VcFromCr vc = virtual_commander_from_cr(c, r, n, p, ctx);
  if (vc.valid) {
    Vec yhat = (vc.cprime - r) / p.d;
    auto xhat = number_line_xhat(n, r, yhat, p, ctx);
    if (xhat) {
      Vec target = phase4_target(n, r, *xhat, c - vc.cprime, p);
      if (dist(n, target) > eta) return {Phase::P4NumToD, vc.dir, false};
      return {Phase::P5RefMoving, vc.dir, false};
    }
  }
  // Reference mid-move: reconstruct the pre-step pose from C and N (which a
  // moving Reference leaves untouched) and check R sits on its travel leg.
  if (f.valid) {
    auto target = reference_target(c, r, n, f, p);
    if (target) {
      const Vec& pt = *target;
      double xi = dist(r, pt);
      Vec xvec = n - pt;
      double rn_old = norm(xvec);
      bool pose_ok = std::abs(dist(c, pt) - p.d) <= 64 * eta &&
                     std::abs(dot(xvec, c - pt)) <= 64 * eta * p.d &&
                     rn_old >= 2 * p.d - p.lambda && rn_old <= 2 * p.d + p.lambda;
      if (pose_ok && xi > eta && xi <= p.mu + 64 * eta) {
        Vec u = (pt - r) / xi;
        RestFrame old;
        old.valid = true;
        old.r = pt - p.mu * u;
        old.yhat = (c - pt) / dist(c, pt);
        old.xhat = xvec / rn_old;
        old.cprime = old.r + p.d * old.yhat;
        int di = -1;
        auto ds = direction_set(old, ctx);
        for (size_t i = 0; i < ds.size(); ++i)
          if (dot(ds[i].u, u) > 0.866) di = static_cast<int>(i);
        if (di >= 0) return {Phase::P5RefMoving, di, false};
      }
    }
  }
  return {Phase::Invalid, -1, false};
}

// --- the oblivious rule ------------------------------------------------------

// Actions a component robot can take; the lockstep gate of the full machine
// admits or defers them per the other components' progress.
enum class Action {
  CmdLeaveRest,
  CmdPlace,
  CmdLeaveAltitude,
  NumMatch,
  NumToD,
  RefMove,
};

using GateFn = std::function<bool(Action, int dir)>;

struct Callbacks {
  // Direction choice at rest: index into the direction set, or nullopt to
  // hold position. Pure function of its arguments.
  std::function<std::optional<int>(double offset, const std::vector<Vec>& env,
                                   const RestFrame& f)>
      choose;
  // New offset published on the altitude (the f of the protocol).
  std::function<double(double offset, const std::vector<Vec>& env,
                       const RestFrame& f, int dir)>
      update;
};

struct ComponentCtx {
  const MachineParams* params = nullptr;
  std::vector<Vec> env;
  GeoCtx geo;
  Callbacks cb;
  GateFn gate;  // null: always allowed

  bool allowed(Action a, int dir) const { return !gate || gate(a, dir); }
};

namespace detail {

inline std::optional<Vec> commander_move(const Vec& c, const Vec& r,
                                         const Vec& n, const ComponentCtx& ctx) {
  const MachineParams& p = *ctx.params;
  const double eta = p.eta;
  RestFrame f = rest_frame_from_rn(r, n, c, p, ctx.geo.offplane_axes);
  if (!f.valid) return std::nullopt;
  if (f.n_lateral > eta) return std::nullopt;  // N mid-plane-change: phases 4-5
  std::vector<DirEntry> ds = direction_set(f, ctx.geo);
  // line 4: at the Virtual Commander, i.e. at rest
  if (dist(c, f.cprime) <= eta) {
    double off = number_offset(f, n, p);
    auto choice =
        ctx.cb.choose ? ctx.cb.choose(off, ctx.env, f) : std::optional<int>{};
    if (!choice || *choice < 0 || *choice >= static_cast<int>(ds.size()))
      return std::nullopt;
    if (!ctx.allowed(Action::CmdLeaveRest, *choice)) return std::nullopt;
    return derived_points(f, ds[*choice], p).a;
  }
  // line 5: resume the march toward A_i
  for (size_t i = 0; i < ds.size(); ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    if (on_segment(c, f.cprime, m.a, eta) && dist(c, m.a) > eta) return m.a;
  }
  // lines 5.1-5.2: at A_i, publish the new value on the altitude
  for (size_t i = 0; i < ds.size(); ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    if (dist(c, m.a) <= eta) {
      if (!ctx.allowed(Action::CmdPlace, static_cast<int>(i)))
        return std::nullopt;
      double off = number_offset(f, n, p);
      double fresh = ctx.cb.update
                         ? ctx.cb.update(off, ctx.env, f, static_cast<int>(i))
                         : off;
      if (!(fresh > 0.0 && fresh < p.lambda))
        throw std::domain_error("out of codec range");
      return m.s + fresh * ds[i].n;
    }
  }
  // lines 6-7: interrupted placement; re-aim along the ray A_i -> C
  for (size_t i = 0; i < ds.size(); ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    if (in_triangle(c, m.a, m.s, m.sp, eta) && !on_segment(c, m.s, m.sp, eta)) {
      double cu = dot(c - m.s, ds[i].u);
      double cn = dot(c - m.s, ds[i].n);
      double t = (p.lambda / 2) / (cu + p.lambda / 2);
      double h = std::clamp(t * cn, 0.0, p.lambda);
      return m.s + h * ds[i].n;
    }
  }
  // line 8: depart once the Number matches
  for (size_t i = 0; i < ds.size(); ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    if (on_segment(c, m.s, m.sp, eta)) {
      double off = number_offset(f, n, p);
      double cs = dot(c - m.s, ds[i].n);
      if (std::abs(off - cs) <= value_match_tol(p) &&
          ctx.allowed(Action::CmdLeaveAltitude, static_cast<int>(i)))
        return m.b;
      return std::nullopt;
    }
  }
  // line 9: through the far half of the midway triangle
  for (size_t i = 0; i < ds.size(); ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    if (in_triangle(c, m.b, m.s, m.sp, eta) && !on_segment(c, m.s, m.sp, eta) &&
        dist(c, m.b) > eta)
      return m.b;
  }
  // line 10: the final stretch to D_i
  for (size_t i = 0; i < ds.size(); ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    if (on_segment(c, m.b, m.d, eta) && dist(c, m.d) > eta) return m.d;
  }
  return std::nullopt;
}

inline std::optional<Vec> number_move(const Vec& c, const Vec& r, const Vec& n,
                                      const ComponentCtx& ctx) {
  const MachineParams& p = *ctx.params;
  const double eta = p.eta;
  // lines 12-16: Commander at a final destination
  VcFromCr vc = virtual_commander_from_cr(c, r, n, p, ctx.geo);
  if (vc.valid) {
    Vec yhat = (vc.cprime - r) / p.d;
    auto xhat = number_line_xhat(n, r, yhat, p, ctx.geo);
    if (!xhat) return std::nullopt;
    Vec target = phase4_target(n, r, *xhat, c - vc.cprime, p);
    if (dist(n, target) > eta && ctx.allowed(Action::NumToD, vc.dir))
      return target;
    return std::nullopt;
  }
  // lines 17-20: match the Commander's altitude position on QQ'
  RestFrame f = rest_frame_from_rn(r, n, c, p, ctx.geo.offplane_axes);
  if (!f.valid) return std::nullopt;
  if (f.n_lateral > eta) return std::nullopt;
  std::vector<DirEntry> ds = direction_set(f, ctx.geo);
  for (size_t i = 0; i < ds.size(); ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    if (on_segment(c, m.s, m.sp, eta)) {
      double cs = dot(c - m.s, ds[i].n);
      Vec target = point_q(f, p) + cs * f.xhat;
      if (dist(n, target) > value_match_tol(p) &&
          ctx.allowed(Action::NumMatch, static_cast<int>(i)))
        return target;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// The rule a component robot follows given the three member positions in a
// common frame. `self` names the caller's own entry; the returned point is
// its destination in the same frame (its own position when no guard fires).
inline Vec component_rule(const std::array<Vec, 3>& pts, int self,
                          const ComponentCtx& ctx) {
  const MachineParams& p = *ctx.params;
  Roles roles = identify_roles(pts, p.eta);
  Vec me = pts[self];
  if (!roles.valid) return me;  // defensive no-op
  const Vec& c = pts[roles.commander];
  const Vec& r = pts[roles.reference];
  const Vec& n = pts[roles.number];
  auto tasked = [&](const std::optional<Vec>& dest, const Vec& from) {
    return dest && dist(*dest, from) > p.eta;
  };
  if (self == roles.commander) {
    auto dest = detail::commander_move(c, r, n, ctx);
    return dest ? *dest : me;
  }
  if (self == roles.number) {
    auto dest = detail::number_move(c, r, n, ctx);
    return dest ? *dest : me;
  }
  // Reference, lines 22-25: act only when the other two are done.
  if (tasked(detail::commander_move(c, r, n, ctx), c)) return me;
  if (tasked(detail::number_move(c, r, n, ctx), n)) return me;
  if (!ctx.allowed(Action::RefMove, -1)) return me;
  RestFrame f = rest_frame_from_rn(r, n, c, p, ctx.geo.offplane_axes);
  if (!f.valid) return me;
  auto target = reference_target(c, r, n, f, p);
  if (target && dist(me, *target) > p.eta) return *target;
  return me;
}

// Role self-identification plus mate discovery for a standalone basic
// machine: the mates are the unique nearby pair forming a classifiable
// machine together with the observer; everything else is environment.
struct MatePartition {
  bool valid = false;
  std::array<Vec, 3> pts;  // pts[0] is the observer (origin)
  std::vector<Vec> env;
};

inline MatePartition partition_snapshot(const Snapshot& snap,
                                        const MachineParams& p) {
  MatePartition out;
  std::vector<int> cand;
  for (size_t i = 0; i < snap.points.size(); ++i)
    if (norm(snap.points[i]) <= 3.0 * p.d) cand.push_back(static_cast<int>(i));
  int found_a = -1, found_b = -1, hits = 0;
  int dim = snap.points.empty() ? 2 : snap.points[0].dim();
  Vec origin = Vec::zero(dim);
  for (size_t a = 0; a + 1 < cand.size(); ++a) {
    for (size_t b = a + 1; b < cand.size(); ++b) {
      std::array<Vec, 3> pts = {origin, snap.points[cand[a]],
                                snap.points[cand[b]]};
      Roles roles = identify_roles(pts, p.eta);
      if (!roles.valid) continue;
      PhaseState ps = classify(pts[roles.commander], pts[roles.reference],
                               pts[roles.number], p);
      if (ps.phase == Phase::Invalid) continue;
      ++hits;
      found_a = cand[a];
      found_b = cand[b];
    }
  }
  if (hits != 1) return out;
  out.valid = true;
  out.pts = {origin, snap.points[found_a], snap.points[found_b]};
  for (size_t i = 0; i < snap.points.size(); ++i)
    if (static_cast<int>(i) != found_a && static_cast<int>(i) != found_b)
      out.env.push_back(snap.points[i]);
  return out;
}

// The complete oblivious program for a robot of a standalone basic machine.
inline Vec robot_rule(const Snapshot& snap, const MachineParams& p,
                      const Callbacks& cb) {
  MatePartition part = partition_snapshot(snap, p);
  int dim = snap.points.empty() ? 2 : snap.points[0].dim();
  if (!part.valid) return Vec::zero(dim);
  ComponentCtx ctx;
  ctx.params = &p;
  ctx.env = part.env;
  ctx.cb = cb;
  return component_rule(part.pts, 0, ctx);
}

// Debug probe for the guard-disjointness property: how many raw guard
// conditions of the Commander chain hold simultaneously, ignoring priority.
inline int commander_guard_count(const Vec& c, const Vec& r, const Vec& n,
                                 const MachineParams& p, const GeoCtx& geo = {}) {
  RestFrame f = rest_frame_from_rn(r, n, c, p, geo.offplane_axes);
  if (!f.valid) return 0;
  const double eta = p.eta;
  int count = 0;
  if (dist(c, f.cprime) <= eta) ++count;
  std::vector<DirEntry> ds = direction_set(f, geo);
  bool l5 = false, l51 = false, l6 = false, l8or9 = false, l9 = false,
       l10 = false;
  double off = number_offset(f, n, p);
  for (const auto& e : ds) {
    MidwayPoints m = derived_points(f, e, p);
    if (on_segment(c, f.cprime, m.a, eta) && dist(c, m.a) > eta) l5 = true;
    if (dist(c, m.a) <= eta) l51 = true;
    else if (in_triangle(c, m.a, m.s, m.sp, eta) && !on_segment(c, m.s, m.sp, eta))
      l6 = true;
    if (on_segment(c, m.s, m.sp, eta) &&
        std::abs(off - dot(c - m.s, e.n)) <= eta)
      l8or9 = true;
    if (in_triangle(c, m.b, m.s, m.sp, eta) && !on_segment(c, m.s, m.sp, eta) &&
        dist(c, m.b) > eta)
      l9 = true;
    if (on_segment(c, m.b, m.d, eta) && dist(c, m.d) > eta) l10 = true;
  }
  return count + l5 + l51 + l6 + l8or9 + l9 + l10;
}

}  // namespace tmob::basic
