#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tmob/basic_mobile.hpp"
#include "tmob/codec.hpp"
#include "tmob/geom.hpp"
#include "tmob/params.hpp"
#include "tmob/world.hpp"

// The complete machine: 2+k basic components side by side in the plane plus
// m-2 orthogonal copies of the leader's component. Components advance in
// lockstep; the leftmost component's Commander (the Leader) decides.

namespace tmob::full {

struct VariableRole {
  enum class Kind { CoordVar, Register } kind = Kind::CoordVar;
  int index = 0;  // axis 1..m for CoordVar, register 1..k for Register
};

struct ComponentView {
  std::array<Vec, 3> pts;  // C, R, N
  basic::PhaseState state;
  basic::RestFrame frame;  // valid while the component's number line is readable
  double offset = 0.0;     // NQ offset, meaningful iff frame.valid
  VariableRole var;
  Vec axis;  // unit axis the stored coordinate refers to (CoordVar only)
};

struct LayoutView {
  bool valid = false;
  int m = 2;
  int k = 0;
  std::vector<ComponentView> comps;  // in-plane by slot, then orthogonal
  int self_comp = -1;
  int self_role = -1;  // 0=C, 1=R, 2=N within comps[self_comp].pts
  Vec xhat, yhat;
  std::vector<Vec> orth_axes;  // v_3..v_m
  Vec leader_cprime;
  basic::GeoCtx geo;  // shared guard-evaluation context

  static constexpr int kLeader = 0;
};

namespace detail {

// Single-linkage clusters at the given radius; n is tiny.
inline std::vector<std::vector<int>> link_clusters(const std::vector<Vec>& pts,
                                                   double radius) {
  int n = static_cast<int>(pts.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(pts[i], pts[j]) <= radius) parent[find(i)] = find(j);
  std::vector<std::vector<int>> out;
  std::vector<int> root_slot(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (root_slot[r] < 0) {
      root_slot[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[root_slot[r]].push_back(i);
  }
  return out;
}

}  // namespace detail

// Recovers the component structure from the machine points alone (in any
// common frame). `self_index` optionally names the observer's own entry.
inline LayoutView identify_layout(const std::vector<Vec>& pts,
                                  const MachineParams& p, int self_index = -1) {
  LayoutView lv;
  auto clusters = detail::link_clusters(pts, 4.0 * p.d);
  for (const auto& cl : clusters)
    if (cl.size() != 3) return lv;
  int nc = static_cast<int>(clusters.size());
  if (nc < 1) return lv;

  struct Raw {
    std::array<Vec, 3> crn;
    Vec xhat_prov;
    int self_role = -1;
  };
  std::vector<Raw> raw(nc);
  for (int c = 0; c < nc; ++c) {
    std::array<Vec, 3> tri = {pts[clusters[c][0]], pts[clusters[c][1]],
                              pts[clusters[c][2]]};
    basic::Roles roles = basic::identify_roles(tri, p.eta);
    if (!roles.valid) return lv;
    raw[c].crn = {tri[roles.commander], tri[roles.reference], tri[roles.number]};
    Vec along = raw[c].crn[2] - raw[c].crn[1];
    if (norm(along) <= p.eta) return lv;
    raw[c].xhat_prov = normalized(along);
    if (self_index >= 0) {
      int role_of[3] = {roles.commander, roles.reference, roles.number};
      for (int t = 0; t < 3; ++t)
        if (clusters[c][role_of[t]] == self_index) raw[c].self_role = t;
    }
  }

  // Components sit s apart along the shared xhat; the provisional per-cluster
  // xhat is accurate to ~mu/d, plenty for slotting at pitch s.
  Vec xref = raw[0].xhat_prov;
  std::vector<double> proj(nc);
  double pmin = 1e308;
  for (int c = 0; c < nc; ++c) {
    proj[c] = dot(raw[c].crn[1], xref);
    pmin = std::min(pmin, proj[c]);
  }
  std::vector<int> slot(nc);
  int max_slot = 0;
  for (int c = 0; c < nc; ++c) {
    slot[c] = static_cast<int>(std::lround((proj[c] - pmin) / p.s));
    max_slot = std::max(max_slot, slot[c]);
    if (std::abs(proj[c] - pmin - slot[c] * p.s) > p.s / 4) return lv;
  }

  // Slot 0 holds the leader plus the orthogonal copies; every other slot is a
  // single in-plane component on the baseline.
  std::vector<int> slot0;
  std::vector<int> inplane(max_slot + 1, -1);
  for (int c = 0; c < nc; ++c) {
    if (slot[c] == 0) {
      slot0.push_back(c);
    } else {
      if (inplane[slot[c]] != -1) return lv;
      inplane[slot[c]] = c;
    }
  }
  for (int sl = 1; sl <= max_slot; ++sl)
    if (inplane[sl] < 0) return lv;

  int leader_c = -1;
  std::vector<int> orth;
  if (slot0.size() == 1) {
    leader_c = slot0[0];
  } else {
    if (max_slot < 1) return lv;
    Vec base = raw[inplane[1]].crn[1];
    for (int c : slot0) {
      double off_line = norm(reject(raw[c].crn[1] - base, xref));
      if (off_line < p.s / 4) {
        if (leader_c != -1) return lv;
        leader_c = c;
      } else {
        orth.push_back(c);
      }
    }
  }
  if (leader_c < 0) return lv;

  // Orthogonal axes from component displacements. Per phase one robot class
  // may be mid-move (Commanders in phases 1-3, Numbers in 4, References in
  // 5), so take the best-agreeing pair of the three candidate displacements:
  // at least two are exact at any reachable moment.
  for (int c : orth) {
    Vec cand[3];
    for (int t = 0; t < 3; ++t)
      cand[t] = normalized(raw[c].crn[t] - raw[leader_c].crn[t]);
    double d01 = dist(cand[0], cand[1]);
    double d02 = dist(cand[0], cand[2]);
    double d12 = dist(cand[1], cand[2]);
    Vec axis = cand[0];
    if (d12 < d01 && d12 < d02) axis = cand[1];
    else if (d02 < d01 && d02 <= d12) axis = cand[2];
    lv.orth_axes.push_back(axis);
  }

  lv.m = 2 + static_cast<int>(orth.size());
  lv.k = max_slot - 1;
  if (lv.k < 0) return lv;

  basic::RestFrame lf = basic::rest_frame_from_rn(
      raw[leader_c].crn[1], raw[leader_c].crn[2], raw[leader_c].crn[0], p,
      lv.orth_axes);
  if (!lf.valid) return lv;
  lv.xhat = lf.xhat;
  lv.yhat = lf.yhat;
  lv.leader_cprime = lf.cprime;

  lv.geo.offplane_axes = lv.orth_axes;
  for (const auto& a : lv.orth_axes) {
    lv.geo.offplane_dirs.push_back(a);
    lv.geo.offplane_dirs.push_back(-1.0 * a);
  }

  std::vector<int> order;
  order.push_back(leader_c);
  for (int sl = 1; sl <= max_slot; ++sl) order.push_back(inplane[sl]);
  for (int c : orth) order.push_back(c);

  for (size_t oi = 0; oi < order.size(); ++oi) {
    int c = order[oi];
    ComponentView cv;
    cv.pts = raw[c].crn;
    cv.state = basic::classify(cv.pts[0], cv.pts[1], cv.pts[2], p, lv.geo);
    cv.frame = basic::rest_frame_from_rn(cv.pts[1], cv.pts[2], cv.pts[0], p,
                                         lv.orth_axes);
    if (cv.frame.valid) cv.offset = basic::number_offset(cv.frame, cv.pts[2], p);
    int sl = static_cast<int>(oi);
    if (sl == 0) {
      cv.var = {VariableRole::Kind::CoordVar, 1};
      cv.axis = lv.xhat;
    } else if (sl == 1 && sl <= max_slot) {
      cv.var = {VariableRole::Kind::CoordVar, 2};
      cv.axis = lv.yhat;
    } else if (sl <= max_slot) {
      cv.var = {VariableRole::Kind::Register, sl - 1};
    } else {
      cv.var = {VariableRole::Kind::CoordVar, 3 + (sl - max_slot - 1)};
      cv.axis = lv.orth_axes[sl - max_slot - 1];
    }
    lv.comps.push_back(cv);
    if (raw[c].self_role >= 0) {
      lv.self_comp = static_cast<int>(lv.comps.size()) - 1;
      lv.self_role = raw[c].self_role;
    }
  }
  lv.valid = true;
  return lv;
}

// --- lockstep gate ------------------------------------------------------------

// A robot executes a protocol line only when every other component is ready
// for that line or already past it.
inline bool lockstep_admits(const LayoutView& lv, int self_comp,
                            basic::Action a) {
  using basic::Phase;
  for (int c = 0; c < static_cast<int>(lv.comps.size()); ++c) {
    if (c == self_comp) continue;
    const basic::PhaseState& st = lv.comps[c].state;
    int r = basic::rank(st.phase);
    if (st.phase == Phase::Invalid) return false;
    switch (a) {
      case basic::Action::CmdLeaveRest:
        if (r > basic::rank(Phase::P1InTriangle)) return false;
        break;
      case basic::Action::CmdPlace:
        if (r < basic::rank(Phase::P1InTriangle)) return false;
        break;
      case basic::Action::CmdLeaveAltitude:
        if (r < basic::rank(Phase::P2OnAltitude)) return false;
        if (st.phase == Phase::P2OnAltitude && !st.matched) return false;
        break;
      case basic::Action::NumMatch:
        if (r < basic::rank(Phase::P2OnAltitude)) return false;
        break;
      case basic::Action::NumToD:
        if (r < basic::rank(Phase::P4NumToD)) return false;
        break;
      case basic::Action::RefMove:
        if (st.phase != Phase::P5RefMoving && st.phase != Phase::Rest)
          return false;
        break;
    }
  }
  return true;
}

// --- machine-level programs -----------------------------------------------

// Direction tokens index the component direction order: 0..2 in-plane,
// then 3 + 2*(j-3) + (0 for +v_j, 1 for -v_j) out of plane.
struct FullProgram {
  // The Leader's decision at rest; nullopt holds the machine.
  std::function<std::optional<int>(
      const LayoutView& lv, const std::vector<double>& vals,
      const std::vector<Vec>& env, const MachineParams& p)>
      choose;
  // New decoded value for the caller's component given the unit direction w.
  // Invoked at placement time, when every component still shows its old value.
  std::function<double(const LayoutView& lv, const std::vector<double>& vals,
                       int comp, const Vec& w, const std::vector<Vec>& env,
                       const MachineParams& p)>
      update;
};

// Decoded per-component values; nullopt while some component's number line is
// unreadable (which the lockstep gate makes irrelevant at decision points).
inline std::optional<std::vector<double>> decoded_values(const LayoutView& lv,
                                                         const MachineParams& p) {
  NumberCodec codec(p);
  std::vector<double> vals;
  for (const auto& cv : lv.comps) {
    if (!cv.frame.valid || !codec.decodable(cv.offset)) return std::nullopt;
    vals.push_back(codec.decode(cv.offset));
  }
  return vals;
}

// Simulated destination relative to the Leader's Commander.
inline Vec sim_target(const LayoutView& lv, const std::vector<double>& vals) {
  Vec t = Vec::zero(lv.xhat.dim());
  for (size_t c = 0; c < lv.comps.size(); ++c)
    if (lv.comps[c].var.kind == VariableRole::Kind::CoordVar)
      t += vals[c] * lv.comps[c].axis;
  return t;
}

inline std::vector<Vec> direction_vectors(const LayoutView& lv) {
  basic::RestFrame f;
  f.valid = true;
  f.xhat = lv.xhat;
  f.yhat = lv.yhat;
  std::vector<Vec> dirs;
  for (const auto& e : basic::canonical_directions(f)) dirs.push_back(e.u);
  for (const auto& w : lv.geo.offplane_dirs) dirs.push_back(w);
  return dirs;
}

// Travel rule of the Leader: nullopt once the target is within 2*sigma (time
// to run the simulated program), otherwise the direction whose mu-step most
// reduces the distance, ties to the lowest index.
inline std::optional<int> travel_direction(const Vec& target,
                                           const LayoutView& lv,
                                           const MachineParams& p) {
  if (norm(target) <= 2.0 * p.sigma) return std::nullopt;
  auto dirs = direction_vectors(lv);
  int best = 0;
  double best_dist = 1e308;
  for (size_t i = 0; i < dirs.size(); ++i) {
    double dd = dist(target, p.mu * dirs[i]);
    if (dd < best_dist - p.eta) {
      best_dist = dd;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// A program for the rigid robot being simulated: a pure step function from
// (snapshot within V, registers) to (relative destination, new registers).
// Snapshots carry one point at the origin standing in for the robot itself;
// coordinates are in the machine basis (xhat, yhat, v_3..).
struct SimProgram {
  int registers = 1;
  std::function<std::pair<Vec, std::vector<double>>(
      const std::vector<Vec>& snapshot, const std::vector<double>& regs)>
      step;
};

namespace detail {

inline std::pair<Vec, std::vector<double>> run_sim_step(
    const SimProgram& sim, const LayoutView& lv,
    const std::vector<double>& vals, const std::vector<Vec>& env,
    const MachineParams& p) {
  Vec target = sim_target(lv, vals);
  Vec pretend = lv.leader_cprime + target;
  std::vector<Vec> snap;
  snap.push_back(Vec::zero(lv.m));
  for (const auto& e : env) {
    if (dist(e, pretend) > p.V) continue;
    Vec rel = e - pretend;
    Vec local(lv.m);
    local[0] = dot(rel, lv.xhat);
    local[1] = dot(rel, lv.yhat);
    for (size_t j = 0; j < lv.orth_axes.size(); ++j)
      local[2 + static_cast<int>(j)] = dot(rel, lv.orth_axes[j]);
    snap.push_back(local);
  }
  std::sort(snap.begin(), snap.end());
  std::vector<double> regs;
  for (size_t c = 0; c < lv.comps.size(); ++c)
    if (lv.comps[c].var.kind == VariableRole::Kind::Register)
      regs.push_back(vals[c]);
  return sim.step(snap, regs);
}

}  // namespace detail

// Wires a SimProgram into the travel/RunProgram split: while the pending
// destination is farther than 2*sigma the machine travels toward it; then it
// evaluates the program at the pretended position and folds its outputs into
// the variables during the forced mu-step (direction u_1, since variables can
// only change while the machine moves).
inline FullProgram rigid_sim_adapter(SimProgram sim) {
  FullProgram fp;
  fp.choose = [](const LayoutView& lv, const std::vector<double>& vals,
                 const std::vector<Vec>&, const MachineParams& p)
      -> std::optional<int> {
    auto dir = travel_direction(sim_target(lv, vals), lv, p);
    if (dir) return dir;
    return 0;  // RunProgram step still moves, by convention along u_1
  };
  fp.update = [sim](const LayoutView& lv, const std::vector<double>& vals,
                    int comp, const Vec& w, const std::vector<Vec>& env,
                    const MachineParams& p) {
    const ComponentView& cv = lv.comps[comp];
    double old_v = vals[comp];
    bool run_program = norm(sim_target(lv, vals)) <= 2.0 * p.sigma;
    if (!run_program) {
      if (cv.var.kind == VariableRole::Kind::Register) return old_v;
      return old_v - p.mu * dot(w, cv.axis);
    }
    auto [reldest, regs2] = detail::run_sim_step(sim, lv, vals, env, p);
    if (cv.var.kind == VariableRole::Kind::Register)
      return regs2.at(cv.var.index - 1);
    double rel_component = reldest[cv.var.index - 1];
    return old_v - p.mu * dot(w, cv.axis) + rel_component;
  };
  return fp;
}

// --- the oblivious rule for full-machine members ------------------------------

// Machine membership: the 2s-linkage cluster containing the observer (no
// extraneous robot approaches within sigma >= 2s, so linkage cannot bridge).
inline Vec lockstep_rule(const Snapshot& snap, const MachineParams& p,
                         const FullProgram& prog) {
  int dim = snap.points.empty() ? 2 : snap.points[0].dim();
  Vec me = Vec::zero(dim);
  std::vector<Vec> all;
  all.push_back(me);
  for (const auto& q : snap.points) all.push_back(q);
  auto coarse = detail::link_clusters(all, 2.0 * p.s);
  std::vector<Vec> machine;
  std::vector<Vec> env;
  int self_index = -1;
  for (const auto& cl : coarse) {
    bool mine = false;
    for (int i : cl)
      if (i == 0) mine = true;
    if (mine) {
      for (int i : cl) {
        if (i == 0) self_index = static_cast<int>(machine.size());
        machine.push_back(all[i]);
      }
    } else {
      for (int i : cl) env.push_back(all[i]);
    }
  }
  LayoutView lv = identify_layout(machine, p, self_index);
  if (!lv.valid || lv.self_comp < 0 || lv.self_role < 0) return me;

  auto vals = decoded_values(lv, p);
  NumberCodec codec(p);

  basic::Callbacks cb;
  cb.choose = [&lv, &env, &vals, &prog, &p](double, const std::vector<Vec>&,
                                            const basic::RestFrame&)
      -> std::optional<int> {
    const MachineParams& params = p;
    if (lv.self_comp == LayoutView::kLeader) {
      if (!vals || !prog.choose) return std::nullopt;
      return prog.choose(lv, *vals, env, params);
    }
    // follower: adopt the direction the Leader's Commander is moving in
    const ComponentView& L = lv.comps[LayoutView::kLeader];
    if (!L.frame.valid) return std::nullopt;
    Vec disp = L.pts[0] - L.frame.cprime;
    if (norm(disp) < params.delta / 2) return std::nullopt;
    auto dirs = direction_vectors(lv);
    Vec u = normalized(disp);
    for (size_t i = 0; i < dirs.size(); ++i)
      if (dot(u, dirs[i]) > 0.70) return static_cast<int>(i);
    return std::nullopt;
  };
  cb.update = [&lv, &env, &vals, &prog, codec, &p](double offset,
                                                   const std::vector<Vec>&,
                                                   const basic::RestFrame& f,
                                                   int dir) {
    const MachineParams& params = p;
    if (!vals || !prog.update) return offset;
    auto ds = basic::direction_set(f, lv.geo);
    Vec w = ds.at(dir).u;
    double fresh = prog.update(lv, *vals, lv.self_comp, w, env, params);
    return codec.encode(fresh);
  };

  basic::ComponentCtx ctx;
  ctx.params = &p;
  ctx.env = env;
  ctx.geo = lv.geo;
  ctx.cb = cb;
  ctx.gate = [&lv](basic::Action a, int) {
    return lockstep_admits(lv, lv.self_comp, a);
  };
  return basic::component_rule(lv.comps[lv.self_comp].pts, lv.self_role, ctx);
}

}  // namespace tmob::full
