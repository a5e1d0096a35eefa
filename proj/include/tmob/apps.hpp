#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tmob/basic_mobile.hpp"
#include "tmob/codec.hpp"
#include "tmob/programs.hpp"
#include "tmob/world.hpp"

// The application protocols around a basic machine: Near-Gathering and
// Pattern Formation. Outsiders join a staging segment A near the machine one
// at a time; patterns are later formed in the adjacent area B. The machine's
// own stored number doubles as the phase broadcast: exploration counts moves
// (value >= 0), and a final step writes the sentinel -1 once every robot is
// recruited, switching all rules into the formation phase.

namespace tmob::apps {

struct AreaConfig {
  int n_known = 0;        // 0: keep exploring forever
  double a_offset = 3.5;  // A's start, in units of d from the Commander
  double slot_pitch = 0.025;
  double b_offset = 4.0;  // B box start
  double b_len = 0.1;
  double b_halfwidth = 0.05;
  double lane_depth = 0.35;  // joiners approach their slot from below
};

inline constexpr double kPhaseSentinel = -1.0;

// A machine recognized at rest, in the observer's coordinates.
struct MachineFix {
  bool found = false;
  Vec c, r, n;
  basic::RestFrame frame;
  std::vector<int> members;  // indices into the probed point list
  double value = 0.0;        // decoded stored number
};

// Rest signature: |CR| = d, right angle at R, |RN| on the number segment.
// The tolerance sits far above the protocol's eta drift and far below every
// mid-step excursion, so only a resting machine matches.
inline MachineFix find_rest_machine(const std::vector<Vec>& pts,
                                    const MachineParams& p) {
  MachineFix out;
  const double tol = 1e-4 * p.d;
  int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        std::array<Vec, 3> tri = {pts[i], pts[j], pts[k]};
        basic::Roles roles = basic::identify_roles(tri, p.eta);
        if (!roles.valid) continue;
        const Vec& c = tri[roles.commander];
        const Vec& r = tri[roles.reference];
        const Vec& nn = tri[roles.number];
        if (std::abs(dist(c, r) - p.d) > tol) continue;
        double rn = dist(r, nn);
        if (rn < 2 * p.d - p.lambda || rn > 2 * p.d + p.lambda) continue;
        if (std::abs(dot(c - r, nn - r)) > tol * p.d) continue;
        if (out.found) return {};  // ambiguous
        out.found = true;
        out.c = c;
        out.r = r;
        out.n = nn;
        out.frame = basic::rest_frame_from_rn(r, nn, c, p);
        out.members = {i, j, k};
      }
  if (!out.found || !out.frame.valid) {
    out.found = false;
    return out;
  }
  NumberCodec codec(p);
  double off = basic::number_offset(out.frame, out.n, p);
  if (!codec.decodable(off)) {
    out.found = false;
    return out;
  }
  out.value = codec.decode(off);
  return out;
}

inline double slot_tolerance(const MachineParams& p) { return 1e-6 * p.d; }

// Staging geometry anchored at the Commander's rest position.
struct Staging {
  Vec c;
  basic::RestFrame frame;
  AreaConfig cfg;
  const MachineParams* p = nullptr;

  double x_of(const Vec& q) const { return dot(q - c, frame.xhat) / p->d; }
  double y_of(const Vec& q) const { return dot(q - c, frame.yhat) / p->d; }

  Vec slot(int k) const {
    return c + (cfg.a_offset + k * cfg.slot_pitch) * p->d * frame.xhat;
  }
  Vec lane_entry(int k) const {
    return slot(k) - cfg.lane_depth * p->d * frame.yhat;
  }

  // The staging band: the slot line and its immediate surroundings, where
  // recruited robots sit and track the machine.
  bool in_band(const Vec& q) const {
    double x = x_of(q), y = std::abs(y_of(q));
    return y <= 2.5 * p->mu / p->d && x >= cfg.a_offset - 0.1 &&
           x <= cfg.a_offset + 0.2;
  }

  bool in_box(const Vec& q) const {
    double x = x_of(q), y = std::abs(y_of(q));
    return x >= cfg.b_offset - 0.02 && x <= cfg.b_offset + cfg.b_len + 0.02 &&
           y <= cfg.b_halfwidth + 0.02;
  }

  // The approach lane under slot k.
  bool in_lane(const Vec& q, int k) const {
    double y = y_of(q);
    if (y >= -2.0 * p->mu / p->d || y < -(cfg.lane_depth + 0.05)) return false;
    return std::abs(x_of(q) - (cfg.a_offset + k * cfg.slot_pitch)) <=
           cfg.slot_pitch / 3;
  }

  bool on_some_slot(const Vec& q) const {
    double x = x_of(q) - cfg.a_offset;
    int k = static_cast<int>(std::lround(x / cfg.slot_pitch));
    if (k < 0) return false;
    return dist(q, slot(k)) <= slot_tolerance(*p);
  }

  // Band occupants in staging order, boxed robots excluded; rank i belongs
  // on slot i.
  std::vector<int> band_order(const std::vector<Vec>& pts,
                              const std::vector<int>& skip) const {
    std::vector<std::pair<double, int>> found;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (std::find(skip.begin(), skip.end(), static_cast<int>(i)) != skip.end())
        continue;
      if (!in_band(pts[i]) || in_box(pts[i])) continue;
      found.push_back({x_of(pts[i]), static_cast<int>(i)});
    }
    std::sort(found.begin(), found.end());
    std::vector<int> order;
    for (auto& f : found) order.push_back(f.second);
    return order;
  }
};

inline Staging staging_from_frame(const basic::RestFrame& f,
                                  const AreaConfig& cfg,
                                  const MachineParams& p) {
  return Staging{f.cprime, f, cfg, &p};
}

// --- Near-Gathering -----------------------------------------------------------

// Machine behavior: spiral exploration. At rest, hold while any visible
// robot within V/2 is off its slot (recruiting, approaches, and the
// re-settling after each machine step). With n known and everyone seated,
// write the phase sentinel in one final step, then rest forever.
inline programs::MobileProgram near_gathering_mobile_program(
    AreaConfig cfg, const MachineParams& params, bool sentinel_finish = false) {
  programs::MobileProgram prog;
  auto survey = [cfg, params](const std::vector<Vec>& env,
                              const basic::RestFrame& f, int& slotted,
                              bool& unsettled) {
    Staging st = staging_from_frame(f, cfg, params);
    slotted = 0;
    unsettled = false;
    for (const auto& e : env) {
      if (st.on_some_slot(e)) {
        ++slotted;
        continue;
      }
      if (st.in_box(e)) continue;  // formation phase: handled by the hold rule
      if (dist(e, f.cprime) < params.V / 2) unsettled = true;
    }
  };
  prog.choose = [cfg, params, survey, sentinel_finish](
                    double v, const std::vector<Vec>& env,
                    const basic::RestFrame& f) -> std::optional<int> {
    if (v < -0.5) return std::nullopt;  // sentinel written: rest forever
    int slotted = 0;
    bool unsettled = false;
    survey(env, f, slotted, unsettled);
    if (unsettled) return std::nullopt;
    if (cfg.n_known > 0 && slotted >= cfg.n_known - 3) {
      if (!sentinel_finish) return std::nullopt;  // gathered: rest forever
      long long n = std::llround(v);
      return programs::spiral_direction(n < 0 ? 0 : n);  // the sentinel step
    }
    long long n = std::llround(v);
    if (n < 0) n = 0;
    return programs::spiral_direction(n);
  };
  prog.update = [cfg, params, survey, sentinel_finish](
                    double v, const std::vector<Vec>& env,
                    const basic::RestFrame& f) -> double {
    if (v < -0.5) return v;
    if (sentinel_finish) {
      int slotted = 0;
      bool unsettled = false;
      survey(env, f, slotted, unsettled);
      if (!unsettled && cfg.n_known > 0 && slotted >= cfg.n_known - 3)
        return kPhaseSentinel;
    }
    return v + 1.0;
  };
  return prog;
}

// The displaced band robot allowed to resettle now: moving to its slot must
// not cross a neighbor, or two robots could converge on one slot when the
// machine's step swaps the rank order mid-flight. Such a mover always
// exists (the outward-most displaced robot qualifies).
inline int settle_mover(const Staging& st, const std::vector<Vec>& pts,
                        const std::vector<int>& order, const MachineParams& p) {
  for (size_t r = 0; r < order.size(); ++r) {
    Vec target = st.slot(static_cast<int>(r));
    if (dist(pts[order[r]], target) <= slot_tolerance(p)) continue;
    double tx = st.x_of(target);
    bool safe = true;
    if (r > 0 && tx <= st.x_of(pts[order[r - 1]])) safe = false;
    if (r + 1 < order.size() && tx >= st.x_of(pts[order[r + 1]])) safe = false;
    if (safe) return static_cast<int>(r);
  }
  return -1;
}

inline bool band_settled(const Staging& st, const std::vector<Vec>& pts,
                         const std::vector<int>& order, const MachineParams& p) {
  for (size_t r = 0; r < order.size(); ++r)
    if (dist(pts[order[r]], st.slot(static_cast<int>(r))) > slot_tolerance(p))
      return false;
  return true;
}

// The outsider rule during recruitment: the crossing-free displaced band
// robot moves to its slot (slot upkeep and final approaches); otherwise the
// least-order eligible joiner travels to the approach lane under the next
// free slot and climbs.
inline Vec recruitment_rule(const std::vector<Vec>& pts, int self_index,
                            const MachineFix& fix, const Staging& st,
                            const MachineParams& p) {
  Vec me = pts[self_index];
  std::vector<int> order = st.band_order(pts, fix.members);
  if (!band_settled(st, pts, order, p)) {
    int r = settle_mover(st, pts, order, p);
    if (r < 0) return me;
    return order[r] == self_index ? st.slot(r) : me;
  }
  int next_slot = static_cast<int>(order.size());
  // a climber in the approach lane goes first
  for (size_t i = 0; i < pts.size(); ++i) {
    if (std::find(fix.members.begin(), fix.members.end(), static_cast<int>(i)) !=
        fix.members.end())
      continue;
    if (st.in_box(pts[i]) || st.in_band(pts[i])) continue;
    if (st.in_lane(pts[i], next_slot))
      return static_cast<int>(i) == self_index ? st.slot(next_slot) : me;
  }
  // otherwise the least (distance to Commander, angle) eligible joiner
  struct Key {
    double d, a;
    int idx;
  };
  std::vector<Key> joiners;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (std::find(fix.members.begin(), fix.members.end(), static_cast<int>(i)) !=
        fix.members.end())
      continue;
    if (st.in_band(pts[i]) || st.in_box(pts[i])) continue;
    double dc = dist(pts[i], fix.c);
    if (dc >= p.V / 2) continue;
    Vec rel = pts[i] - fix.c;
    double ang = std::atan2(dot(rel, fix.frame.yhat), dot(rel, fix.frame.xhat));
    joiners.push_back({dc, ang, static_cast<int>(i)});
  }
  if (joiners.empty()) return me;
  std::sort(joiners.begin(), joiners.end(), [](const Key& a, const Key& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.a < b.a;
  });
  if (joiners[0].idx != self_index) return me;
  if (joiners.size() > 1 && joiners[1].d - joiners[0].d <= p.eta &&
      std::abs(joiners[1].a - joiners[0].a) <= p.eta)
    return me;  // order ambiguity: both stay
  return st.lane_entry(static_cast<int>(order.size()));
}

inline Vec outsider_rule(const Snapshot& snap, const MachineParams& p,
                         const AreaConfig& cfg) {
  int dim = snap.points.empty() ? 2 : snap.points[0].dim();
  Vec me = Vec::zero(dim);
  std::vector<Vec> pts = snap.points;
  pts.push_back(me);
  int self_index = static_cast<int>(pts.size()) - 1;
  MachineFix fix = find_rest_machine(pts, p);
  if (!fix.found) return me;  // machine mid-step: everybody waits
  Staging st{fix.c, fix.frame, cfg, &p};
  return recruitment_rule(pts, self_index, fix, st, p);
}

inline RobotProgram make_outsider_program(AreaConfig cfg) {
  return [cfg](const Snapshot& snap, const MachineParams& p) {
    return outsider_rule(snap, p, cfg);
  };
}

// A basic-machine member program running the gathering behavior.
inline RobotProgram make_gathering_machine_program(AreaConfig cfg,
                                                   const MachineParams& params,
                                                   bool sentinel_finish = false) {
  basic::Callbacks cb = programs::to_callbacks(
      near_gathering_mobile_program(cfg, params, sentinel_finish), params, true);
  return [cb](const Snapshot& snap, const MachineParams& p) {
    return basic::robot_rule(snap, p, cb);
  };
}

// --- Pattern Formation ---------------------------------------------------------

// The pattern in canonical form: centered and sorted by descending x (ties
// by descending y). Movers take the far targets first, so straight approach
// paths never cross occupied points.
inline std::vector<Vec> canonical_pattern(const std::vector<Vec>& pattern) {
  size_t n = pattern.size();
  Vec centroid(2);
  for (const auto& q : pattern) centroid += q;
  centroid = centroid / static_cast<double>(n);
  std::vector<Vec> pts;
  for (const auto& q : pattern) pts.push_back(q - centroid);
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    if (a.x() != b.x()) return a.x() > b.x();
    return a.y() > b.y();
  });
  return pts;
}

inline double pattern_radius(const std::vector<Vec>& canon) {
  double r = 0.0;
  for (const auto& q : canon) r = std::max(r, norm(q));
  return r;
}

inline double gathering_pitch(const MachineParams& p) { return 1e-7 * p.d; }

// Embedded targets: translation from B's center, orientation from the
// staging frame, scale to fit the box. The all-coincident pattern becomes a
// micro-line along the staging direction at the gathering pitch.
inline std::vector<Vec> targets_from_frame(const std::vector<Vec>& canon,
                                           const Staging& st) {
  const MachineParams& p = *st.p;
  Vec b_center =
      st.c + (st.cfg.b_offset + st.cfg.b_len / 2) * p.d * st.frame.xhat;
  std::vector<Vec> out;
  double radius = pattern_radius(canon);
  if (radius <= 1e-9) {
    double kappa = gathering_pitch(p);
    for (size_t j = 0; j < canon.size(); ++j)
      out.push_back(b_center + (static_cast<double>(canon.size()) / 2.0 -
                                static_cast<double>(j)) *
                                   kappa * st.frame.xhat);
    return out;
  }
  double scale = (st.cfg.b_halfwidth * 0.9) * p.d / radius;
  for (const auto& q : canon)
    out.push_back(b_center +
                  scale * (q.x() * st.frame.xhat + q.y() * st.frame.yhat));
  return out;
}

// Recover the next target from the placed robots alone: try every ordered
// pair as the images of the first two canonical points and accept the direct
// similarity mapping every expected point onto a distinct placed robot.
// Unambiguous for an asymmetric pattern once three robots stand placed.
inline std::optional<Vec> fit_next_target(const std::vector<Vec>& canon,
                                          const std::vector<Vec>& placed,
                                          double match_tol) {
  size_t placed_n = placed.size();
  if (placed_n < 2 || canon.size() <= placed_n) return std::nullopt;
  Vec t0 = canon[0], t1 = canon[1];
  Vec dt = t1 - t0;
  double dt2 = norm2(dt);
  if (dt2 == 0.0) return std::nullopt;
  // Both orientations are tried (the observer's own frame may be mirrored);
  // robots stand on their targets to machine precision, so of all candidate
  // correspondences the one with the smallest residual is the real embedding.
  std::optional<Vec> best_next;
  double best_residual = match_tol;
  for (int mirror = 0; mirror < 2; ++mirror) {
    Vec dtm = mirror ? Vec(dt.x(), -dt.y()) : dt;
    for (size_t a = 0; a < placed_n; ++a) {
      for (size_t b = 0; b < placed_n; ++b) {
        if (a == b) continue;
        Vec dp = placed[b] - placed[a];
        double ax = (dp.x() * dtm.x() + dp.y() * dtm.y()) / dt2;
        double ay = (dp.y() * dtm.x() - dp.x() * dtm.y()) / dt2;
        auto apply = [&](const Vec& z) {
          Vec rel = z - t0;
          if (mirror) rel = Vec(rel.x(), -rel.y());
          return placed[a] +
                 Vec(ax * rel.x() - ay * rel.y(), ay * rel.x() + ax * rel.y());
        };
        std::vector<bool> used(placed_n, false);
        used[a] = used[b] = true;
        bool ok = true;
        double worst = 0.0;
        for (size_t i = 2; i < placed_n && ok; ++i) {
          Vec want = apply(canon[i]);
          bool matched = false;
          for (size_t j = 0; j < placed_n; ++j) {
            if (used[j]) continue;
            if (dist(placed[j], want) <= match_tol) {
              worst = std::max(worst, dist(placed[j], want));
              used[j] = true;
              matched = true;
              break;
            }
          }
          ok = matched;
        }
        if (ok && worst < best_residual) {
          best_residual = worst;
          best_next = apply(canon[placed_n]);
        }
      }
    }
  }
  return best_next;
}

// The placed gathering robots form a pitch-regular line; an approaching
// robot hovering nearby breaks the regularity, which gates the waiters.
inline bool gathering_line_ok(const std::vector<Vec>& placed,
                              const MachineParams& p) {
  if (placed.size() <= 1) return true;
  size_t lo = 0, hi = 0;
  double best = -1.0;
  for (size_t i = 0; i < placed.size(); ++i)
    for (size_t j = i + 1; j < placed.size(); ++j)
      if (dist(placed[i], placed[j]) > best) {
        best = dist(placed[i], placed[j]);
        lo = i;
        hi = j;
      }
  if (best <= 0) return false;
  Vec dir = (placed[hi] - placed[lo]) / best;
  double kappa = gathering_pitch(p);
  std::vector<double> proj;
  for (const auto& q : placed) {
    Vec rel = q - placed[lo];
    if (norm(reject(rel, dir)) > kappa / 10) return false;
    proj.push_back(dot(rel, dir));
  }
  std::sort(proj.begin(), proj.end());
  for (size_t i = 1; i < proj.size(); ++i) {
    double gap = proj[i] - proj[i - 1];
    if (gap < 0.5 * kappa || gap > 1.5 * kappa) return false;
  }
  return true;
}

// Gathering endgame: extend the placed micro-line by one pitch at the end
// nearer the reference point (movers arrive from the machine's side).
inline Vec extend_gathering_line(const std::vector<Vec>& placed,
                                 const Vec& refpt, const MachineParams& p) {
  size_t lo = 0, hi = 0;
  double best = -1.0;
  for (size_t i = 0; i < placed.size(); ++i)
    for (size_t j = i + 1; j < placed.size(); ++j)
      if (dist(placed[i], placed[j]) > best) {
        best = dist(placed[i], placed[j]);
        lo = i;
        hi = j;
      }
  Vec a = placed[lo], b = placed[hi];
  if (dist(a, refpt) > dist(b, refpt)) std::swap(a, b);
  Vec dir = best > 0 ? (a - b) / best : Vec(1, 0);
  return a + gathering_pitch(p) * dir;
}

// Scene analysis once the machine is no longer a resting triple: the placed
// cluster, the {Commander, Reference} remnant pair, loose movers.
struct Endgame {
  bool valid = false;
  std::vector<Vec> placed;
  Vec placed_centroid;
  std::vector<int> pair;   // indices into pts; empty once dissolved further
  std::vector<int> loose;  // neither placed nor in the pair
  std::vector<int> placed_idx;
};

inline Endgame analyze_endgame(const std::vector<Vec>& pts,
                               const MachineParams& p) {
  Endgame eg;
  int n = static_cast<int>(pts.size());
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    std::vector<int> stack = {i};
    label[i] = static_cast<int>(groups.size());
    std::vector<int> g;
    while (!stack.empty()) {
      int q = stack.back();
      stack.pop_back();
      g.push_back(q);
      for (int j = 0; j < n; ++j)
        if (label[j] < 0 && dist(pts[q], pts[j]) <= 0.2 * p.d) {
          label[j] = label[i];
          stack.push_back(j);
        }
    }
    groups.push_back(g);
  }
  int best = -1;
  for (size_t g = 0; g < groups.size(); ++g)
    if (groups[g].size() >= 2 &&
        (best < 0 || groups[g].size() > groups[best].size()))
      best = static_cast<int>(g);
  if (best < 0) return eg;
  Vec centroid(pts[0].dim());
  for (int i : groups[best]) centroid += pts[i];
  centroid = centroid / static_cast<double>(groups[best].size());
  for (int i : groups[best]) {
    if (dist(pts[i], centroid) > 0.2 * p.d) return eg;
    eg.placed.push_back(pts[i]);
    eg.placed_idx.push_back(i);
  }
  eg.placed_centroid = centroid;
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (std::find(eg.placed_idx.begin(), eg.placed_idx.end(), i) ==
        eg.placed_idx.end())
      rest.push_back(i);
  for (size_t a = 0; a < rest.size(); ++a)
    for (size_t b = a + 1; b < rest.size(); ++b) {
      if (std::abs(dist(pts[rest[a]], pts[rest[b]]) - p.d) > 1e-3 * p.d)
        continue;
      if (dist(pts[rest[a]], centroid) < 3.5 * p.d) continue;
      if (dist(pts[rest[b]], centroid) < 3.5 * p.d) continue;
      if (!eg.pair.empty()) return eg;  // ambiguous remnants
      eg.pair = {rest[a], rest[b]};
    }
  for (int i : rest)
    if (std::find(eg.pair.begin(), eg.pair.end(), i) == eg.pair.end())
      eg.loose.push_back(i);
  eg.valid = true;
  return eg;
}

// Staging frame reconstructed from the remnant pair: yhat from Reference to
// Commander, xhat toward the placed cluster, anchored at the Commander.
inline Staging staging_from_pair(const Vec& cpt, const Vec& rpt,
                                 const Vec& placed_centroid,
                                 const AreaConfig& cfg,
                                 const MachineParams& p) {
  basic::RestFrame f;
  f.valid = true;
  f.yhat = (cpt - rpt) / dist(cpt, rpt);
  f.xhat = normalized(reject(placed_centroid - cpt, f.yhat));
  f.r = rpt;
  f.cprime = cpt;
  return Staging{cpt, f, cfg, &p};
}

struct PatternPrograms {
  RobotProgram machine_program;
  RobotProgram outsider_program;
};

// Two-phase controller: Near-Gathering with B kept clear, then one-by-one
// placement into B. Staged robots transfer first (far targets first), then
// the machine members from the closest to the farthest (Number, Commander,
// Reference); late movers recover the embedding from the robots already
// placed.
inline PatternPrograms pattern_formation_controller(int n,
                                                    std::vector<Vec> pattern,
                                                    AreaConfig cfg,
                                                    const MachineParams& params) {
  if (n < 5) throw std::invalid_argument("ad-hoc small cases unsupported");
  if (static_cast<int>(pattern.size()) != n)
    throw std::invalid_argument("pattern size must equal n");
  cfg.n_known = n;
  std::vector<Vec> canon = canonical_pattern(pattern);
  double match_tol = 1e-5 * params.d;
  bool gathering = pattern_radius(canon) <= 1e-9;

  auto endgame_target = [canon, cfg, match_tol, gathering](
                            const std::vector<Vec>& pts, int self,
                            const MachineParams& p) -> std::optional<Vec> {
    Endgame eg = analyze_endgame(pts, p);
    if (!eg.valid) return std::nullopt;
    double settle_tol = std::min(slot_tolerance(p), gathering_pitch(p) / 4);
    if (!eg.pair.empty()) {
      int ci = eg.pair[0], ri = eg.pair[1];
      if (dist(pts[ci], eg.placed_centroid) > dist(pts[ri], eg.placed_centroid))
        std::swap(ci, ri);
      Staging st = staging_from_pair(pts[ci], pts[ri], eg.placed_centroid, cfg, p);
      auto targets = targets_from_frame(canon, st);
      // placed means exactly on a target; an arriving robot hovering near
      // the cluster is still in flight
      int placed_count = 0;
      bool self_placed = false;
      std::vector<int> loose;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (static_cast<int>(i) == ci || static_cast<int>(i) == ri) continue;
        bool on_target = false;
        for (const auto& t : targets)
          if (dist(pts[i], t) <= settle_tol) on_target = true;
        if (on_target) {
          ++placed_count;
          if (static_cast<int>(i) == self) self_placed = true;
        } else {
          loose.push_back(static_cast<int>(i));
        }
      }
      if (self_placed) return std::nullopt;
      bool self_loose =
          std::find(loose.begin(), loose.end(), self) != loose.end();
      bool my_turn = (self_loose && loose.size() == 1) ||
                     (self == ci && loose.empty());
      if (!my_turn) return std::nullopt;
      if (placed_count >= static_cast<int>(canon.size())) return std::nullopt;
      return targets[placed_count];
    }
    // Pairless scenes: the arriving robot may already sit inside the placed
    // cluster's neighborhood, so judge from the others only.
    std::vector<Vec> placed;
    bool self_in_cluster = false;
    for (int idx : eg.placed_idx) {
      if (idx == self) self_in_cluster = true;
      else placed.push_back(pts[idx]);
    }
    std::vector<int> movers = eg.loose;
    if (self_in_cluster) movers.push_back(self);
    bool self_mover =
        std::find(movers.begin(), movers.end(), self) != movers.end();
    if (!movers.empty() && !self_mover) return std::nullopt;
    if (movers.size() == 2) {
      int other = movers[0] == self ? movers[1] : movers[0];
      if (dist(pts[self], eg.placed_centroid) >=
          dist(pts[other], eg.placed_centroid))
        return std::nullopt;  // the farther robot waits its turn
    } else if (movers.size() > 2) {
      return std::nullopt;
    }
    if (movers.empty() &&
        static_cast<int>(placed.size()) != static_cast<int>(canon.size()) - 1)
      return std::nullopt;  // not yet the last robot's turn
    if (placed.size() >= canon.size()) return std::nullopt;
    if (gathering) {
      if (!gathering_line_ok(placed, p)) return std::nullopt;
      return extend_gathering_line(placed, pts[self], p);
    }
    return fit_next_target(canon, placed, match_tol);
  };

  // --- machine members ------------------------------------------------------

  basic::Callbacks hold_cb = programs::to_callbacks(
      near_gathering_mobile_program(cfg, params, /*sentinel_finish=*/true),
      params, true);

  RobotProgram machine_prog = [cfg, canon, hold_cb, endgame_target, n](
                                  const Snapshot& snap,
                                  const MachineParams& p) -> Vec {
    int dim = snap.points.empty() ? 2 : snap.points[0].dim();
    Vec me = Vec::zero(dim);
    basic::MatePartition part = basic::partition_snapshot(snap, p);
    if (part.valid) {
      basic::Roles roles = basic::identify_roles(part.pts, p.eta);
      if (roles.valid) {
        basic::PhaseState ps = basic::classify(part.pts[roles.commander],
                                               part.pts[roles.reference],
                                               part.pts[roles.number], p);
        if (ps.phase == basic::Phase::Rest && roles.number == 0) {
          // the Number leaves first, once the sentinel is up and the whole
          // staging segment has emptied into B
          basic::RestFrame f = basic::rest_frame_from_rn(
              part.pts[roles.reference], part.pts[roles.number],
              part.pts[roles.commander], p);
          NumberCodec codec(p);
          double off = basic::number_offset(f, part.pts[roles.number], p);
          bool sentinel = codec.decodable(off) && codec.decode(off) < -0.5;
          if (sentinel) {
            Staging st = staging_from_frame(f, cfg, p);
            auto targets = targets_from_frame(canon, st);
            double settle_tol =
                std::min(slot_tolerance(p), gathering_pitch(p) / 4);
            int settled = 0;
            bool others_clear = true;
            for (const auto& e : part.env) {
              bool on_target = false;
              for (const auto& t : targets)
                if (dist(e, t) <= settle_tol) on_target = true;
              if (on_target) ++settled;
              else others_clear = false;
            }
            if (others_clear && settled == n - 3) return targets[settled];
            return me;  // transfers still running or finishing
          }
        }
      }
      basic::ComponentCtx ctx;
      ctx.params = &p;
      ctx.env = part.env;
      ctx.cb = hold_cb;
      return basic::component_rule(part.pts, 0, ctx);
    }
    std::vector<Vec> pts = snap.points;
    pts.push_back(me);
    int self = static_cast<int>(pts.size()) - 1;
    auto target = endgame_target(pts, self, p);
    if (target && dist(*target, me) > p.eta) return *target;
    return me;
  };

  // --- outsiders --------------------------------------------------------------

  RobotProgram outsider_prog = [cfg, canon](const Snapshot& snap,
                                            const MachineParams& p) -> Vec {
    int dim = snap.points.empty() ? 2 : snap.points[0].dim();
    Vec me = Vec::zero(dim);
    std::vector<Vec> pts = snap.points;
    pts.push_back(me);
    int self_index = static_cast<int>(pts.size()) - 1;
    MachineFix fix = find_rest_machine(pts, p);
    if (!fix.found) return me;  // machine mid-step or dissolved: wait
    Staging st{fix.c, fix.frame, cfg, &p};

    if (fix.value >= -0.5)  // recruitment phase
      return recruitment_rule(pts, self_index, fix, st, p);

    // Formation phase. Transfers dive below the staging band (the one region
    // no slot-tracking state ever occupies), run under B, and climb into
    // their target from beneath.
    const double tol = slot_tolerance(p);
    const double dip_y = -0.3;  // in units of d
    auto grid_dist = [&](const Vec& q) {
      double x = st.x_of(q) - cfg.a_offset;
      double k = std::round(x / cfg.slot_pitch);
      return std::abs(x - k * cfg.slot_pitch) * p.d;
    };
    auto is_flyer = [&](const Vec& q) {
      if (st.in_box(q) || st.on_some_slot(q)) return false;
      double y = st.y_of(q);
      if (y >= -2 * tol / p.d) return false;
      return grid_dist(q) > 2 * tol || y < -0.06;
    };

    std::vector<Vec> boxed;
    bool self_boxed = false;
    int flyer = -1;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (std::find(fix.members.begin(), fix.members.end(),
                    static_cast<int>(i)) != fix.members.end())
        continue;
      if (st.in_box(pts[i])) {
        boxed.push_back(pts[i]);
        if (static_cast<int>(i) == self_index) self_boxed = true;
      } else if (is_flyer(pts[i])) {
        flyer = static_cast<int>(i);
      }
    }
    auto targets = targets_from_frame(canon, st);
    double settle_tol = std::min(tol, gathering_pitch(p) / 4);
    auto occupied = [&](size_t t) {
      for (const auto& q : boxed)
        if (dist(q, targets[t]) <= settle_tol) return true;
      return false;
    };
    size_t next_target = 0;
    while (next_target < targets.size() && occupied(next_target)) ++next_target;
    int unsettled_boxed = 0;
    for (const auto& q : boxed) {
      bool hit = false;
      for (size_t i = 0; i < boxed.size() && !hit; ++i)
        if (dist(q, targets[i]) <= settle_tol) hit = true;
      if (!hit) ++unsettled_boxed;
    }

    if (self_boxed) {
      bool self_settled = false;
      for (size_t i = 0; i < boxed.size() && !self_settled; ++i)
        if (dist(me, targets[i]) <= settle_tol) self_settled = true;
      if (self_settled) return me;
      if (flyer < 0 && unsettled_boxed == 1 && next_target < targets.size())
        return targets[next_target];
      return me;
    }
    if (flyer >= 0) {
      if (flyer != self_index || next_target >= targets.size()) return me;
      // my flight: descend below the band, run under B, climb the column
      Vec t = targets[next_target];
      double tx = st.x_of(t);
      if (std::abs(st.x_of(me) - tx) <= tol / p.d) return t;  // the climb
      double y = st.y_of(me);
      if (y > dip_y + 0.01) {
        // descending leg: straight down (sidestep while still on a column)
        double col = st.x_of(me);
        if (grid_dist(me) < cfg.slot_pitch / 8)
          col += cfg.slot_pitch / 2;
        return fix.c + (col * p.d) * fix.frame.xhat +
               (dip_y * p.d) * fix.frame.yhat;
      }
      return fix.c + (tx * p.d) * fix.frame.xhat +
             (dip_y * p.d) * fix.frame.yhat;
    }
    if (unsettled_boxed > 0) return me;  // a placement is finishing above
    // the staging band must be settled before the next launch
    std::vector<int> order = st.band_order(pts, fix.members);
    if (!band_settled(st, pts, order, p)) {
      int r = settle_mover(st, pts, order, p);
      if (r < 0) return me;
      return order[r] == self_index ? st.slot(r) : me;
    }
    if (order.empty()) return me;  // machine members take over
    int mover = order.back();
    if (mover != self_index) return me;
    // launch: a diagonal toward the dip, immediately distinguishable from
    // every slot-tracking state
    return me + (cfg.slot_pitch / 2 * p.d) * fix.frame.xhat +
           (dip_y * p.d - st.y_of(me) * p.d) * fix.frame.yhat;
  };

  return {machine_prog, outsider_prog};
}

}  // namespace tmob::apps
