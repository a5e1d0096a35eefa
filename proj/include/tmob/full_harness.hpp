#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tmob/codec.hpp"
#include "tmob/full_mobile.hpp"
#include "tmob/harness.hpp"
#include "tmob/monitors.hpp"
#include "tmob/world.hpp"

// Construction and instrumentation for complete machines.

namespace tmob::harness {

struct FullMobileSpec {
  int m = 2;
  int k = 0;
  Vec anchor = Vec(0, 0);               // leader component's Reference
  std::vector<double> initial_values;    // per component; defaults to zeros
  uint64_t frame_seed = 0;               // randomizes planar robot frames
};

// Lays out m+k components at rest: 2+k in-plane at pitch s along the first
// axis, m-2 orthogonal copies of the leader's component along the remaining
// axes. Robots: 3(m+k). Returns per-component ids in layout order (C, R, N).
inline std::vector<std::array<int, 3>> add_full_mobile(
    WorldState& w, const FullMobileSpec& spec, const full::FullProgram& prog) {
  const MachineParams& p = w.params;
  p.validate();
  if (spec.m < 2 || spec.k < 0 || spec.m > kMaxDim)
    throw std::invalid_argument("bad machine dimensions");
  int dim = std::max(2, spec.m);
  int ncomp = spec.m + spec.k;
  NumberCodec codec(p);
  Rng frames(spec.frame_seed * 0x2545F4914F6CDD1Dull + 7);

  auto program = std::make_shared<const RobotProgram>(
      [prog](const Snapshot& s, const MachineParams& params) {
        return full::lockstep_rule(s, params, prog);
      });

  std::vector<std::array<int, 3>> out;
  for (int c = 0; c < ncomp; ++c) {
    Vec base = spec.anchor;
    bool inplane = c < 2 + spec.k;
    if (inplane) {
      base += (c * p.s) * Vec::axis(dim, 0);
    } else {
      base += p.s * Vec::axis(dim, 2 + (c - (2 + spec.k)));
    }
    double value =
        c < static_cast<int>(spec.initial_values.size()) ? spec.initial_values[c] : 0.0;
    Vec c_pos = base + p.d * Vec::axis(dim, 1);
    Vec r_pos = base;
    Vec n_pos = base + (2 * p.d - p.lambda / 2 + codec.encode(value)) * Vec::axis(dim, 0);
    std::array<Vec, 3> pos = {c_pos, r_pos, n_pos};
    std::array<int, 3> ids{};
    for (int i = 0; i < 3; ++i) {
      RobotState rs;
      rs.id = static_cast<int>(w.robots.size());
      rs.position = pos[i];
      if (dim == 2 && spec.frame_seed) {
        rs.frame = Frame::planar(pos[i], frames.uniform(0, 6.283185307179586),
                                 frames.coin());
      } else {
        rs.frame = Frame::identity(dim);
        rs.frame.origin = pos[i];
      }
      rs.visibility = p.machine_visibility();
      rs.program = program;
      ids[i] = rs.id;
      w.robots.push_back(std::move(rs));
    }
    out.push_back(ids);
  }
  return out;
}

// Watches a complete machine: lockstep label spread, per-component phase
// validity, all-rest detection with decoded values and recovered axes.
class FullMachineMonitor : public Monitor {
 public:
  struct RestRecord {
    std::vector<std::array<Vec, 3>> comps;  // C, R, N per component
    std::vector<double> values;             // decoded, in layout order
    std::vector<double> registers;          // the Register-roled subset
    Vec sim_target;                         // pending destination rel. Leader
    Vec xhat, yhat;
    std::vector<Vec> orth_axes;
    Vec leader_cprime;
    int dir_from_prev = -1;  // direction-token index of the step that led here
  };

  explicit FullMachineMonitor(std::vector<std::array<int, 3>> ids)
      : ids_(std::move(ids)) {}

  void on_start(const WorldState& w) override { scan(w); }
  void on_move_end(const WorldState& w, const TraceEvent&) override { scan(w); }

  const std::vector<RestRecord>& rests() const { return rests_; }
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  bool machine_quiescent(const WorldState& w) const {
    for (const auto& comp : ids_)
      for (int id : comp) {
        const RobotState& r = w.robot(id);
        if (r.activity == Activity::HasSnapshot) return false;
        if (r.activity == Activity::Moving &&
            dist(r.position, r.destination) > w.params.eta)
          return false;
      }
    return true;
  }

  void scan(const WorldState& w) {
    const MachineParams& p = w.params;
    std::vector<Vec> pts;
    for (const auto& comp : ids_)
      for (int id : comp) pts.push_back(w.robot(id).position);
    full::LayoutView lv = full::identify_layout(pts, p);
    if (!lv.valid) {
      violations_.push_back("layout unreadable at event " +
                            std::to_string(w.clock()));
      return;
    }
    // lockstep: labels cluster on at most two cyclically adjacent values
    std::vector<int> labels;
    for (const auto& cv : lv.comps) {
      basic::Label lb = basic::label_of(cv.state.phase);
      if (lb == basic::Label::Invalid) {
        violations_.push_back("invalid component state at event " +
                              std::to_string(w.clock()));
        return;
      }
      labels.push_back(static_cast<int>(lb));
    }
    int lo = *std::min_element(labels.begin(), labels.end());
    int hi = *std::max_element(labels.begin(), labels.end());
    bool ok = lo == hi;
    if (!ok) {
      // exactly two distinct values, adjacent in the cyclic phase order
      bool two = true;
      for (int l : labels)
        if (l != lo && l != hi) two = false;
      ok = two && (hi - lo == 1 || (lo == 0 && hi == 5));
    }
    if (!ok)
      violations_.push_back("lockstep spread >1 at event " +
                            std::to_string(w.clock()));

    bool all_rest = true;
    for (const auto& cv : lv.comps)
      if (cv.state.phase != basic::Phase::Rest) all_rest = false;
    if (!all_rest || !machine_quiescent(w)) return;

    auto vals = full::decoded_values(lv, p);
    if (!vals) return;
    Vec leader_c = lv.comps[0].pts[0];
    if (!rests_.empty()) {
      double moved = dist(leader_c, last_leader_c_);
      if (moved < p.mu / 2) return;
    }
    RestRecord rec;
    for (const auto& cv : lv.comps) rec.comps.push_back(cv.pts);
    rec.values = *vals;
    rec.sim_target = full::sim_target(lv, *vals);
    for (size_t c = 0; c < lv.comps.size(); ++c)
      if (lv.comps[c].var.kind == full::VariableRole::Kind::Register)
        rec.registers.push_back((*vals)[c]);
    rec.xhat = lv.xhat;
    rec.yhat = lv.yhat;
    rec.orth_axes = lv.orth_axes;
    rec.leader_cprime = lv.leader_cprime;
    if (!rests_.empty()) {
      Vec step = leader_c - last_leader_c_;
      auto dirs = full::direction_vectors(lv);
      double best = -2.0;
      for (size_t i = 0; i < dirs.size(); ++i) {
        double sc = dot(normalized(step), dirs[i]);
        if (sc > best) {
          best = sc;
          rec.dir_from_prev = static_cast<int>(i);
        }
      }
    }
    rests_.push_back(rec);
    last_leader_c_ = leader_c;
  }

  std::vector<std::array<int, 3>> ids_;
  std::vector<RestRecord> rests_;
  std::vector<std::string> violations_;
  Vec last_leader_c_;
};

// --- the rigid-robot oracle ----------------------------------------------------

struct DirectStep {
  Vec pos_before;
  Vec reldest;
  std::vector<double> regs_after;
};

// Executes the simulated program directly as a rigid robot with k registers:
// the reference behavior the machine must reproduce. Environment points are
// world-frame; the identity orientation matches add_full_mobile's layout.
inline std::vector<DirectStep> run_rigid_direct(const full::SimProgram& sim,
                                                Vec start,
                                                const std::vector<Vec>& env,
                                                const MachineParams& p,
                                                int steps) {
  std::vector<DirectStep> out;
  Vec pos = start;
  std::vector<double> regs(sim.registers, 0.0);
  for (int t = 0; t < steps; ++t) {
    std::vector<Vec> snap;
    snap.push_back(Vec::zero(pos.dim()));
    for (const auto& e : env)
      if (dist(e, pos) <= p.V) snap.push_back(e - pos);
    std::sort(snap.begin(), snap.end());
    auto [rel, regs2] = sim.step(snap, regs);
    out.push_back({pos, rel, regs2});
    pos += rel;
    regs = regs2;
  }
  return out;
}

}  // namespace tmob::harness
