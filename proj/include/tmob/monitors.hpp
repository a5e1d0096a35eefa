#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmob/basic_mobile.hpp"
#include "tmob/world.hpp"

namespace tmob {

// Robots are points and the engine never blocks contact; this watches for it.
class CollisionMonitor : public Monitor {
 public:
  struct Hit {
    uint64_t event;
    int a, b;
    double distance;
  };

  void on_start(const WorldState& w) override { check(w); }
  void on_move_end(const WorldState& w, const TraceEvent&) override { check(w); }

  const std::vector<Hit>& hits() const { return hits_; }
  double min_pairwise() const { return min_seen_; }

 private:
  void check(const WorldState& w) {
    for (size_t i = 0; i < w.robots.size(); ++i)
      for (size_t j = i + 1; j < w.robots.size(); ++j) {
        double d = dist(w.robots[i].position, w.robots[j].position);
        if (d < min_seen_) min_seen_ = d;
        if (d <= w.params.eta)
          hits_.push_back({w.clock(), w.robots[i].id, w.robots[j].id, d});
      }
  }

  std::vector<Hit> hits_;
  double min_seen_ = 1e308;
};

// Verifies the advertised fairness bound: in any window of F consecutive
// scheduler decisions every robot is scheduled at least once.
class FairnessMonitor : public Monitor {
 public:
  explicit FairnessMonitor(uint64_t bound) : bound_(bound) {}

  void on_decision(const WorldState& w, const Decision& d) override {
    if (last_.size() != w.robots.size()) last_.assign(w.robots.size(), 0);
    ++count_;
    for (size_t i = 0; i < last_.size(); ++i)
      if (count_ - last_[i] > bound_) ++violations_;
    int idx = w.index_of(d.robot);
    if (idx >= 0) last_[idx] = count_;
  }

  uint64_t violations() const { return violations_; }

 private:
  uint64_t bound_;
  uint64_t count_ = 0;
  uint64_t violations_ = 0;
  std::vector<uint64_t> last_;
};

// Tracks one basic component through its macro-steps: detects rests, records
// per-step translations and stored offsets, and checks the single-mover and
// role-stability properties at every relocation.
class BasicMachineMonitor : public Monitor {
 public:
  struct MacroStep {
    std::array<Vec, 3> from;  // C, R, N at the previous rest
    std::array<Vec, 3> to;    // C, R, N at this rest
    Vec xhat_from, yhat_from, xhat_to, yhat_to;
    double offset_from = 0, offset_to = 0;
    int dir = -1;  // canonical direction index snapped from the C translation
  };

  BasicMachineMonitor(std::array<int, 3> ids /* C, R, N */,
                      basic::Callbacks cb)
      : ids_(ids), cb_(std::move(cb)) {}

  void on_start(const WorldState& w) override { scan(w); }
  void on_move_end(const WorldState& w, const TraceEvent&) override { scan(w); }

  const std::vector<MacroStep>& macro_steps() const { return steps_; }
  const std::vector<std::string>& violations() const { return violations_; }
  bool at_rest() const { return have_rest_; }

 private:
  std::array<Vec, 3> positions(const WorldState& w) const {
    return {w.robot(ids_[0]).position, w.robot(ids_[1]).position,
            w.robot(ids_[2]).position};
  }

  bool machine_quiescent(const WorldState& w) const {
    for (int id : ids_) {
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
    std::array<Vec, 3> pos = positions(w);

    // environment = every non-machine robot position (shared global view)
    basic::ComponentCtx ctx;
    ctx.params = &p;
    ctx.cb = cb_;
    for (const auto& r : w.robots)
      if (r.id != ids_[0] && r.id != ids_[1] && r.id != ids_[2])
        ctx.env.push_back(r.position);

    // single mover: at most one rule output differs from its own position
    int movers = 0;
    for (int i = 0; i < 3; ++i)
      if (dist(basic::component_rule(pos, i, ctx), pos[i]) > p.eta) ++movers;
    if (movers > 1)
      violations_.push_back("single-mover violated at event " +
                            std::to_string(w.clock()));

    // role stability within a macro-step
    basic::Roles roles = basic::identify_roles(pos, p.eta);
    if (!roles.valid) {
      violations_.push_back("role ambiguity at event " + std::to_string(w.clock()));
      return;
    }
    if (roles.commander != 0 || roles.reference != 1 || roles.number != 2)
      violations_.push_back("role assignment changed at event " +
                            std::to_string(w.clock()));

    basic::PhaseState ps = basic::classify(pos[0], pos[1], pos[2], p);
    if (ps.phase == basic::Phase::Invalid)
      violations_.push_back("invalid classification at event " +
                            std::to_string(w.clock()));

    if (ps.phase != basic::Phase::Rest || !machine_quiescent(w)) return;

    basic::RestFrame f = basic::rest_frame_from_rn(pos[1], pos[2], pos[0], p);
    if (!f.valid) return;
    if (!have_rest_) {
      have_rest_ = true;
      rest_pos_ = pos;
      rest_frame_ = f;
      return;
    }
    double moved = dist(pos[0], rest_pos_[0]);
    if (moved < p.mu / 2) return;  // same rest (or a held machine)

    MacroStep st;
    st.from = rest_pos_;
    st.to = pos;
    st.xhat_from = rest_frame_.xhat;
    st.yhat_from = rest_frame_.yhat;
    st.xhat_to = f.xhat;
    st.yhat_to = f.yhat;
    st.offset_from = basic::number_offset(rest_frame_, rest_pos_[2], p);
    st.offset_to = basic::number_offset(f, pos[2], p);
    Vec step = pos[0] - rest_pos_[0];
    auto ds = basic::direction_set(rest_frame_, geo_);
    double best = -2.0;
    for (size_t i = 0; i < ds.size(); ++i) {
      double score = dot(normalized(step), ds[i].u);
      if (score > best) {
        best = score;
        st.dir = static_cast<int>(i);
      }
    }
    steps_.push_back(st);
    rest_pos_ = pos;
    rest_frame_ = f;
  }

  std::array<int, 3> ids_;
  basic::Callbacks cb_;
  basic::GeoCtx geo_;
  bool have_rest_ = false;
  std::array<Vec, 3> rest_pos_;
  basic::RestFrame rest_frame_;
  std::vector<MacroStep> steps_;
  std::vector<std::string> violations_;
};

}  // namespace tmob
