#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tmob/basic_mobile.hpp"
#include "tmob/codec.hpp"
#include "tmob/monitors.hpp"
#include "tmob/programs.hpp"
#include "tmob/rng.hpp"
#include "tmob/schedulers.hpp"
#include "tmob/world.hpp"

// World construction and the fuzzing drivers built on top of the engine.

namespace tmob::harness {

struct FramePose {
  double rotation = 0.0;
  bool reflect = false;
};

inline Frame pose_frame(const Vec& origin, const FramePose& fp) {
  return Frame::planar(origin, fp.rotation, fp.reflect);
}

// Places a basic machine at rest: Reference at `anchor`, number line along
// `orient`, stored value encoded on QQ'. Returns the robot ids (C, R, N).
struct BasicMachineSpec {
  Vec anchor = Vec(0, 0);
  double orient = 0.0;
  double initial_value = 0.0;
  std::array<FramePose, 3> frames = {};  // local frames for C, R, N
};

inline std::array<int, 3> add_basic_machine(WorldState& w,
                                            const BasicMachineSpec& spec,
                                            const basic::Callbacks& cb) {
  const MachineParams& p = w.params;
  NumberCodec codec(p);
  Vec xhat(std::cos(spec.orient), std::sin(spec.orient));
  Vec yhat(-std::sin(spec.orient), std::cos(spec.orient));
  Vec r_pos = spec.anchor;
  Vec c_pos = spec.anchor + p.d * yhat;
  Vec n_pos =
      spec.anchor + (2 * p.d - p.lambda / 2 + codec.encode(spec.initial_value)) * xhat;
  auto program = std::make_shared<const RobotProgram>(
      [cb](const Snapshot& s, const MachineParams& params) {
        return basic::robot_rule(s, params, cb);
      });
  int base = static_cast<int>(w.robots.size());
  std::array<Vec, 3> pos = {c_pos, r_pos, n_pos};
  std::array<int, 3> ids{};
  for (int i = 0; i < 3; ++i) {
    RobotState rs;
    rs.id = base + i;
    rs.position = pos[i];
    rs.frame = pose_frame(pos[i], spec.frames[i]);
    rs.visibility = p.machine_visibility();
    rs.program = program;
    w.robots.push_back(std::move(rs));
    ids[i] = base + i;
  }
  return ids;
}

inline RobotState make_outsider(int id, const Vec& pos, const FramePose& fp,
                                double visibility,
                                std::shared_ptr<const RobotProgram> program) {
  RobotState rs;
  rs.id = id;
  rs.position = pos;
  rs.frame = pose_frame(pos, fp);
  rs.visibility = visibility;
  rs.program = std::move(program);
  return rs;
}

// --- Lemma-3 macro-step fuzzing ---------------------------------------------

struct TrialConfig {
  uint64_t seed = 0;
  int macro_steps = 30;
  bool boundary_hunting = true;
  MachineParams params;
  uint64_t max_events_per_step = 200000;
};

struct TrialReport {
  bool ok = true;
  std::string reason;
  int steps_done = 0;
  uint64_t events = 0;
  std::vector<Decision> decisions;  // reproduction script on failure
};

// One independent run of a basic machine under the adversarial scheduler,
// checked against the macro-step contract: each step translates C and R by
// mu in the chosen direction, keeps the machine axes, and applies f to the
// stored value.
inline TrialReport run_lemma3_trial(const TrialConfig& cfg) {
  TrialReport rep;
  Rng setup(cfg.seed * 0x9E3779B97F4A7C15ull + 1);
  WorldState w;
  w.params = cfg.params;

  BasicMachineSpec spec;
  spec.anchor = Vec(setup.uniform(-2, 2), setup.uniform(-2, 2));
  spec.orient = setup.uniform(0, 6.283185307179586);
  long long counter0 = static_cast<long long>(setup.next_below(400));
  spec.initial_value = static_cast<double>(counter0);
  for (auto& f : spec.frames)
    f = {setup.uniform(0, 6.283185307179586), setup.coin()};

  basic::Callbacks cb =
      programs::to_callbacks(programs::exploration_program(), w.params, true);
  auto ids = add_basic_machine(w, spec, cb);

  CollisionMonitor collisions;
  BasicMachineMonitor machine(ids, cb);

  AsyncOptions opts;
  opts.boundary_hunting = cfg.boundary_hunting;
  AsyncAdversarialScheduler inner(cfg.seed);
  AsyncAdversarialScheduler hunting(cfg.seed, opts);
  Scheduler& sched = cfg.boundary_hunting ? static_cast<Scheduler&>(hunting)
                                          : static_cast<Scheduler&>(inner);
  RecordingScheduler rec(sched);

  int want = cfg.macro_steps;
  StopCondition stop = [&](const WorldState&) {
    return static_cast<int>(machine.macro_steps().size()) >= want;
  };
  uint64_t cap = cfg.max_events_per_step * static_cast<uint64_t>(want);
  run(w, rec, stop, cap, {&collisions, &machine});

  rep.events = w.trace.size();
  rep.steps_done = static_cast<int>(machine.macro_steps().size());

  auto fail = [&](const std::string& why) {
    rep.ok = false;
    rep.reason = why;
    rep.decisions = rec.log();
  };

  if (!collisions.hits().empty()) {
    fail("collision at event " + std::to_string(collisions.hits()[0].event));
    return rep;
  }
  if (!machine.violations().empty()) {
    fail(machine.violations()[0]);
    return rep;
  }
  if (rep.steps_done < want) {
    fail("stalled after " + std::to_string(rep.steps_done) + " macro-steps");
    return rep;
  }

  NumberCodec codec(w.params);
  const MachineParams& p = w.params;
  for (int k = 0; k < want; ++k) {
    const auto& st = machine.macro_steps()[k];
    long long n = counter0 + k;
    int expect_dir = programs::spiral_direction(n);
    if (st.dir != expect_dir) {
      fail("step " + std::to_string(k) + ": direction " + std::to_string(st.dir) +
           " != spiral " + std::to_string(expect_dir));
      return rep;
    }
    basic::RestFrame f;
    f.valid = true;
    f.r = st.from[1];
    f.xhat = st.xhat_from;
    f.yhat = st.yhat_from;
    f.cprime = st.from[1] + p.d * st.yhat_from;
    Vec u = basic::direction_set(f, {})[st.dir].u;
    if (dist(st.to[0] - st.from[0], p.mu * u) > 1e-7 ||
        dist(st.to[1] - st.from[1], p.mu * u) > 1e-7) {
      fail("step " + std::to_string(k) + ": translation off");
      return rep;
    }
    if (dist(st.xhat_to, st.xhat_from) > 1e-9 ||
        dist(st.yhat_to, st.yhat_from) > 1e-9) {
      fail("step " + std::to_string(k) + ": machine axes drifted");
      return rep;
    }
    double r_old = codec.decode(st.offset_from);
    double r_new = codec.decode(st.offset_to);
    double expect = std::round(r_old) + 1.0;
    if (std::abs(r_new - expect) > 1e-6 * (1 + expect * expect)) {
      fail("step " + std::to_string(k) + ": stored value off by " +
           std::to_string(r_new - expect));
      return rep;
    }
  }
  return rep;
}

}  // namespace tmob::harness
