#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tmob/geom.hpp"
#include "tmob/params.hpp"
#include "tmob/trace.hpp"

namespace tmob {

// One robot's view of the world: the other visible robots mapped into its
// local frame, self excluded (it sits at the origin by definition). Carries
// no identity information; points are kept in canonical (sorted) order so
// equal multisets compare equal.
struct Snapshot {
  std::vector<Vec> points;
  uint64_t taken_at = 0;
};

// The oblivious rule: destination in the robot's local frame, computed from
// the snapshot alone. Must be a pure function.
using RobotProgram = std::function<Vec(const Snapshot&, const MachineParams&)>;

enum class Activity { Idle, HasSnapshot, Moving };

struct RobotState {
  int id = 0;
  Vec position;
  Frame frame;        // fixed for the run
  double visibility = 0.0;
  std::shared_ptr<const RobotProgram> program;
  Activity activity = Activity::Idle;
  Snapshot pending;   // valid while HasSnapshot
  Vec destination;    // global; valid while Moving
};

struct WorldState {
  std::vector<RobotState> robots;
  MachineParams params;
  Trace trace;

  uint64_t clock() const { return trace.size(); }

  int index_of(int id) const {
    for (size_t i = 0; i < robots.size(); ++i)
      if (robots[i].id == id) return static_cast<int>(i);
    return -1;
  }

  const RobotState& robot(int id) const {
    int i = index_of(id);
    if (i < 0) throw std::invalid_argument("unknown robot");
    return robots[i];
  }

  // Robot with a recorded snapshot awaiting its compute step, or -1.
  int pending_compute() const {
    for (const auto& r : robots)
      if (r.activity == Activity::HasSnapshot) return r.id;
    return -1;
  }

  // No robot is in flight toward a point materially different from where it
  // stands ("not moving anywhere", null moves allowed).
  bool quiescent(double eta) const {
    for (const auto& r : robots) {
      if (r.activity == Activity::HasSnapshot) return false;
      if (r.activity == Activity::Moving &&
          dist(r.position, r.destination) > eta)
        return false;
    }
    return true;
  }
};

struct Decision {
  enum class Kind { Look, MoveProgress };
  Kind kind = Kind::Look;
  int robot = -1;          // robot < 0 halts the run (scripted exhaustion)
  double travel = -1.0;    // MoveProgress: requested travel; < 0 = complete
};

inline Snapshot take_snapshot(const WorldState& world, int id) {
  const RobotState& self = world.robot(id);
  if (self.activity != Activity::Idle)
    throw std::logic_error("snapshot requires an idle robot");
  Snapshot snap;
  snap.taken_at = world.clock();
  for (const auto& other : world.robots) {
    if (other.id == id) continue;
    if (dist(other.position, self.position) <= self.visibility)
      snap.points.push_back(self.frame.to_local_from(self.position, other.position));
  }
  std::sort(snap.points.begin(), snap.points.end());
  return snap;
}

// Runs the robot's program on its recorded snapshot; appends the Compute
// event and arms the move. Called by the run loop immediately after a Look,
// so the look/compute pair is atomic from the scheduler's point of view.
inline void compute_step(WorldState& world, int id) {
  int i = world.index_of(id);
  if (i < 0) throw std::invalid_argument("unknown robot");
  RobotState& r = world.robots[i];
  if (r.activity != Activity::HasSnapshot)
    throw std::logic_error("no pending snapshot");
  Vec local = (*r.program)(r.pending, world.params);
  if (!local.finite() || local.dim() != r.position.dim())
    throw std::runtime_error("program produced an invalid destination");
  Vec dest = r.frame.to_world_from(r.position, local);
  world.trace.append({world.clock(), r.id, EventKind::Compute, dest, false});
  r.destination = dest;
  r.activity = Activity::Moving;
  r.pending = Snapshot{};
}

// Applies one scheduler decision; appends exactly one trace event. Illegal
// stop points are rejected rather than trusted: the engine polices the
// delta-contract, not the adversary.
inline void advance(WorldState& world, const Decision& d) {
  int i = world.index_of(d.robot);
  if (i < 0) throw std::invalid_argument("unknown robot");
  RobotState& r = world.robots[i];
  switch (d.kind) {
    case Decision::Kind::Look: {
      if (r.activity != Activity::Idle)
        throw std::logic_error("look requires an idle robot");
      Snapshot snap = take_snapshot(world, d.robot);
      world.trace.append({world.clock(), r.id, EventKind::Look, r.position, false});
      r.pending = std::move(snap);
      r.activity = Activity::HasSnapshot;
      break;
    }
    case Decision::Kind::MoveProgress: {
      if (r.activity != Activity::Moving)
        throw std::logic_error("move progress requires a moving robot");
      double len = dist(r.position, r.destination);
      bool interrupted = false;
      if (len <= world.params.delta || d.travel < 0.0 || d.travel >= len) {
        // destination closer than delta must be reached; likewise a full move
        r.position = r.destination;
      } else {
        if (d.travel + 1e-15 * len < world.params.delta)
          throw std::runtime_error("unfair scheduler decision");
        Vec dir = (r.destination - r.position) / len;
        r.position += d.travel * dir;
        interrupted = true;
      }
      world.trace.append(
          {world.clock(), r.id, EventKind::MoveEnd, r.position, interrupted});
      r.activity = Activity::Idle;
      break;
    }
  }
}

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual Decision next(const WorldState& world) = 0;
};

// Observers notified as the run unfolds. Position-dependent checks only need
// MoveEnd events (nothing relocates otherwise).
class Monitor {
 public:
  virtual ~Monitor() = default;
  virtual void on_start(const WorldState&) {}
  virtual void on_move_end(const WorldState&, const TraceEvent&) {}
  virtual void on_decision(const WorldState&, const Decision&) {}
};

using StopCondition = std::function<bool(const WorldState&)>;

inline uint64_t default_fairness_bound(size_t robot_count) {
  return 8 * static_cast<uint64_t>(robot_count);
}

// Drives the world until the stop condition fires or the trace reaches
// max_events. Deterministic given the scheduler's seed.
inline void run(WorldState& world, Scheduler& sched, const StopCondition& stop,
                uint64_t max_events, const std::vector<Monitor*>& monitors = {}) {
  for (auto* m : monitors) m->on_start(world);
  if (world.robots.empty()) return;
  while (world.trace.size() < max_events) {
    if (int pending = world.pending_compute(); pending >= 0) {
      compute_step(world, pending);
      continue;
    }
    if (stop && stop(world)) break;
    Decision d = sched.next(world);
    if (d.robot < 0) break;
    for (auto* m : monitors) m->on_decision(world, d);
    advance(world, d);
    const TraceEvent& last = world.trace.events.back();
    if (last.kind == EventKind::MoveEnd)
      for (auto* m : monitors) m->on_move_end(world, last);
  }
}

}  // namespace tmob
