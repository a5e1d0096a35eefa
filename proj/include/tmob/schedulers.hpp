#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmob/rng.hpp"
#include "tmob/world.hpp"

namespace tmob {

// Fully synchronous: all robots look from the same configuration, then all
// moves run to completion.
class FsyncScheduler : public Scheduler {
 public:
  Decision next(const WorldState& world) override {
    if (queue_.empty()) refill(world);
    if (queue_.empty()) return {Decision::Kind::Look, -1, -1.0};
    Decision d = queue_.front();
    queue_.pop_front();
    return d;
  }

 protected:
  virtual void refill(const WorldState& world) {
    bool all_idle = true;
    for (const auto& r : world.robots)
      if (r.activity != Activity::Idle) all_idle = false;
    if (all_idle) {
      for (const auto& r : world.robots)
        queue_.push_back({Decision::Kind::Look, r.id, -1.0});
    } else {
      for (const auto& r : world.robots)
        if (r.activity == Activity::Moving)
          queue_.push_back({Decision::Kind::MoveProgress, r.id, -1.0});
    }
  }

  std::deque<Decision> queue_;
};

// Semi-synchronous: a seeded nonempty subset is activated each round; moves
// are rigid.
class SsyncScheduler : public Scheduler {
 public:
  explicit SsyncScheduler(uint64_t seed) : rng_(seed) {}

  Decision next(const WorldState& world) override {
    if (queue_.empty()) refill(world);
    if (queue_.empty()) return {Decision::Kind::Look, -1, -1.0};
    Decision d = queue_.front();
    queue_.pop_front();
    return d;
  }

 private:
  void refill(const WorldState& world) {
    bool all_idle = true;
    for (const auto& r : world.robots)
      if (r.activity != Activity::Idle) all_idle = false;
    if (all_idle) {
      std::vector<int> chosen;
      for (const auto& r : world.robots)
        if (rng_.coin()) chosen.push_back(r.id);
      if (chosen.empty() && !world.robots.empty()) {
        chosen.push_back(
            world.robots[rng_.next_below(world.robots.size())].id);
      }
      for (int id : chosen) queue_.push_back({Decision::Kind::Look, id, -1.0});
    } else {
      for (const auto& r : world.robots)
        if (r.activity == Activity::Moving)
          queue_.push_back({Decision::Kind::MoveProgress, r.id, -1.0});
    }
  }

  Rng rng_;
  std::deque<Decision> queue_;
};

// The adversary used for fuzzing: seeded robot choice subject to a hard
// fairness bound (every robot is scheduled at least once in any window of
// F decisions) and seeded stop points. Boundary hunting biases stop points
// toward the places where classifier guards flip: just past the minimum
// legal travel and within ~10*eta of the destination.
struct AsyncOptions {
  uint64_t fairness_bound = 0;  // 0: 8 * robot count
  bool boundary_hunting = false;
  // Robots whose looks are batched whenever all of them are idle, so they
  // observe the same configuration (the synchronous-Commanders mode).
  std::vector<int> sync_group;
};

class AsyncAdversarialScheduler : public Scheduler {
 public:
  explicit AsyncAdversarialScheduler(uint64_t seed, AsyncOptions opt = {})
      : rng_(seed), opt_(std::move(opt)) {}

  Decision next(const WorldState& world) override {
    if (!forced_.empty()) {
      Decision d = forced_.front();
      forced_.pop_front();
      note_scheduled(world, d.robot);
      return finish(world, d);
    }
    if (!opt_.sync_group.empty()) {
      if (sync_group_ready(world)) {
        if (sync_armed_) {
          sync_armed_ = false;
          for (int id : opt_.sync_group)
            forced_.push_back({Decision::Kind::Look, id, -1.0});
          return next(world);
        }
      } else {
        sync_armed_ = true;
      }
    }
    uint64_t fb = opt_.fairness_bound
                      ? opt_.fairness_bound
                      : default_fairness_bound(world.robots.size());
    ensure_tracking(world);
    // Fairness: several robots can approach starvation together, so force a
    // robot while there is still room to drain the whole backlog inside F.
    int starved = -1;
    uint64_t worst = 0;
    for (size_t i = 0; i < world.robots.size(); ++i) {
      uint64_t gap = decisions_ - last_[i];
      if (gap + 1 + world.robots.size() >= fb && gap >= worst) {
        worst = gap;
        starved = static_cast<int>(i);
      }
    }
    int idx = starved >= 0
                  ? starved
                  : static_cast<int>(rng_.next_below(world.robots.size()));
    const RobotState& r = world.robots[idx];
    note_scheduled(world, r.id);
    Decision d;
    d.robot = r.id;
    d.kind = r.activity == Activity::Moving ? Decision::Kind::MoveProgress
                                            : Decision::Kind::Look;
    return finish(world, d);
  }

 private:
  Decision finish(const WorldState& world, Decision d) {
    if (d.kind != Decision::Kind::MoveProgress) return d;
    const RobotState& r = world.robot(d.robot);
    double len = dist(r.position, r.destination);
    double delta = world.params.delta;
    if (len <= delta) {
      d.travel = -1.0;
      return d;
    }
    double eta = world.params.eta;
    if (opt_.boundary_hunting && rng_.coin()) {
      double cand[4] = {delta, delta + 10.0 * eta, len - 10.0 * eta, len};
      double t = cand[rng_.next_below(4)];
      d.travel = (t >= delta && t <= len) ? t : len;
    } else {
      d.travel = rng_.uniform(delta, len);
    }
    // A stop within 2*eta of the destination is indistinguishable from
    // arrival at the model's tolerance; issue the arrival.
    if (len - d.travel < 2.0 * eta) d.travel = -1.0;
    return d;
  }

  bool sync_group_ready(const WorldState& world) {
    for (int id : opt_.sync_group) {
      int i = world.index_of(id);
      if (i < 0 || world.robots[i].activity != Activity::Idle) return false;
    }
    return true;
  }

  void ensure_tracking(const WorldState& world) {
    if (last_.size() != world.robots.size())
      last_.assign(world.robots.size(), decisions_);
  }

  void note_scheduled(const WorldState& world, int id) {
    ensure_tracking(world);
    ++decisions_;
    int i = world.index_of(id);
    if (i >= 0) last_[i] = decisions_;
  }

  Rng rng_;
  AsyncOptions opt_;
  std::deque<Decision> forced_;
  bool sync_armed_ = true;
  std::vector<uint64_t> last_;
  uint64_t decisions_ = 0;
};

// Replays an explicit decision list; halts the run when exhausted.
class ScriptedScheduler : public Scheduler {
 public:
  explicit ScriptedScheduler(std::vector<Decision> script)
      : script_(std::move(script)) {}

  Decision next(const WorldState&) override {
    if (pos_ >= script_.size()) return {Decision::Kind::Look, -1, -1.0};
    return script_[pos_++];
  }

 private:
  std::vector<Decision> script_;
  size_t pos_ = 0;
};

// Wraps a scheduler and records every decision it issues, for failure
// reproduction scripts.
class RecordingScheduler : public Scheduler {
 public:
  explicit RecordingScheduler(Scheduler& inner) : inner_(inner) {}

  Decision next(const WorldState& world) override {
    Decision d = inner_.next(world);
    if (d.robot >= 0) log_.push_back(d);
    return d;
  }

  const std::vector<Decision>& log() const { return log_; }

 private:
  Scheduler& inner_;
  std::vector<Decision> log_;
};

}  // namespace tmob
