#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tmob/apps.hpp"
#include "tmob/harness.hpp"
#include "tmob/monitors.hpp"
#include "tmob/schedulers.hpp"

using namespace tmob;

namespace {

// Application-scale parameters: the staging areas must fit the sigma disk and
// the recruiting window (eps, V/2) must be non-empty.
MachineParams app_params() {
  MachineParams p;
  p.s = 2.25;
  p.sigma = 4.5;
  p.eps = 9.0;
  p.V = 22.5;
  return p;
}

struct GatherWorld {
  WorldState world;
  std::array<int, 3> machine_ids;
  std::vector<int> outsider_ids;
};

GatherWorld make_gather_world(const MachineParams& p, apps::AreaConfig cfg,
                              const std::vector<Vec>& outsiders,
                              bool sentinel, uint64_t frame_seed) {
  GatherWorld gw;
  gw.world.params = p;
  Rng rng(frame_seed);
  harness::BasicMachineSpec spec;
  spec.anchor = Vec(0, 0);
  spec.initial_value = 0.0;
  for (auto& f : spec.frames) f = {rng.uniform(0, 6.28), rng.coin()};
  // machine program: the gathering behavior (optionally with the phase
  // sentinel for pattern formation)
  auto machine_prog = apps::make_gathering_machine_program(cfg, p, sentinel);
  auto cb = programs::to_callbacks(
      apps::near_gathering_mobile_program(cfg, p, sentinel), p, true);
  gw.machine_ids = harness::add_basic_machine(gw.world, spec, cb);
  auto out_prog =
      std::make_shared<const RobotProgram>(apps::make_outsider_program(cfg));
  for (const auto& pos : outsiders) {
    int id = static_cast<int>(gw.world.robots.size());
    gw.world.robots.push_back(harness::make_outsider(
        id, pos, {rng.uniform(0, 6.28), rng.coin()}, p.V, out_prog));
    gw.outsider_ids.push_back(id);
  }
  return gw;
}

double group_diameter(const WorldState& w) {
  double dia = 0.0;
  for (size_t i = 0; i < w.robots.size(); ++i)
    for (size_t j = i + 1; j < w.robots.size(); ++j)
      dia = std::max(dia, dist(w.robots[i].position, w.robots[j].position));
  return dia;
}

}  // namespace

TEST_CASE("rest-machine detection ignores mid-step configurations") {
  MachineParams p = app_params();
  std::vector<Vec> pts = {Vec(0, 1), Vec(0, 0), Vec(2.0002, 0), Vec(10, 3)};
  auto fix = apps::find_rest_machine(pts, p);
  REQUIRE(fix.found);
  CHECK(dist(fix.c, Vec(0, 1)) == 0.0);
  // commander displaced mid-march: no longer a rest signature
  pts[0] = Vec(0, 1.01);
  CHECK_FALSE(apps::find_rest_machine(pts, p).found);
}

TEST_CASE("outsider rule: nearer of two eligible robots moves first") {
  MachineParams p = app_params();
  apps::AreaConfig cfg;
  // observer at 0.3 V from the Commander, another robot at 0.4 V: observer
  // is nearer, so it moves; flip the roles and it stays.
  Vec c(0, 1), r(0, 0), n(2.0, 0);
  auto local = [&](const Vec& me, const Vec& other) {
    Snapshot s;
    s.points = {c - me, r - me, n - me, other - me};
    std::sort(s.points.begin(), s.points.end());
    return apps::outsider_rule(s, p, cfg);
  };
  Vec near_pos = c + Vec(0.3 * p.V, 0.0);
  Vec far_pos = c + Vec(0.0, 0.4 * p.V);
  CHECK(norm(local(near_pos, far_pos)) > p.eta);   // nearer: moves
  CHECK(norm(local(far_pos, near_pos)) <= p.eta);  // farther: stays
}

TEST_CASE("outsider rule: out-of-window robot stays") {
  MachineParams p = app_params();
  apps::AreaConfig cfg;
  Vec c(0, 1), r(0, 0), n(2.0, 0);
  Vec me = c + Vec(0.6 * p.V, 0.0);  // beyond V/2
  Snapshot s;
  s.points = {c - me, r - me, n - me};
  std::sort(s.points.begin(), s.points.end());
  CHECK(norm(apps::outsider_rule(s, p, cfg)) <= p.eta);
}

TEST_CASE("near-gathering end to end with recruitment and exploration") {
  MachineParams p = app_params();
  apps::AreaConfig cfg;
  cfg.n_known = 6;
  // two outsiders inside the recruiting window, one just beyond V/2 so the
  // machine must explore (and the seated robots must track its steps)
  std::vector<Vec> outs = {Vec(10.0, 2.0), Vec(-9.0, -4.0), Vec(11.2, -3.4)};
  GatherWorld gw = make_gather_world(p, cfg, outs, false, 42);
  CollisionMonitor coll;
  AsyncAdversarialScheduler sched(7);
  StopCondition stop = [&](const WorldState& w) {
    // halted: all three outsiders seated and the machine resting
    std::vector<Vec> pts;
    for (const auto& r : w.robots) pts.push_back(r.position);
    auto fix = apps::find_rest_machine(pts, p);
    if (!fix.found) return false;
    apps::Staging st{fix.c, fix.frame, cfg, &p};
    int seated = 0;
    for (int id : {3, 4, 5})
      if (st.on_some_slot(w.robot(id).position)) ++seated;
    return seated == 3 && w.quiescent(p.eta);
  };
  run(gw.world, sched, stop, 3000000, {&coll});
  INFO("events: " << gw.world.trace.size());
  REQUIRE(gw.world.trace.size() < 3000000);
  CHECK(coll.hits().empty());
  CHECK(coll.min_pairwise() > p.eta);
  // a disk of radius eps contains everybody (diameter bound via Jung)
  CHECK(group_diameter(gw.world) <= std::sqrt(3.0) * p.eps);
  // and it stays that way under continued scheduling
  uint64_t mark = gw.world.trace.size();
  run(gw.world, sched, nullptr, mark + 30000, {&coll});
  CHECK(group_diameter(gw.world) <= std::sqrt(3.0) * p.eps);
  CHECK(coll.hits().empty());
}

TEST_CASE("pattern formation: small asymmetric pattern end to end") {
  MachineParams p = app_params();
  apps::AreaConfig cfg;
  int n = 6;
  std::vector<Vec> pattern = {Vec(0.0, 0.0),  Vec(1.0, 0.1), Vec(2.0, -0.3),
                              Vec(0.4, 1.2),  Vec(1.4, 0.9), Vec(0.9, -0.8)};
  auto progs = apps::pattern_formation_controller(n, pattern, cfg, p);

  WorldState w;
  w.params = p;
  Rng rng(5);
  harness::BasicMachineSpec spec;
  for (auto& f : spec.frames) f = {rng.uniform(0, 6.28), rng.coin()};
  auto mp = std::make_shared<const RobotProgram>(progs.machine_program);
  auto op = std::make_shared<const RobotProgram>(progs.outsider_program);
  // machine robots
  {
    NumberCodec codec(p);
    Vec xhat(1, 0), yhat(0, 1);
    std::array<Vec, 3> pos = {Vec(0, 1), Vec(0, 0),
                              Vec(2 * p.d - p.lambda / 2 + codec.encode(0.0), 0)};
    for (int i = 0; i < 3; ++i) {
      RobotState rs;
      rs.id = i;
      rs.position = pos[i];
      rs.frame = harness::pose_frame(pos[i], {rng.uniform(0, 6.28), rng.coin()});
      rs.visibility = p.machine_visibility();
      rs.program = mp;
      w.robots.push_back(rs);
    }
  }
  std::vector<Vec> outs = {Vec(9.6, 1.5), Vec(-5.0, 8.6), Vec(2.0, -10.0)};
  for (const auto& q : outs) {
    RobotState rs;
    rs.id = static_cast<int>(w.robots.size());
    rs.position = q;
    rs.frame = harness::pose_frame(q, {rng.uniform(0, 6.28), rng.coin()});
    rs.visibility = p.V;
    rs.program = op;
    w.robots.push_back(rs);
  }
  CollisionMonitor coll;
  AsyncAdversarialScheduler sched(99);
  StopCondition stop = [&](const WorldState& ws) {
    if (!ws.quiescent(p.eta)) return false;
    // formed: every robot within the B-scale cluster
    double dia = 0.0;
    for (size_t i = 0; i < ws.robots.size(); ++i)
      for (size_t j = i + 1; j < ws.robots.size(); ++j)
        dia = std::max(dia, dist(ws.robots[i].position, ws.robots[j].position));
    return dia < 0.2 * p.d;
  };
  run(w, sched, stop, 6000000, {&coll});
  INFO("events: " << w.trace.size());
  REQUIRE(w.trace.size() < 6000000);
  CHECK(coll.hits().empty());

  // similarity oracle: an independent pair-enumeration Procrustes check
  std::vector<Vec> final_pts;
  for (const auto& r : w.robots) final_pts.push_back(r.position);
  std::vector<Vec> canon = apps::canonical_pattern(pattern);
  double dia = 0.0;
  for (size_t i = 0; i < canon.size(); ++i)
    for (size_t j = i + 1; j < canon.size(); ++j)
      dia = std::max(dia, dist(canon[i], canon[j]));
  bool similar = false;
  double best_err = 1e300;
  for (size_t a = 0; a < final_pts.size() && !similar; ++a)
    for (size_t b = 0; b < final_pts.size() && !similar; ++b) {
      if (a == b) continue;
      Vec dt = canon[1] - canon[0];
      Vec dp = final_pts[b] - final_pts[a];
      double dt2 = norm2(dt);
      double ax = (dp.x() * dt.x() + dp.y() * dt.y()) / dt2;
      double ay = (dp.y() * dt.x() - dp.x() * dt.y()) / dt2;
      double scale = std::sqrt(ax * ax + ay * ay);
      if (scale <= 0) continue;
      auto apply = [&](const Vec& z) {
        Vec rel = z - canon[0];
        return final_pts[a] +
               Vec(ax * rel.x() - ay * rel.y(), ay * rel.x() + ax * rel.y());
      };
      std::vector<bool> used(final_pts.size(), false);
      double worst = 0.0;
      bool ok = true;
      for (const auto& t : canon) {
        Vec want = apply(t);
        double bd = 1e300;
        int bj = -1;
        for (size_t j = 0; j < final_pts.size(); ++j) {
          if (used[j]) continue;
          if (dist(final_pts[j], want) < bd) {
            bd = dist(final_pts[j], want);
            bj = static_cast<int>(j);
          }
        }
        if (bj < 0) {
          ok = false;
          break;
        }
        used[bj] = true;
        worst = std::max(worst, bd);
      }
      if (!ok) continue;
      double rel_err = worst / (scale * dia);
      best_err = std::min(best_err, rel_err);
      if (rel_err <= 1e-6) similar = true;
    }
  INFO("best relative Hausdorff: " << best_err);
  CHECK(similar);
}

TEST_CASE("pattern formation rejects small n") {
  MachineParams p = app_params();
  CHECK_THROWS_WITH(apps::pattern_formation_controller(
                        4, {Vec(0, 0), Vec(1, 0), Vec(0, 1), Vec(1, 1)}, {}, p),
                    "ad-hoc small cases unsupported");
}

TEST_CASE("gathering: the all-coincident pattern lands at slot tolerance") {
  MachineParams p = app_params();
  apps::AreaConfig cfg;
  int n = 6;
  std::vector<Vec> pattern(n, Vec(3.0, -2.0));
  auto progs = apps::pattern_formation_controller(n, pattern, cfg, p);

  WorldState w;
  w.params = p;
  Rng rng(11);
  auto mp = std::make_shared<const RobotProgram>(progs.machine_program);
  auto op = std::make_shared<const RobotProgram>(progs.outsider_program);
  {
    NumberCodec codec(p);
    std::array<Vec, 3> pos = {Vec(0, 1), Vec(0, 0),
                              Vec(2 * p.d - p.lambda / 2 + codec.encode(0.0), 0)};
    for (int i = 0; i < 3; ++i) {
      RobotState rs;
      rs.id = i;
      rs.position = pos[i];
      rs.frame = harness::pose_frame(pos[i], {rng.uniform(0, 6.28), rng.coin()});
      rs.visibility = p.machine_visibility();
      rs.program = mp;
      w.robots.push_back(rs);
    }
  }
  std::vector<Vec> outs = {Vec(10.1, 0.4), Vec(-3.0, 9.3), Vec(-6.0, -7.8)};
  for (const auto& q : outs) {
    RobotState rs;
    rs.id = static_cast<int>(w.robots.size());
    rs.position = q;
    rs.frame = harness::pose_frame(q, {rng.uniform(0, 6.28), rng.coin()});
    rs.visibility = p.V;
    rs.program = op;
    w.robots.push_back(rs);
  }
  CollisionMonitor coll;
  AsyncAdversarialScheduler sched(123);
  StopCondition stop = [&](const WorldState& ws) {
    if (!ws.quiescent(p.eta)) return false;
    double dia = 0.0;
    for (size_t i = 0; i < ws.robots.size(); ++i)
      for (size_t j = i + 1; j < ws.robots.size(); ++j)
        dia = std::max(dia, dist(ws.robots[i].position, ws.robots[j].position));
    return dia < 1e-5 * p.d;
  };
  run(w, sched, stop, 6000000, {&coll});
  INFO("events: " << w.trace.size());
  REQUIRE(w.trace.size() < 6000000);
  CHECK(coll.hits().empty());
  CHECK(coll.min_pairwise() > p.eta);
  CHECK(group_diameter(w) <= 1e-6 * p.d);
}
