#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tmob/basic_mobile.hpp"
#include "tmob/codec.hpp"
#include "tmob/rng.hpp"

using namespace tmob;
using namespace tmob::basic;

namespace {
const double kS3 = std::sqrt(3.0);

MachineParams params() { return MachineParams{}; }

Vec rotate2(const Vec& v, double theta) {
  double c = std::cos(theta), s = std::sin(theta);
  return Vec(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

// A rest configuration in the canonical frame: R at origin, C' above, N on
// the number line at offset `off` from Q.
struct RestPose {
  Vec c, r, n;
};

RestPose rest_pose(const MachineParams& p, double off) {
  RestPose rp;
  rp.r = Vec(0, 0);
  rp.c = Vec(0, p.d);
  rp.n = Vec(2 * p.d - p.lambda / 2 + off, 0);
  return rp;
}
}  // namespace

TEST_CASE("identify_roles: distances pick the scalene triangle apart") {
  // oracle: pairwise distances 1, 2, sqrt5 name commander/reference/number
  std::array<Vec, 3> pts = {Vec(0, 0), Vec(0, 1), Vec(2, 0)};
  double d01 = dist(pts[0], pts[1]);   // 1   -> closest: {R, C}
  double d02 = dist(pts[0], pts[2]);   // 2
  double d12 = dist(pts[1], pts[2]);   // sqrt(5) -> farthest: {C, N}
  REQUIRE(d01 < d02);
  REQUIRE(d02 < d12);
  Roles roles = identify_roles(pts, 1e-9);
  REQUIRE(roles.valid);
  CHECK(roles.commander == 1);
  CHECK(roles.reference == 0);
  CHECK(roles.number == 2);
}

TEST_CASE("identify_roles: equilateral triple is ambiguous") {
  std::array<Vec, 3> pts = {Vec(0, 0), Vec(1, 0), Vec(0.5, kS3 / 2)};
  CHECK_FALSE(identify_roles(pts, 1e-9).valid);
}

TEST_CASE("identify_roles: invariant under rigid motion") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    double theta = rng.uniform(0, 6.28);
    Vec shift(rng.uniform(-5, 5), rng.uniform(-5, 5));
    std::array<Vec, 3> pts = {Vec(0, 0), Vec(0, 1), Vec(2, 0)};
    for (auto& p : pts) p = rotate2(p, theta) + shift;
    Roles roles = identify_roles(pts, 1e-9);
    REQUIRE(roles.valid);
    CHECK(roles.commander == 1);
    CHECK(roles.reference == 0);
    CHECK(roles.number == 2);
  }
}

TEST_CASE("virtual commander from R and N") {
  MachineParams p = params();
  SECTION("picks the candidate nearer C") {
    auto vc = virtual_commander_from_rn(Vec(0, 0), Vec(2.0003, 0), Vec(0.01, 1.002), p);
    REQUIRE(vc);
    CHECK(dist(*vc, Vec(0, 1)) < 1e-9);
  }
  SECTION("mirror side") {
    auto vc = virtual_commander_from_rn(Vec(0, 0), Vec(2.0003, 0), Vec(0.01, -1.002), p);
    REQUIRE(vc);
    CHECK(dist(*vc, Vec(0, -1)) < 1e-9);
  }
  SECTION("exact rest is a fixed point") {
    RestPose rp = rest_pose(p, p.lambda / 2);
    auto vc = virtual_commander_from_rn(rp.r, rp.n, rp.c, p);
    REQUIRE(vc);
    CHECK(dist(*vc, rp.c) < 1e-12);
  }
  SECTION("degenerate: C on the RN line") {
    CHECK_FALSE(virtual_commander_from_rn(Vec(0, 0), Vec(2, 0), Vec(1, 0), p));
  }
}

TEST_CASE("virtual commander from C and R") {
  MachineParams p = params();
  SECTION("collinear case |CR| = d + mu") {
    auto vc = virtual_commander_from_cr(Vec(0, 1.05), Vec(0, 0), Vec(2, 0.05), p);
    REQUIRE(vc.valid);
    CHECK(vc.dir == 0);
    CHECK(dist(vc.cprime, Vec(0, 1)) < 1e-12);
  }
  SECTION("|CR| = d' with obtuse NRC picks D2") {
    // oracle: d' = sqrt(d^2 + mu^2 - d*mu) by the law of cosines
    double dp = std::sqrt(1.0 + 0.05 * 0.05 - 0.05);
    Vec c(-kS3 * 0.025, 0.975);
    REQUIRE(std::abs(dist(c, Vec(0, 0)) - dp) < 1e-12);
    REQUIRE(dp == Catch::Approx(0.9759610648).epsilon(1e-9));
    auto vc = virtual_commander_from_cr(c, Vec(0, 0), Vec(2, 0.0), p);
    REQUIRE(vc.valid);
    CHECK(vc.dir == 1);
    CHECK(dist(vc.cprime, Vec(0, 1)) < 1e-9);
    CHECK(dist(vc.cprime, c) == Catch::Approx(p.mu).epsilon(1e-9));
  }
  SECTION("mirror case picks D3") {
    Vec c(kS3 * 0.025, 0.975);
    auto vc = virtual_commander_from_cr(c, Vec(0, 0), Vec(2, 0.0), p);
    REQUIRE(vc.valid);
    CHECK(vc.dir == 2);
    CHECK(dist(vc.cprime, Vec(0, 1)) < 1e-9);
  }
  SECTION("neither distance matches") {
    CHECK_FALSE(virtual_commander_from_cr(Vec(0, 1), Vec(0, 0), Vec(2, 0), p).valid);
  }
}

TEST_CASE("derived rest geometry invariants") {
  MachineParams p = params();
  RestPose rp = rest_pose(p, p.lambda / 2);
  RestFrame f = rest_frame_from_rn(rp.r, rp.n, rp.c, p);
  REQUIRE(f.valid);
  CHECK(dist(point_q(f, p), rp.r) == Catch::Approx(2 * p.d - p.lambda / 2));
  CHECK(dist(point_q_prime(f, p), rp.r) == Catch::Approx(2 * p.d + p.lambda / 2));
  auto ds = canonical_directions(f);
  REQUIRE(ds.size() == 3);
  // D_1 collinear with R and C', beyond C'
  MidwayPoints m1 = derived_points(f, ds[0], p);
  CHECK(dist(m1.d, Vec(0, p.d + p.mu)) < 1e-12);
  for (int i = 0; i < 3; ++i) {
    MidwayPoints m = derived_points(f, ds[i], p);
    CHECK(dist(m.d, f.cprime) == Catch::Approx(p.mu));
    CHECK(dist(m.a, f.cprime) == Catch::Approx(p.mu / 2 - p.lambda / 2));
    CHECK(dist(m.b, f.cprime) == Catch::Approx(p.mu / 2 + p.lambda / 2));
    CHECK(dist(m.sp, m.s) == Catch::Approx(p.lambda));
    CHECK(std::abs(dot(m.sp - m.s, ds[i].u)) < 1e-15);
    for (int j = i + 1; j < 3; ++j) {
      double ang = angle_at(f.cprime, derived_points(f, ds[i], p).d,
                            derived_points(f, ds[j], p).d);
      CHECK(ang == Catch::Approx(2.0943951023931953).epsilon(1e-9));  // 120 deg
    }
  }
  // d' < d < d + mu
  CHECK(p.dprime() < p.d);
  CHECK(p.d < p.d + p.mu);
}

TEST_CASE("classify: canonical states") {
  MachineParams p = params();
  double off0 = p.lambda / 2;
  RestPose rp = rest_pose(p, off0);
  RestFrame f = rest_frame_from_rn(rp.r, rp.n, rp.c, p);
  auto ds = canonical_directions(f);

  SECTION("exact rest") {
    CHECK(classify(rp.c, rp.r, rp.n, p).phase == Phase::Rest);
  }
  SECTION("commander at A_1") {
    Vec c(0, p.d + p.mu / 2 - p.lambda / 2);
    PhaseState ps = classify(c, rp.r, rp.n, p);
    CHECK(ps.phase == Phase::P1InTriangle);
    CHECK(ps.dir == 0);
  }
  SECTION("commander halfway to A_2") {
    MidwayPoints m = derived_points(f, ds[1], p);
    Vec c = 0.5 * (f.cprime + m.a);
    PhaseState ps = classify(c, rp.r, rp.n, p);
    CHECK(ps.phase == Phase::P1ToA);
    CHECK(ps.dir == 1);
  }
  SECTION("commander parked on the altitude") {
    MidwayPoints m = derived_points(f, ds[2], p);
    Vec c = m.s + 0.3 * p.lambda * ds[2].n;
    PhaseState ps = classify(c, rp.r, rp.n, p);
    CHECK(ps.phase == Phase::P2OnAltitude);
    CHECK(ps.dir == 2);
    CHECK_FALSE(ps.matched);  // 0.3*lambda != off0
  }
  SECTION("phase 5: commander at D_2, number at D'_2") {
    MidwayPoints m = derived_points(f, ds[1], p);
    Vec c = m.d;
    Vec n = rp.n + p.mu * ds[1].u;
    PhaseState ps = classify(c, rp.r, n, p);
    CHECK(ps.phase == Phase::P5RefMoving);
    CHECK(ps.dir == 1);
    // cross-check: |CR| = d' and the number robot sits at its target
    CHECK(std::abs(dist(c, rp.r) - p.dprime()) < 1e-12);
  }
  SECTION("phase 4 partway") {
    MidwayPoints m = derived_points(f, ds[0], p);
    Vec n = rp.n + 0.4 * p.mu * ds[0].u;
    PhaseState ps = classify(m.d, rp.r, n, p);
    CHECK(ps.phase == Phase::P4NumToD);
    CHECK(ps.dir == 0);
  }
  SECTION("phase 5 with the reference partway home") {
    MidwayPoints m = derived_points(f, ds[2], p);
    Vec c = m.d;
    Vec n = rp.n + p.mu * ds[2].u;
    Vec r = rp.r + 0.6 * p.mu * ds[2].u;
    PhaseState ps = classify(c, r, n, p);
    CHECK(ps.phase == Phase::P5RefMoving);
    CHECK(ps.dir == 2);
  }
  SECTION("garbage is invalid") {
    CHECK(classify(Vec(5, 5), rp.r, rp.n, p).phase == Phase::Invalid);
  }
}

namespace {
// Convenience: run the component rule for the robot at a given role.
Vec rule_for(const RestPose& rp, int which, const MachineParams& p,
             const Callbacks& cb, const Vec& c, const Vec& r, const Vec& n) {
  ComponentCtx ctx;
  ctx.params = &p;
  ctx.cb = cb;
  std::array<Vec, 3> pts = {c, r, n};
  (void)rp;
  return component_rule(pts, which, ctx);
}

Callbacks spiral_free_callbacks(int dir) {
  Callbacks cb;
  cb.choose = [dir](double, const std::vector<Vec>&, const RestFrame&) {
    return std::optional<int>(dir);
  };
  cb.update = [](double off, const std::vector<Vec>&, const RestFrame&, int) {
    return off;
  };
  return cb;
}
}  // namespace

TEST_CASE("robot rule: commander at rest marches to A_i") {
  MachineParams p = params();
  RestPose rp = rest_pose(p, p.lambda / 2);
  Vec dest = rule_for(rp, 0, p, spiral_free_callbacks(0), rp.c, rp.r, rp.n);
  RestFrame f = rest_frame_from_rn(rp.r, rp.n, rp.c, p);
  MidwayPoints m = derived_points(f, canonical_directions(f)[0], p);
  CHECK(dist(dest, m.a) < 1e-12);
}

TEST_CASE("robot rule: commander at A_1 publishes f(offset) on the altitude") {
  MachineParams p = params();
  NumberCodec codec(p);
  double off0 = codec.encode(0.0);  // lambda/2
  RestPose rp = rest_pose(p, off0);
  RestFrame f = rest_frame_from_rn(rp.r, rp.n, rp.c, p);
  auto ds = canonical_directions(f);
  MidwayPoints m = derived_points(f, ds[0], p);
  Callbacks cb;
  cb.choose = [](double, const std::vector<Vec>&, const RestFrame&) {
    return std::optional<int>(0);
  };
  cb.update = [&codec](double off, const std::vector<Vec>&, const RestFrame&, int) {
    return codec.encode(codec.decode(off) + 1.0);  // successor through the codec
  };
  Vec dest = rule_for(rp, 0, p, cb, m.a, rp.r, rp.n);
  // f(encode(0)) = encode(1) = lambda/2 + lambda/4 from S_1
  double want = p.lambda / 2 + p.lambda / 4;
  CHECK(dot(dest - m.s, ds[0].n) == Catch::Approx(want).epsilon(1e-12));
  CHECK(std::abs(dot(dest - m.s, ds[0].u)) < 1e-15);
}

TEST_CASE("robot rule: reference completes the translation") {
  MachineParams p = params();
  // C at (0, 1.05), N at (2.0, 0.05): phase 5 with direction 1, R at origin.
  Vec c(0, 1.05), n(2.0, 0.05), r(0, 0);
  Callbacks cb = spiral_free_callbacks(0);
  Vec dest = rule_for(rest_pose(p, 0), 1, p, cb, c, r, n);
  CHECK(dist(dest, Vec(0, 0.05)) < 1e-9);
  // oracle: target on circle(C, d) with a right angle at the target
  CHECK(std::abs(dist(dest, c) - p.d) < 1e-9);
  CHECK(std::abs(dot(c - dest, n - dest)) < 1e-9);
}

TEST_CASE("robot rule: single mover at every canonical state") {
  MachineParams p = params();
  NumberCodec codec(p);
  double off0 = codec.encode(0.0);
  RestPose rp = rest_pose(p, off0);
  RestFrame f = rest_frame_from_rn(rp.r, rp.n, rp.c, p);
  auto ds = canonical_directions(f);
  Callbacks cb = spiral_free_callbacks(1);

  auto movers = [&](const Vec& c, const Vec& r, const Vec& n) {
    int count = 0;
    std::array<Vec, 3> pts = {c, r, n};
    ComponentCtx ctx;
    ctx.params = &p;
    ctx.cb = cb;
    for (int i = 0; i < 3; ++i)
      if (dist(component_rule(pts, i, ctx), pts[i]) > p.eta) ++count;
    return count;
  };

  MidwayPoints m = derived_points(f, ds[1], p);
  CHECK(movers(rp.c, rp.r, rp.n) == 1);                      // rest: commander
  Vec mid = 0.5 * (f.cprime + m.a);
  CHECK(movers(mid, rp.r, rp.n) == 1);                       // P1 march
  CHECK(movers(m.a, rp.r, rp.n) == 1);                       // placement
  Vec parked = m.s + off0 * ds[1].n;
  CHECK(movers(parked, rp.r, rp.n) == 1);                    // number matching
  Vec n_matched = point_q(f, p) + off0 * f.xhat;
  CHECK(movers(parked, rp.r, n_matched) == 1);               // commander departs
  CHECK(movers(m.d, rp.r, n_matched) == 1);                  // phase 4
  Vec n_done = n_matched + p.mu * ds[1].u;
  CHECK(movers(m.d, rp.r, n_done) == 1);                     // phase 5
  Vec r_mid = rp.r + 0.5 * p.mu * ds[1].u;
  CHECK(movers(m.d, r_mid, n_done) == 1);                    // phase 5 partway
  Vec r_done = rp.r + p.mu * ds[1].u;
  CHECK(movers(m.d, r_done, n_done) == 1);                   // new rest: commander
}

TEST_CASE("guard disjointness on sampled reachable states") {
  MachineParams p = params();
  Rng rng(4242);
  NumberCodec codec(p);
  for (int trial = 0; trial < 2000; ++trial) {
    double off = codec.encode(rng.uniform(-50, 50));
    RestPose rp = rest_pose(p, off);
    RestFrame f = rest_frame_from_rn(rp.r, rp.n, rp.c, p);
    auto ds = canonical_directions(f);
    int dir = static_cast<int>(rng.next_below(3));
    MidwayPoints m = derived_points(f, ds[dir], p);
    Vec c;
    switch (rng.next_below(5)) {
      case 0: c = f.cprime + rng.next_double() * (m.a - f.cprime); break;
      case 1: c = m.a + rng.next_double() * (m.s + off * ds[dir].n - m.a); break;
      case 2: c = m.s + rng.uniform(0.05, 0.95) * p.lambda * ds[dir].n; break;
      case 3: c = m.b + rng.next_double() * (m.d - m.b); break;
      default: c = m.d; break;
    }
    CHECK(commander_guard_count(c, rp.r, rp.n, p) <= 1);
  }
}
