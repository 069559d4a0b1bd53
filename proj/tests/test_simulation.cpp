#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

using namespace reachavoid;

namespace {

// Open 40x40 square, h = 0.05, with a 4x4 wall block at the centre.
Scenario block_square() {
  Scenario s = ratest::blank(40, 40, 0.05);
  for (int j = 18; j < 22; ++j) {
    for (int i = 18; i < 22; ++i) s.obstacle[s.grid.index(i, j)] = 1;
  }
  for (int j = 0; j < 3; ++j) {
    for (int i = 37; i < 40; ++i) s.target[s.grid.index(i, j)] = 1;
  }
  s.attackers = {{{0.2, 1.8}, 1.0}};
  s.defenders = {{{1.8, 1.8}, 1.0}};
  validate(s);
  return s;
}

const Trajectory& bench_run(DefenderStrategy st) {
  static std::map<int, Trajectory> cache;
  const int key = static_cast<int>(st);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const Scenario s = ratest::load("bench_4v4");
    SimConfig c;
    c.jobs = 4;
    c.strategies.assign(s.defenders.size(), st);
    it = cache.emplace(key, run(s, c)).first;
  }
  return it->second;
}

}  // namespace

TEST(StepPlayer, MovesAtFullSpeedInFreeSpace) {
  const Scenario s = block_square();
  const Vec2 x{0.5, 0.5};
  const Vec2 y = step_player(s, x, {3.0, 4.0}, 1.0, 0.02);  // clipped to the unit disk
  EXPECT_NEAR(y.x, 0.5 + 0.012, 1e-12);
  EXPECT_NEAR(y.y, 0.5 + 0.016, 1e-12);
  const Vec2 z = step_player(s, x, {0.3, 0.0}, 2.0, 0.1);
  EXPECT_NEAR(z.x, 0.56, 1e-12);
}

TEST(StepPlayer, SlidesAlongWalls) {
  const Scenario s = block_square();
  // Just left of the block face x = 0.9, moving diagonally into it.
  const Vec2 x{0.89, 0.95};
  const Vec2 y = step_player(s, x, {std::sqrt(0.5), std::sqrt(0.5)}, 1.0, 0.02);
  EXPECT_DOUBLE_EQ(y.x, x.x);
  EXPECT_GT(y.y, x.y);
  // Head-on into the face: no free axis, stays put.
  const Vec2 z = step_player(s, x, {1.0, 0.0}, 1.0, 0.02);
  EXPECT_EQ(z, x);
}

TEST(Step, RespectsSpeedAndFreeSpace) {
  const Scenario s = block_square();
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  JointState x = s.initial_state();
  for (int n = 0; n < 400; ++n) {
    const JointState y = step(s, x, {{u(rng), u(rng)}}, {{u(rng), u(rng)}}, 0.02);
    ASSERT_LE(distance(x.attacker_positions[0], y.attacker_positions[0]), 0.02 + 1e-12);
    ASSERT_LE(distance(x.defender_positions[0], y.defender_positions[0]), 0.02 + 1e-12);
    ASSERT_TRUE(s.free_point(y.attacker_positions[0]));
    ASSERT_TRUE(s.free_point(y.defender_positions[0]));
    ASSERT_NEAR(y.time, x.time + 0.02, 1e-12);
    x = y;
  }
  EXPECT_THROW(step(s, x, {{0, 0}}, {{0, 0}}, 0.0), ValidationError);
}

TEST(AttackerPolicy, HeadsForTargetAndStopsInside) {
  const Scenario s = block_square();
  const AttackerGuide g = make_attacker_guide(s, 0.1);
  const AttackerControl in = attacker_policy({1.9, 0.05}, s, g);
  EXPECT_EQ(in.direction, (Vec2{0.0, 0.0}));
  EXPECT_FALSE(in.stuck);
  // Open line of sight: first leg points at the target.
  const AttackerControl c = attacker_policy({1.9, 1.0}, s, g);
  EXPECT_NEAR(norm(c.direction), 1.0, 1e-9);
  EXPECT_LT(c.direction.y, -0.9);
}

TEST(AttackerPolicy, MarginKeepsRouteOffWalls) {
  const Scenario s = block_square();
  const AttackerGuide g = make_attacker_guide(s, 0.1);
  const auto route = attacker_route({0.6, 1.4}, s, g);
  ASSERT_GE(route.size(), 2u);
  const Mask inflated = inflate_obstacles(s.grid, s.obstacle, 0.1);
  for (std::size_t k = 1; k + 1 < route.size(); ++k) {
    ASSERT_FALSE(inflated[s.grid.index(s.grid.cell_of(route[k]))]);
  }
}

TEST(AttackerPolicy, WalledOffAttackerIsStuck) {
  Scenario s = block_square();
  // Box the attacker into the top-left corner.
  for (int k = 0; k < 6; ++k) {
    s.obstacle[s.grid.index(k, 33)] = 1;
    s.obstacle[s.grid.index(5, 34 + k)] = 1;
  }
  const AttackerGuide g = make_attacker_guide(s, 0.1);
  const AttackerControl c = attacker_policy({0.1, 1.9}, s, g);
  EXPECT_TRUE(c.stuck);
  EXPECT_EQ(c.direction, (Vec2{0.0, 0.0}));
}

TEST(Config, Validation) {
  const Scenario s = block_square();
  SimConfig c;
  EXPECT_NO_THROW(validate(c, s));
  c.dt = 0.5;
  EXPECT_THROW(validate(c, s), ValidationError);
  c = SimConfig{};
  c.dt = max_stable_dt(s) * 1.5;
  c.delta = 1.0;
  EXPECT_THROW(validate(c, s), ValidationError);
  c = SimConfig{};
  c.delta = 0.0;
  EXPECT_THROW(validate(c, s), ValidationError);
  c = SimConfig{};
  c.pd_refresh = 0;
  EXPECT_THROW(validate(c, s), ValidationError);
  EXPECT_DOUBLE_EQ(max_stable_dt(s), 0.025);
}

TEST(Run, DeterministicAcrossJobCounts) {
  const Scenario s = ratest::load("bench_4v4");
  SimConfig c;
  c.t_max = 0.5;
  c.anchor_stride = 16;
  c.jobs = 1;
  const Trajectory a = run(s, c);
  c.jobs = 4;
  const Trajectory b = run(s, c);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t k = 0; k < a.frames.size(); ++k) {
    ASSERT_EQ(a.frames[k].attackers, b.frames[k].attackers);
    ASSERT_EQ(a.frames[k].defenders, b.frames[k].defenders);
  }
  EXPECT_EQ(a.pairs, b.pairs);
}

TEST(Run, AllCapturedAtStartEndsImmediately) {
  Scenario s = block_square();
  s.defenders[0].position = {0.25, 1.8};
  const Trajectory tr = run(s, SimConfig{});
  ASSERT_EQ(tr.events.size(), 1u);
  EXPECT_EQ(tr.events[0].kind, SimEvent::Kind::Capture);
  EXPECT_EQ(tr.events[0].t, 0.0);
  EXPECT_EQ(tr.frames.size(), 1u);
  EXPECT_EQ(tr.audit.captured, 1);
}

TEST(Run, UndefendedAttackerReachesTarget) {
  Scenario s = block_square();
  s.defenders[0].position = {0.1, 0.1};
  s.attackers[0].position = {1.9, 1.0};
  SimConfig c;
  c.t_max = 2.0;
  const Trajectory tr = run(s, c);
  EXPECT_EQ(tr.audit.initial_matching, 0);
  EXPECT_EQ(tr.audit.reached, 1);
  EXPECT_TRUE(tr.audit.within_bound());
  ASSERT_FALSE(tr.events.empty());
  EXPECT_EQ(tr.events.back().kind, SimEvent::Kind::Arrival);
  // Straight run of ~0.85 at unit speed.
  EXPECT_NEAR(tr.events.back().t, 0.85, 0.1);
}

TEST(Run, PathDefenseHoldsBoundOnFourVsFour) {
  const Trajectory& tr = bench_run(DefenderStrategy::PDSemiOpenLoop);
  EXPECT_EQ(tr.audit.initial_matching, 3);
  EXPECT_LE(tr.audit.reached, tr.audit.bound);
  EXPECT_TRUE(tr.audit.monotone);
  EXPECT_EQ(tr.audit.tracking_violations, 0);
  for (const auto& m : tr.matching) EXPECT_LE(m.fresh, m.matched + m.carried);
}

TEST(Run, OracleGreedyHoldsBoundOnFourVsFour) {
  const Trajectory& tr = bench_run(DefenderStrategy::OracleGreedy);
  EXPECT_EQ(tr.audit.initial_matching, 4);
  EXPECT_EQ(tr.audit.reached, 0);
  EXPECT_TRUE(tr.audit.monotone);
}

TEST(Run, PlayersStayFreeAndRespectSpeed) {
  const Scenario s = ratest::load("bench_4v4");
  const Trajectory& tr = bench_run(DefenderStrategy::PDSemiOpenLoop);
  for (std::size_t k = 1; k < tr.frames.size(); ++k) {
    const double step = tr.frames[k].t - tr.frames[k - 1].t;
    for (std::size_t j = 0; j < s.attackers.size(); ++j) {
      const Vec2 p = tr.frames[k].attackers[j];
      ASSERT_TRUE(s.free_point(p));
      ASSERT_LE(distance(p, tr.frames[k - 1].attackers[j]), s.attackers[j].max_speed * step + 1e-9);
    }
    for (std::size_t i = 0; i < s.defenders.size(); ++i) {
      const Vec2 p = tr.frames[k].defenders[i];
      ASSERT_TRUE(s.free_point(p));
      ASSERT_LE(distance(p, tr.frames[k - 1].defenders[i]), s.defenders[i].max_speed * step + 1e-9);
    }
  }
}
