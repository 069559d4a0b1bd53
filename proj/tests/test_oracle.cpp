#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "support.hpp"

using namespace reachavoid;

namespace {

OracleOptions fine_options(double step_cells) {
  OracleOptions o;
  o.coarsening = 1;
  o.step_cells = step_cells;
  return o;
}

// Corridor state for free cell (i, 1); states are numbered left to right.
std::uint32_t corridor_state(const ValueTable& t, int i) {
  return static_cast<std::uint32_t>(t.grid.free_index[t.grid.coarse.index(i, 1)]);
}

std::size_t defender_wins(const ValueTable& t) {
  std::size_t n = 0;
  for (auto v : t.status) n += v == static_cast<std::uint8_t>(Outcome::DefenderWin);
  return n;
}

}  // namespace

TEST(JointGrid, CoarseCellFreeOnlyWhenAllFineCellsFree) {
  Scenario s = ratest::blank(8, 8, 0.1);
  s.obstacle[s.grid.index(3, 3)] = 1;
  s.target[s.grid.index(0, 0)] = 1;
  const JointGrid jg = make_joint_grid(s, 2);
  EXPECT_EQ(jg.coarse.width, 4);
  EXPECT_EQ(jg.states(), 15u);
  EXPECT_EQ(jg.free_index[jg.coarse.index(1, 1)], -1);
  EXPECT_TRUE(jg.target[static_cast<std::size_t>(jg.free_index[0])] == 0);  // centre lands on (1,1)
  // Odd width: the ragged last column is dropped.
  const JointGrid odd = make_joint_grid(ratest::blank(9, 9, 0.1), 2);
  EXPECT_EQ(odd.states(), 16u);
  EXPECT_THROW(make_joint_grid(s, 0), ValidationError);
}

TEST(JointGrid, StateOfFallsBackToNearestFreeCell) {
  const Scenario s = ratest::corridor();
  const JointGrid jg = make_joint_grid(s, 1);
  const Vec2 blocked = s.grid.center(Cell{7, 0});
  EXPECT_EQ(jg.center(state_of(jg, blocked)), s.grid.center(Cell{7, 1}));
}

TEST(ChooseCoarsening, SmallestFactorThatFits) {
  const Scenario s = ratest::load("bench_two_blocks");
  const int k = choose_coarsening(s, 2'000'000);
  EXPECT_LE(make_joint_grid(s, k).joint_states(), 2'000'000u);
  EXPECT_GT(make_joint_grid(s, k - 1).joint_states(), 2'000'000u);
}

TEST(Solve, TerminalRules) {
  const Scenario s = ratest::empty_square();
  const ValueTable t = solve_joint_game(s, fine_options(1.0));
  const std::size_t n = t.n();
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t d = 0; d < n; ++d) {
      const bool captured = capture_test(t.grid.center(a), t.grid.center(d), s.capture_radius);
      if (captured) {
        ASSERT_EQ(t.at(a, d), Outcome::DefenderWin);
      } else if (t.grid.target[a]) {
        ASSERT_EQ(t.at(a, d), Outcome::AttackerWin);
      }
    }
  }
  EXPECT_TRUE(t.converged);
  EXPECT_TRUE(t.warnings.empty());
}

TEST(Solve, CorridorUnitStepsMatchHandSolution) {
  // Equal speeds, one cell per step, capture within one cell: the defender
  // wins iff it starts adjacent to the attacker or ahead of it.
  const Scenario s = ratest::corridor();
  const ValueTable t = solve_joint_game(s, fine_options(1.0));
  ASSERT_EQ(t.n(), 20u);
  for (int a = 0; a < 20; ++a) {
    for (int d = 0; d < 20; ++d) {
      const bool expect_def = std::abs(a - d) <= 1 || d > a;
      const Outcome o = t.at(corridor_state(t, a), corridor_state(t, d));
      ASSERT_EQ(o == Outcome::DefenderWin, expect_def) << "a=" << a << " d=" << d;
    }
  }
}

TEST(Solve, CorridorMatchesOneDimensionalValueIteration) {
  // (step, attacker reach, defender reach) along the corridor axis. The
  // defender's disk is widened until its hull covers the continuous disk:
  // step 1 -> sqrt2, step 2 -> sqrt5, step sqrt10 -> 4.
  struct Case {
    double step;
    int r_a, r_d;
  };
  const Scenario s = ratest::corridor();
  for (const Case& c : {Case{1.0, 1, 1}, Case{2.0, 2, 2}, Case{3.1622776601683795, 3, 4}}) {
    const ValueTable t = solve_joint_game(s, fine_options(c.step));
    const auto ref = ratest::corridor_game(20, c.r_a, c.r_d, 1);
    for (int a = 0; a < 20; ++a) {
      for (int d = 0; d < 20; ++d) {
        const Outcome o = t.at(corridor_state(t, a), corridor_state(t, d));
        ASSERT_EQ(o == Outcome::DefenderWin, ref[a][d] != 0)
            << "step=" << c.step << " a=" << a << " d=" << d;
      }
    }
  }
}

TEST(Moves, DefenderHullCoversContinuousDisk) {
  EXPECT_NEAR(detail::hull_inner_radius(1.0), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(detail::hull_inner_radius(std::sqrt(2.0)), 1.0, 1e-12);
  EXPECT_NEAR(detail::hull_inner_radius(std::sqrt(10.0)), 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(detail::covering_radius(1.0), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(detail::covering_radius(2.0), std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(detail::covering_radius(std::sqrt(10.0)), 4.0, 1e-12);
  for (double r = 1.0; r < 8.0; r += 0.37) {
    const double c = detail::covering_radius(r);
    EXPECT_GE(detail::hull_inner_radius(c), r - 1e-9);
    EXPECT_GE(c, r - 1e-9);
  }
}

TEST(Solve, CorridorFasterDefenderMatchesReference) {
  Scenario s = ratest::corridor();
  s.defenders[0].max_speed = 2.0;
  OracleOptions o = fine_options(1.0);
  const ValueTable t = solve_joint_game(s, o);
  // Defender reach 2 -> covering radius sqrt5 -> still 2 along the axis.
  const auto ref = ratest::corridor_game(20, 1, 2, 1);
  for (int a = 0; a < 20; ++a) {
    for (int d = 0; d < 20; ++d) {
      ASSERT_EQ(t.at(corridor_state(t, a), corridor_state(t, d)) == Outcome::DefenderWin,
                ref[a][d] != 0);
    }
  }
}

TEST(Solve, ResultIsAFixedPoint) {
  EXPECT_EQ(sweep_once(solve_joint_game(ratest::corridor(), fine_options(3.1622776601683795))), 0u);
  EXPECT_EQ(sweep_once(solve_joint_game(ratest::empty_square(), fine_options(2.0))), 0u);
  OracleOptions o;
  o.coarsening = 5;
  EXPECT_EQ(sweep_once(solve_joint_game(ratest::load("bench_walls"), o)), 0u);
}

TEST(Solve, TruncatedHorizonIsNotAFixedPoint) {
  OracleOptions o = fine_options(1.0);
  o.horizon = 2;
  const ValueTable t = solve_joint_game(ratest::corridor(), o);
  EXPECT_FALSE(t.converged);
  EXPECT_FALSE(t.warnings.empty());
  EXPECT_GT(sweep_once(t), 0u);
}

TEST(Solve, FasterDefenderNeverLosesWins) {
  const Scenario s = ratest::empty_square();
  OracleOptions o = fine_options(2.0);
  const ValueTable base = solve_joint_game(s, o);
  o.defender_speed = 1.5;
  const ValueTable fast = solve_joint_game(s, o);
  for (std::size_t i = 0; i < base.status.size(); ++i) {
    if (base.status[i] == static_cast<std::uint8_t>(Outcome::DefenderWin)) {
      ASSERT_EQ(fast.status[i], static_cast<std::uint8_t>(Outcome::DefenderWin));
    }
  }
  EXPECT_GT(defender_wins(fast), defender_wins(base));
}

TEST(Solve, LargerCaptureRadiusNeverLosesWins) {
  Scenario s = ratest::empty_square();
  const ValueTable base = solve_joint_game(s, fine_options(2.0));
  s.capture_radius = 0.25;
  const ValueTable wide = solve_joint_game(s, fine_options(2.0));
  for (std::size_t i = 0; i < base.status.size(); ++i) {
    if (base.status[i] == static_cast<std::uint8_t>(Outcome::DefenderWin)) {
      ASSERT_EQ(wide.status[i], static_cast<std::uint8_t>(Outcome::DefenderWin));
    }
  }
  EXPECT_GT(defender_wins(wide), defender_wins(base));
}

TEST(Solve, MirrorSymmetryOnSquare) {
  const Scenario s = ratest::empty_square();
  const ValueTable t = solve_joint_game(s, fine_options(2.0));
  const GridSpec& c = t.grid.coarse;
  auto mirror = [&](std::uint32_t q, int axis) {
    Cell cell = c.cell(t.grid.cell_of_state[q]);
    if (axis == 0) cell.i = c.width - 1 - cell.i;
    if (axis == 1) cell.j = c.height - 1 - cell.j;
    if (axis == 2) std::swap(cell.i, cell.j);
    return static_cast<std::uint32_t>(t.grid.free_index[c.index(cell)]);
  };
  for (int axis = 0; axis < 3; ++axis) {
    for (std::uint32_t a = 0; a < t.n(); ++a) {
      for (std::uint32_t d = 0; d < t.n(); ++d) {
        ASSERT_EQ(t.at(a, d), t.at(mirror(a, axis), mirror(d, axis))) << "axis " << axis;
      }
    }
  }
}

TEST(Solve, BudgetExceeded) {
  const Scenario s = ratest::load("bench_two_blocks");
  OracleOptions o;
  o.coarsening = 1;
  o.budget_bytes = 1024 * 1024;
  EXPECT_THROW(solve_joint_game(s, o), BudgetExceeded);

  ::setenv("REACHAVOID_BUDGET_MB", "1", 1);
  EXPECT_EQ(oracle_budget_bytes(OracleOptions{}), 1024u * 1024u);
  EXPECT_THROW(solve_joint_game(s, OracleOptions{.coarsening = 1}), BudgetExceeded);
  ::unsetenv("REACHAVOID_BUDGET_MB");
  EXPECT_EQ(oracle_budget_bytes(OracleOptions{}), std::size_t{1024} * 1024 * 1024);
}

TEST(Solve, StepBelowOneCellIsRejected) {
  EXPECT_THROW(solve_joint_game(ratest::corridor(), fine_options(0.5)), ValidationError);
}

TEST(Table, RoundTrip) {
  const Scenario s = ratest::empty_square();
  const ValueTable t = solve_joint_game(s, fine_options(2.0));
  std::stringstream buf;
  write_table(t, scenario_hash(s), buf);
  TableHeader h;
  const ValueTable r = read_table(buf, s, &h);
  EXPECT_EQ(h.scenario_hash, scenario_hash(s));
  EXPECT_EQ(h.k, 1);
  EXPECT_EQ(h.tie_rule, kTieRuleCaptureWins);
  EXPECT_EQ(r.status, t.status);
  EXPECT_EQ(r.attacker_moves, t.attacker_moves);
  EXPECT_EQ(r.defender_moves, t.defender_moves);
  EXPECT_EQ(r.iterations, t.iterations);
  EXPECT_EQ(sweep_once(r), 0u);
}

TEST(Table, RejectsForeignOrDamagedInput) {
  const Scenario s = ratest::empty_square();
  const ValueTable t = solve_joint_game(s, fine_options(1.0));
  std::stringstream buf;
  write_table(t, 0, buf);
  const std::string bytes = buf.str();

  std::stringstream bad_magic("XXXX" + bytes.substr(4));
  EXPECT_THROW(read_table(bad_magic, s), ValidationError);
  std::stringstream cut(bytes.substr(0, bytes.size() - 7));
  EXPECT_THROW(read_table(cut, s), ValidationError);
  std::stringstream other(bytes);
  EXPECT_THROW(read_table(other, ratest::corridor()), ValidationError);
}

TEST(Query, OutsideDomainThrows) {
  const Scenario s = ratest::empty_square();
  const ValueTable t = solve_joint_game(s, fine_options(1.0));
  EXPECT_THROW(query(t, {-0.5, 0.5}, {0.5, 0.5}), ValidationError);
  EXPECT_EQ(query(t, {0.55, 0.55}, {0.95, 0.95}), Outcome::AttackerWin);
  EXPECT_EQ(query(t, {0.15, 0.15}, {0.55, 0.55}), Outcome::DefenderWin);
}

TEST(OracleSlice, ContainsCaptureDiskAndSkipsObstacles) {
  const Scenario s = ratest::load("bench_two_blocks");
  OracleOptions o;
  o.coarsening = 4;
  const ValueTable t = solve_joint_game(s, o);
  const Vec2 xa{-0.8, -0.8};
  const Mask m = oracle_slice(t, s, xa);
  const Vec2 ca = t.grid.center(state_of(t.grid, xa));
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    if (s.obstacle[k]) {
      ASSERT_FALSE(m[k]);
      continue;
    }
    const Vec2 cd = t.grid.center(state_of(t.grid, s.grid.center(k)));
    if (capture_test(ca, cd, s.capture_radius)) {
      ASSERT_TRUE(m[k]);
    }
  }
}
