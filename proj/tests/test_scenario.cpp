#include <gtest/gtest.h>

#include "support.hpp"

using namespace reachavoid;

namespace {

const char* kMinimal = R"({
  "schema": 1,
  "grid": {"width": 10, "height": 10, "cell_size": 1.0},
  "target": [{"cells": [4, 4, 6, 6]}],
  "attackers": [{"x": 2.5, "y": 2.5, "speed": 1}],
  "defenders": [{"x": 8.5, "y": 8.5, "speed": 1}],
  "capture_radius": 0.1,
  "m": 1
})";

nlohmann::json minimal() { return nlohmann::json::parse(kMinimal); }

std::string error_of(const nlohmann::json& doc) {
  try {
    scenario_from_json(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(LoadScenario, MinimalDocumentIsValid) {
  const Scenario s = load_scenario(kMinimal);
  EXPECT_EQ(s.grid.width, 10);
  EXPECT_EQ(count(s.target), 4u);
  EXPECT_EQ(count(s.obstacle), 0u);
  EXPECT_EQ(s.attackers.size(), 1u);
  EXPECT_DOUBLE_EQ(s.capture_radius, 0.1);
}

TEST(LoadScenario, PlayerInObstacleIsRejected) {
  auto doc = minimal();
  doc["obstacles"] = {{{"cells", {2, 2, 3, 3}}}};
  EXPECT_NE(error_of(doc).find("player in obstacle"), std::string::npos);
}

TEST(LoadScenario, FourOnFourWithBenchmarkCaptureRadius) {
  const Scenario s = ratest::load("bench_4v4");
  EXPECT_EQ(s.attackers.size(), 4u);
  EXPECT_EQ(s.defenders.size(), 4u);
  EXPECT_DOUBLE_EQ(s.capture_radius, 0.1);
}

TEST(LoadScenario, ValidationErrors) {
  auto doc = minimal();
  doc.erase("schema");
  EXPECT_NE(error_of(doc).find("schema"), std::string::npos);

  doc = minimal();
  doc["schema"] = 2;
  EXPECT_FALSE(error_of(doc).empty());

  doc = minimal();
  doc["target"] = nlohmann::json::array();
  EXPECT_NE(error_of(doc).find("target set is empty"), std::string::npos);

  doc = minimal();
  doc["obstacles"] = {{{"cells", {4, 4, 5, 5}}}};
  EXPECT_NE(error_of(doc).find("target outside free space"), std::string::npos);

  doc = minimal();
  doc["attackers"][0]["speed"] = 2.0;
  EXPECT_NE(error_of(doc).find("faster"), std::string::npos);
  EXPECT_NO_THROW(scenario_from_json(doc, LoadOptions{true}));

  doc = minimal();
  doc["m"] = 2;
  EXPECT_FALSE(error_of(doc).empty());

  doc = minimal();
  doc["defenders"][0]["x"] = 11.0;
  EXPECT_NE(error_of(doc).find("outside"), std::string::npos);

  doc = minimal();
  doc["obstacles"] = {{{"ellipse", {1, 2, 3}}}};
  EXPECT_NE(error_of(doc).find("unknown shape"), std::string::npos);

  EXPECT_THROW(load_scenario("{not json"), ValidationError);
}

TEST(LoadScenario, ShapesRasterizeByCellCentre) {
  auto doc = minimal();
  doc["obstacles"] = {{{"rect", {0.0, 6.0, 2.0, 7.0}}},
                      {{"disk", {8.5, 1.5, 0.6}}},
                      {{"run", {9, 0, 3}}}};
  const Scenario s = scenario_from_json(doc);
  // rect covers centres x in {0.5, 1.5}, y in {6.5}
  EXPECT_TRUE(s.obstacle[s.grid.index(0, 6)]);
  EXPECT_TRUE(s.obstacle[s.grid.index(1, 6)]);
  EXPECT_FALSE(s.obstacle[s.grid.index(2, 6)]);
  EXPECT_FALSE(s.obstacle[s.grid.index(0, 7)]);
  EXPECT_TRUE(s.obstacle[s.grid.index(8, 1)]);
  EXPECT_EQ(count(s.obstacle), 2u + 1u + 3u);
}

TEST(Serialize, RoundTripIsExact) {
  for (const auto& name : ratest::benchmarks()) {
    const Scenario s = ratest::load(name);
    const Scenario r = load_scenario(serialize(s));
    EXPECT_EQ(r, s) << name;
    EXPECT_EQ(scenario_hash(r), scenario_hash(s));
  }
}

TEST(Serialize, HashTracksContent) {
  Scenario a = ratest::load("bench_two_blocks");
  Scenario b = a;
  b.capture_radius = 0.11;
  EXPECT_NE(scenario_hash(a), scenario_hash(b));
  EXPECT_EQ(hash_hex(scenario_hash(a)).size(), 16u);
}

TEST(CaptureTest, Examples) {
  EXPECT_TRUE(capture_test({0, 0}, {0, 0.1}, 0.1));
  EXPECT_FALSE(capture_test({0, 0}, {0, 0.1001}, 0.1));
  EXPECT_TRUE(capture_test({1, 1}, {1.05, 1.08}, 0.1));  // distance ~0.0943
}

TEST(CaptureTest, Symmetric) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int n = 0; n < 500; ++n) {
    const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const double r = std::abs(u(rng));
    EXPECT_EQ(capture_test(a, b, r), capture_test(b, a, r));
  }
}

TEST(BoundaryCells, EmptyTenByTenIs36EdgeCellsCcw) {
  const Scenario s = load_scenario(kMinimal);
  const auto b = boundary_cells(s);
  ASSERT_EQ(b.size(), 36u);
  const GridSpec& g = s.grid;
  EXPECT_EQ(g.cell(b[0]), (Cell{0, 0}));
  EXPECT_EQ(g.cell(b[9]), (Cell{9, 0}));
  EXPECT_EQ(g.cell(b[18]), (Cell{9, 9}));
  EXPECT_EQ(g.cell(b[27]), (Cell{0, 9}));
  EXPECT_EQ(g.cell(b[35]), (Cell{0, 1}));
  // Closed 8-connected cycle, including last -> first.
  for (std::size_t k = 0; k < b.size(); ++k) {
    const Cell p = g.cell(b[k]), q = g.cell(b[(k + 1) % b.size()]);
    EXPECT_LE(std::max(std::abs(p.i - q.i), std::abs(p.j - q.j)), 1);
  }
  // Counterclockwise: positive signed area.
  double area = 0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const Vec2 p = g.center(b[k]), q = g.center(b[(k + 1) % b.size()]);
    area += p.x * q.y - q.x * p.y;
  }
  EXPECT_GT(area, 0.0);
}

TEST(BoundaryCells, FullyBlockedRimThrows) {
  Scenario s = ratest::blank(6, 6, 1.0);
  for (int i = 0; i < 6; ++i) {
    s.obstacle[s.grid.index(i, 0)] = s.obstacle[s.grid.index(i, 5)] = 1;
    s.obstacle[s.grid.index(0, i)] = s.obstacle[s.grid.index(5, i)] = 1;
  }
  EXPECT_THROW(boundary_cells(s), ValidationError);
}

TEST(BoundaryCells, LShapedFreeSpace) {
  // 6x6 with the top-right 3x3 quadrant blocked.
  Scenario s = ratest::blank(6, 6, 1.0);
  for (int j = 3; j < 6; ++j) {
    for (int i = 3; i < 6; ++i) s.obstacle[s.grid.index(i, j)] = 1;
  }
  const auto b = boundary_cells(s);
  const std::vector<Cell> expect{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {5, 1}, {5, 2},
                                 {2, 5}, {1, 5}, {0, 5}, {0, 4}, {0, 3}, {0, 2}, {0, 1}};
  ASSERT_EQ(b.size(), expect.size());
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_EQ(s.grid.cell(b[k]), expect[k]);
}

TEST(BoundaryCells, BenchmarksAreClosedCycles) {
  for (const auto& name : ratest::benchmarks()) {
    const Scenario s = ratest::load(name);
    const auto b = boundary_cells(s);
    for (std::size_t k = 0; k < b.size(); ++k) {
      const Cell p = s.grid.cell(b[k]), q = s.grid.cell(b[(k + 1) % b.size()]);
      ASSERT_LE(std::max(std::abs(p.i - q.i), std::abs(p.j - q.j)), 1) << name;
      ASSERT_FALSE(s.obstacle[b[k]]);
    }
  }
}
