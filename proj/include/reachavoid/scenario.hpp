#ifndef REACHAVOID_SCENARIO_HPP_
#define REACHAVOID_SCENARIO_HPP_

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reachavoid/grid.hpp"

namespace reachavoid {

inline constexpr int kScenarioSchemaVersion = 1;

struct PlayerState {
  Vec2 position{};
  double max_speed = 1.0;
  bool operator==(const PlayerState&) const = default;
};

struct JointState {
  std::vector<Vec2> attacker_positions;
  std::vector<Vec2> defender_positions;
  double time = 0.0;
};

//! A validated game instance. Immutable after load.
struct Scenario {
  std::string name;
  GridSpec grid;
  Mask obstacle;  // 1 = obstacle cell
  Mask target;    // 1 = target cell
  std::vector<PlayerState> attackers;
  std::vector<PlayerState> defenders;
  double capture_radius = 0.0;
  int m = 1;

  bool free(std::size_t idx) const { return obstacle[idx] == 0; }
  bool free(Cell c) const { return grid.contains(c) && !obstacle[grid.index(c)]; }
  //! Point lies inside the raster and its containing cell is free.
  bool free_point(Vec2 p) const {
    return grid.inside(p) && free(grid.cell_of(p));
  }
  bool in_target(Vec2 p) const {
    return grid.inside(p) && target[grid.index(grid.cell_of(p))] != 0;
  }
  Mask free_mask() const {
    Mask f(obstacle.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = obstacle[k] ? 0 : 1;
    return f;
  }
  JointState initial_state() const {
    JointState s;
    for (const auto& a : attackers) s.attacker_positions.push_back(a.position);
    for (const auto& d : defenders) s.defender_positions.push_back(d.position);
    return s;
  }
  bool operator==(const Scenario&) const = default;
};

struct LoadOptions {
  //! The path-defense construction presumes v_A <= v_D for every pair; the
  //! discrete oracle does not, so oracle-only runs may lift the check.
  bool allow_faster_attacker = false;
};

//! Euclidean capture predicate, inclusive on the disk boundary.
inline bool capture_test(Vec2 attacker, Vec2 defender, double capture_radius) {
  return distance(attacker, defender) <= capture_radius;
}

namespace detail {

inline void rasterize_shape(const GridSpec& g, const nlohmann::json& shape,
                            Mask& mask, const char* what) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError(std::string(what) + ": " + msg);
  };
  if (!shape.is_object() || shape.size() != 1) {
    fail("each shape must be an object with exactly one of rect/disk/cells/run");
  }
  const auto it = shape.begin();
  const std::string kind = it.key();
  const nlohmann::json& v = it.value();
  if (!v.is_array()) fail("shape '" + kind + "' expects an array");
  try {
    if (kind == "rect") {
      if (v.size() != 4) fail("rect expects [xmin, ymin, xmax, ymax]");
      const double x0 = v[0], y0 = v[1], x1 = v[2], y1 = v[3];
      for (std::size_t k = 0; k < g.size(); ++k) {
        Vec2 c = g.center(k);
        if (c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1) mask[k] = 1;
      }
    } else if (kind == "disk") {
      if (v.size() != 3) fail("disk expects [cx, cy, r]");
      const Vec2 ctr{v[0].get<double>(), v[1].get<double>()};
      const double r = v[2];
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (distance(g.center(k), ctr) <= r) mask[k] = 1;
      }
    } else if (kind == "cells") {
      if (v.size() != 4) fail("cells expects [i0, j0, i1, j1] (end exclusive)");
      const int i0 = v[0], j0 = v[1], i1 = v[2], j1 = v[3];
      for (int j = std::max(j0, 0); j < std::min(j1, g.height); ++j) {
        for (int i = std::max(i0, 0); i < std::min(i1, g.width); ++i) {
          mask[g.index(i, j)] = 1;
        }
      }
    } else if (kind == "run") {
      if (v.size() != 3) fail("run expects [row, col, length]");
      const int row = v[0], col = v[1], len = v[2];
      if (row < 0 || row >= g.height || col < 0 || len < 0 ||
          col + len > g.width) {
        fail("run out of grid bounds");
      }
      for (int i = col; i < col + len; ++i) mask[g.index(i, row)] = 1;
    } else {
      fail("unknown shape kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
}

inline Mask rasterize_list(const GridSpec& g, const nlohmann::json& doc,
                           const char* key) {
  Mask mask(g.size(), 0);
  if (!doc.contains(key)) return mask;
  const auto& list = doc.at(key);
  if (!list.is_array()) throw ValidationError(std::string(key) + " must be a list");
  for (const auto& shape : list) rasterize_shape(g, shape, mask, key);
  return mask;
}

inline std::vector<PlayerState> parse_players(const nlohmann::json& doc,
                                              const char* key) {
  std::vector<PlayerState> out;
  if (!doc.contains(key)) return out;
  const auto& list = doc.at(key);
  if (!list.is_array()) throw ValidationError(std::string(key) + " must be a list");
  for (const auto& p : list) {
    try {
      out.push_back({{p.at("x").get<double>(), p.at("y").get<double>()},
                     p.at("speed").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string(key) + ": " + e.what());
    }
  }
  return out;
}

inline nlohmann::json mask_runs(const GridSpec& g, const Mask& m) {
  nlohmann::json runs = nlohmann::json::array();
  for (int j = 0; j < g.height; ++j) {
    int i = 0;
    while (i < g.width) {
      if (!m[g.index(i, j)]) {
        ++i;
        continue;
      }
      int start = i;
      while (i < g.width && m[g.index(i, j)]) ++i;
      runs.push_back({{"run", {j, start, i - start}}});
    }
  }
  return runs;
}

}  // namespace detail

//! Checks every Scenario invariant; throws ValidationError on the first
//! violation.
inline void validate(const Scenario& s, const LoadOptions& opts = {}) {
  s.grid.validate();
  if (s.obstacle.size() != s.grid.size() || s.target.size() != s.grid.size()) {
    throw ValidationError("mask size does not match grid");
  }
  bool any_target = false;
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    if (s.target[k]) {
      any_target = true;
      if (s.obstacle[k]) throw ValidationError("target outside free space");
    }
  }
  if (!any_target) throw ValidationError("target set is empty");
  if (s.attackers.empty()) throw ValidationError("scenario needs at least one attacker");
  if (!(s.capture_radius >= 0.0) || !std::isfinite(s.capture_radius)) {
    throw ValidationError("capture_radius must be non-negative");
  }
  if (s.m <= 0 || s.m > static_cast<int>(s.attackers.size())) {
    throw ValidationError("m must satisfy 0 < m <= number of attackers");
  }
  auto check_player = [&](const PlayerState& p, const char* role, std::size_t i) {
    const std::string who = std::string(role) + " " + std::to_string(i);
    if (!(p.max_speed > 0.0) || !std::isfinite(p.max_speed)) {
      throw ValidationError(who + ": speed must be positive");
    }
    if (!s.grid.inside(p.position)) {
      throw ValidationError(who + ": position outside domain");
    }
    if (!s.free(s.grid.cell_of(p.position))) {
      throw ValidationError("player in obstacle: " + who);
    }
  };
  for (std::size_t i = 0; i < s.attackers.size(); ++i) check_player(s.attackers[i], "attacker", i);
  for (std::size_t i = 0; i < s.defenders.size(); ++i) check_player(s.defenders[i], "defender", i);
  if (!opts.allow_faster_attacker) {
    for (std::size_t i = 0; i < s.attackers.size(); ++i) {
      for (std::size_t j = 0; j < s.defenders.size(); ++j) {
        if (s.attackers[i].max_speed > s.defenders[j].max_speed) {
          throw ValidationError("attacker " + std::to_string(i) +
                                " is faster than defender " + std::to_string(j));
        }
      }
    }
  }
}

inline Scenario scenario_from_json(const nlohmann::json& doc,
                                   const LoadOptions& opts = {}) {
  if (!doc.is_object()) throw ValidationError("scenario document must be an object");
  if (!doc.contains("schema")) throw ValidationError("missing mandatory field 'schema'");
  if (!doc.at("schema").is_number_integer() ||
      doc.at("schema").get<int>() != kScenarioSchemaVersion) {
    throw ValidationError("unsupported schema version");
  }
  Scenario s;
  try {
    s.name = doc.value("name", std::string{});
    const auto& g = doc.at("grid");
    s.grid.width = g.at("width").get<int>();
    s.grid.height = g.at("height").get<int>();
    s.grid.cell_size = g.at("cell_size").get<double>();
    if (g.contains("origin")) {
      s.grid.origin = {g.at("origin").at(0).get<double>(),
                       g.at("origin").at(1).get<double>()};
    }
    s.grid.validate();
    s.capture_radius = doc.at("capture_radius").get<double>();
    s.m = doc.value("m", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schema violation: ") + e.what());
  }
  s.obstacle = detail::rasterize_list(s.grid, doc, "obstacles");
  s.target = detail::rasterize_list(s.grid, doc, "target");
  s.attackers = detail::parse_players(doc, "attackers");
  s.defenders = detail::parse_players(doc, "defenders");
  validate(s, opts);
  return s;
}

inline Scenario load_scenario(const std::string& text,
                              const LoadOptions& opts = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  return scenario_from_json(doc, opts);
}

inline Scenario load_scenario_file(const std::string& path,
                                   const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str(), opts);
}

//! Canonical document: masks are written as row runs, so loading the result
//! reproduces the same rasters exactly.
inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json doc;
  doc["schema"] = kScenarioSchemaVersion;
  if (!s.name.empty()) doc["name"] = s.name;
  doc["grid"] = {{"width", s.grid.width},
                 {"height", s.grid.height},
                 {"cell_size", s.grid.cell_size},
                 {"origin", {s.grid.origin.x, s.grid.origin.y}}};
  doc["obstacles"] = detail::mask_runs(s.grid, s.obstacle);
  doc["target"] = detail::mask_runs(s.grid, s.target);
  auto players = [](const std::vector<PlayerState>& ps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : ps) {
      arr.push_back({{"x", p.position.x}, {"y", p.position.y}, {"speed", p.max_speed}});
    }
    return arr;
  };
  doc["attackers"] = players(s.attackers);
  doc["defenders"] = players(s.defenders);
  doc["capture_radius"] = s.capture_radius;
  doc["m"] = s.m;
  return doc;
}

inline std::string serialize(const Scenario& s) { return to_json(s).dump(2); }

//! FNV-1a over the canonical serialization.
inline std::uint64_t scenario_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

//! Free cells on the rectangle's outer edge, in counterclockwise order
//! starting from the bottom-left corner. Edge runs blocked by obstacles are
//! skipped, so the list is a closed 8-connected cycle only when the whole
//! rim is free.
inline std::vector<std::size_t> boundary_cells(const Scenario& s) {
  const GridSpec& g = s.grid;
  std::vector<std::size_t> out;
  auto push = [&](int i, int j) {
    std::size_t idx = g.index(i, j);
    if (!s.obstacle[idx]) out.push_back(idx);
  };
  for (int i = 0; i < g.width; ++i) push(i, 0);
  for (int j = 1; j < g.height; ++j) push(g.width - 1, j);
  for (int i = g.width - 2; i >= 0; --i) push(i, g.height - 1);
  for (int j = g.height - 2; j >= 1; --j) push(0, j);
  if (out.empty()) throw ValidationError("free space does not reach the domain boundary");
  return out;
}

}  // namespace reachavoid

#endif  // REACHAVOID_SCENARIO_HPP_
