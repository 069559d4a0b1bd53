#ifndef REACHAVOID_TESTS_SUPPORT_HPP_
#define REACHAVOID_TESTS_SUPPORT_HPP_

// Independent reference implementations and fixtures shared by the unit
// tests and the acceptance binary. Nothing here calls the code under test
// except for Scenario construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "reachavoid/reachavoid.hpp"

namespace ratest {

using namespace reachavoid;

inline std::string scenario_path(const std::string& name) {
  return std::string(SCENARIO_DIR) + "/" + name + ".json";
}

inline Scenario load(const std::string& name, bool allow_faster = false) {
  return load_scenario_file(scenario_path(name), LoadOptions{allow_faster});
}

// The five benchmark geometries (bench_4v4 shares bench_two_blocks' map).
inline const std::vector<std::string>& benchmarks() {
  static const std::vector<std::string> names{"bench_two_blocks", "bench_empty",
                                              "bench_large_obstacle", "bench_walls",
                                              "bench_corner_target"};
  return names;
}

inline Scenario blank(int w, int h, double cell, Vec2 origin = {0.0, 0.0}) {
  Scenario s;
  s.grid = GridSpec{w, h, cell, origin};
  s.obstacle.assign(s.grid.size(), 0);
  s.target.assign(s.grid.size(), 0);
  s.capture_radius = 0.1;
  return s;
}

// 20x3 corridor, h = 0.1; top and bottom rows blocked, target = last free
// cell. R_c = 0.15 covers exactly one neighbouring cell.
inline Scenario corridor() {
  Scenario s = blank(20, 3, 0.1);
  for (int i = 0; i < 20; ++i) {
    s.obstacle[s.grid.index(i, 0)] = 1;
    s.obstacle[s.grid.index(i, 2)] = 1;
  }
  s.target[s.grid.index(19, 1)] = 1;
  s.capture_radius = 0.15;
  s.attackers = {{s.grid.center(Cell{2, 1}), 1.0}};
  s.defenders = {{s.grid.center(Cell{10, 1}), 1.0}};
  validate(s);
  return s;
}

// 12x12 open square, h = 0.1, centred 2x2 target.
inline Scenario empty_square() {
  Scenario s = blank(12, 12, 0.1);
  for (int j = 5; j <= 6; ++j) {
    for (int i = 5; i <= 6; ++i) s.target[s.grid.index(i, j)] = 1;
  }
  s.capture_radius = 0.15;
  s.attackers = {{{0.15, 0.15}, 1.0}};
  s.defenders = {{{0.85, 0.85}, 1.0}};
  validate(s);
  return s;
}

// Random axis-aligned blocks on a w x w grid; the centre cell stays free.
inline Mask random_obstacles(const GridSpec& g, std::mt19937& rng, int blocks) {
  Mask m(g.size(), 0);
  std::uniform_int_distribution<int> pos(0, g.width - 1), len(2, g.width / 5);
  for (int b = 0; b < blocks; ++b) {
    const int i0 = pos(rng), j0 = pos(rng), wi = len(rng), hj = len(rng);
    for (int j = j0; j < std::min(g.height, j0 + hj); ++j) {
      for (int i = i0; i < std::min(g.width, i0 + wi); ++i) m[g.index(i, j)] = 1;
    }
  }
  m[g.index(g.width / 2, g.height / 2)] = 0;
  return m;
}

// Dijkstra over the 16-neighbour stencil {(1,0),(1,1),(2,1),...} with edges
// admitted only when the segment between centres is clear, followed by an
// any-angle relaxation: a node may take its parent's parent directly when
// the straight segment is clear. Returns +inf where unreachable.
inline std::vector<double> dijkstra16(const GridSpec& g, const Mask& obstacle,
                                      std::size_t source) {
  static const int kOff[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1},
                                  {-1, 1}, {-1, -1}, {2, 1}, {2, -1}, {-2, 1}, {-2, -1},
                                  {1, 2},  {1, -2}, {-1, 2}, {-1, -2}};
  const double h = g.cell_size;
  std::vector<double> dist(g.size(), kInf);
  std::vector<std::size_t> parent(g.size(), source);
  std::vector<char> done(g.size(), 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  auto clear = [&](std::size_t a, std::size_t b) {
    for (Cell c : supercover(g, g.center(a), g.center(b))) {
      if (obstacle[g.index(c)]) return false;
    }
    return true;
  };
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    const Cell cu = g.cell(u);
    for (const auto& o : kOff) {
      const Cell cv{cu.i + o[0], cu.j + o[1]};
      if (!g.contains(cv)) continue;
      const std::size_t v = g.index(cv);
      if (obstacle[v] || done[v]) continue;
      // Any-angle shortcut through u's parent.
      const std::size_t p = parent[u];
      if (p != u && clear(p, v)) {
        const double alt = dist[p] + distance(g.center(p), g.center(v));
        if (alt < dist[v] - 1e-12) {
          dist[v] = alt;
          parent[v] = p;
          pq.push({alt, v});
        }
        continue;
      }
      if (!clear(u, v)) continue;
      const double alt = du + std::hypot(o[0], o[1]) * h;
      if (alt < dist[v] - 1e-12) {
        dist[v] = alt;
        parent[v] = u;
        pq.push({alt, v});
      }
    }
  }
  return dist;
}

// Maximum matching by exhaustive search over defender assignments.
inline int brute_force_matching(const std::vector<std::vector<std::uint8_t>>& w) {
  const int nd = static_cast<int>(w.size());
  const int na = nd ? static_cast<int>(w[0].size()) : 0;
  std::vector<char> used(na, 0);
  std::function<int(int)> go = [&](int i) -> int {
    if (i == nd) return 0;
    int best = go(i + 1);
    for (int j = 0; j < na; ++j) {
      if (!w[i][j] || used[j]) continue;
      used[j] = 1;
      best = std::max(best, 1 + go(i + 1));
      used[j] = 0;
    }
    return best;
  };
  return go(0);
}

inline PairwiseOutcomeMatrix to_matrix(const std::vector<std::vector<std::uint8_t>>& w) {
  const int nd = static_cast<int>(w.size());
  const int na = nd ? static_cast<int>(w[0].size()) : 0;
  PairwiseOutcomeMatrix m(nd, na);
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < na; ++j) m.set(i, j, w[i][j] != 0, Provenance::PD);
  }
  return m;
}

// One-dimensional version of the discrete game on a corridor of n cells,
// solved by naive value iteration over (a, d) pairs. Moves reach r cells,
// capture within c cells, target = cell n-1. Returns defender_wins[a][d].
inline std::vector<std::vector<char>> corridor_game(int n, int r_a, int r_d, int c) {
  std::vector<std::vector<char>> attacker_wins(n, std::vector<char>(n, 0));
  auto terminal_attacker = [&](int a, int d) { return a == n - 1 && std::abs(a - d) > c; };
  auto captured = [&](int a, int d) { return std::abs(a - d) <= c; };
  for (int a = 0; a < n; ++a) {
    for (int d = 0; d < n; ++d) attacker_wins[a][d] = terminal_attacker(a, d);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int a = 0; a < n; ++a) {
      for (int d = 0; d < n; ++d) {
        if (attacker_wins[a][d] || captured(a, d) || a == n - 1) continue;
        bool win = false;
        for (int a1 = std::max(0, a - r_a); a1 <= std::min(n - 1, a + r_a) && !win; ++a1) {
          bool all = true;
          for (int d1 = std::max(0, d - r_d); d1 <= std::min(n - 1, d + r_d) && all; ++d1) {
            all = attacker_wins[a1][d1] != 0;
          }
          win = all;
        }
        if (win) {
          attacker_wins[a][d] = 1;
          changed = true;
        }
      }
    }
  }
  std::vector<std::vector<char>> out(n, std::vector<char>(n));
  for (int a = 0; a < n; ++a) {
    for (int d = 0; d < n; ++d) out[a][d] = !attacker_wins[a][d];
  }
  return out;
}

// Deterministic free attacker positions at coarse-cell centres, away from
// the target.
inline std::vector<Vec2> sample_attackers(const Scenario& s, int count, unsigned seed, int k,
                                          double min_target_gap) {
  const JointGrid jg = make_joint_grid(s, k);
  const DistanceField tf = solve(make_domain(s), s.target);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(jg.states() - 1));
  std::vector<Vec2> out;
  for (int guard = 0; static_cast<int>(out.size()) < count && guard < 100000; ++guard) {
    const Vec2 p = jg.center(pick(rng));
    if (!s.free_point(p)) continue;
    const double d = distance_to(tf, p);
    if (!std::isfinite(d) || d <= min_target_gap) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace ratest

#endif  // REACHAVOID_TESTS_SUPPORT_HPP_
