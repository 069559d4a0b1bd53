#ifndef REACHAVOID_EIKONAL_HPP_
#define REACHAVOID_EIKONAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "reachavoid/grid.hpp"
#include "reachavoid/scenario.hpp"

namespace reachavoid {

//! Accuracy slack shared by tests and acceptance checks, in cell sizes.
inline constexpr double kFieldTolCells = 2.0;  // field vs. analytic/oracle
inline constexpr double kPathTolCells = 4.0;   // path lengths, triangle checks

//! The raster the solver marches over: grid layout plus a shared obstacle
//! mask. Cheap to copy.
struct Domain {
  GridSpec grid;
  std::shared_ptr<const Mask> obstacle;

  bool free(std::size_t idx) const { return (*obstacle)[idx] == 0; }
  bool free(Cell c) const { return grid.contains(c) && free(grid.index(c)); }
  bool free_point(Vec2 p) const { return grid.inside(p) && free(grid.cell_of(p)); }
};

inline Domain make_domain(const Scenario& s) {
  return {s.grid, std::make_shared<const Mask>(s.obstacle)};
}

inline Domain make_domain(const GridSpec& g, Mask obstacle) {
  return {g, std::make_shared<const Mask>(std::move(obstacle))};
}

//! Solution of |grad u| = 1 on the free cells of a Domain.
struct DistanceField {
  Domain domain;
  std::vector<double> values;  // +inf in obstacles and unreached cells
  std::vector<std::size_t> sources;
  std::optional<Vec2> source_point;  // set for point-seeded fields

  const GridSpec& grid() const { return domain.grid; }
  double at(std::size_t idx) const { return values[idx]; }
  double at(Cell c) const { return values[domain.grid.index(c)]; }
};

//! A seed fixes a cell's arrival value before marching.
struct Seed {
  std::size_t cell;
  double value;
};

namespace detail {

struct Neighbor {
  int di, dj;
};
inline constexpr std::array<Neighbor, 8> kNeighbors8{{{1, 0},
                                                      {-1, 0},
                                                      {0, 1},
                                                      {0, -1},
                                                      {1, 1},
                                                      {-1, 1},
                                                      {1, -1},
                                                      {-1, -1}}};

//! Diagonal moves may not cut an obstacle corner.
inline bool diagonal_ok(const Domain& d, Cell c, int di, int dj) {
  return d.free(Cell{c.i + di, c.j}) && d.free(Cell{c.i, c.j + dj});
}

//! Upwind solution of the two-neighbour quadratic with spacing `step`.
inline double quadratic_update(double a, double b, double step) {
  if (a > b) std::swap(a, b);
  if (!std::isfinite(a)) return kInf;
  if (!std::isfinite(b) || b - a >= step) return a + step;
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(2.0 * step * step - d * d));
}

//! Update for cell c from neighbours accepted so far. `accepted(idx)` tells
//! whether a neighbour value may be used.
template <typename Accepted>
double local_update(const Domain& d, const std::vector<double>& u, Cell c,
                    Accepted&& accepted) {
  const GridSpec& g = d.grid;
  const double h = g.cell_size;
  auto val = [&](int di, int dj) -> double {
    Cell n{c.i + di, c.j + dj};
    if (!d.free(n)) return kInf;
    std::size_t idx = g.index(n);
    return accepted(idx) ? u[idx] : kInf;
  };
  auto dval = [&](int di, int dj) -> double {
    if (!diagonal_ok(d, c, di, dj)) return kInf;
    return val(di, dj);
  };
  const double ortho = quadratic_update(std::min(val(-1, 0), val(1, 0)),
                                        std::min(val(0, -1), val(0, 1)), h);
  // Same stencil rotated by 45 degrees: axes along the diagonals.
  const double diag =
      quadratic_update(std::min(dval(-1, -1), dval(1, 1)),
                       std::min(dval(1, -1), dval(-1, 1)), h * std::sqrt(2.0));
  return std::min(ortho, diag);
}

}  // namespace detail

//! First-order fast marching from the given seeds. Cells whose arrival value
//! would exceed `max_value` are left at +inf.
inline DistanceField march(const Domain& d, const std::vector<Seed>& seeds,
                           double max_value = kInf) {
  const GridSpec& g = d.grid;
  DistanceField f{d, std::vector<double>(g.size(), kInf), {}, std::nullopt};
  enum : std::uint8_t { kFar = 0, kTrial = 1, kKnown = 2 };
  std::vector<std::uint8_t> state(g.size(), kFar);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  for (const Seed& s : seeds) {
    if (!d.free(s.cell)) continue;
    if (s.value < f.values[s.cell]) {
      f.values[s.cell] = s.value;
      state[s.cell] = kTrial;
      heap.push({s.value, s.cell});
    }
  }
  for (const Seed& s : seeds) {
    if (d.free(s.cell) && f.values[s.cell] == s.value) f.sources.push_back(s.cell);
  }
  std::sort(f.sources.begin(), f.sources.end());
  f.sources.erase(std::unique(f.sources.begin(), f.sources.end()), f.sources.end());

  auto is_known = [&](std::size_t idx) { return state[idx] == kKnown; };
  while (!heap.empty()) {
    auto [v, idx] = heap.top();
    heap.pop();
    if (state[idx] == kKnown || v > f.values[idx]) continue;
    if (v > max_value) break;
    state[idx] = kKnown;
    const Cell c = g.cell(idx);
    for (const auto& nb : detail::kNeighbors8) {
      Cell n{c.i + nb.di, c.j + nb.dj};
      if (!d.free(n)) continue;
      const std::size_t nidx = g.index(n);
      if (state[nidx] == kKnown) continue;
      const double cand = detail::local_update(d, f.values, n, is_known);
      if (cand < f.values[nidx]) {
        f.values[nidx] = cand;
        state[nidx] = kTrial;
        heap.push({cand, nidx});
      }
    }
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (state[k] != kKnown) f.values[k] = kInf;
  }
  return f;
}

//! Zero-valued multi-source solve over a set of cells.
inline DistanceField solve(const Domain& d, const std::vector<std::size_t>& cells,
                           double max_value = kInf) {
  std::vector<Seed> seeds;
  seeds.reserve(cells.size());
  for (std::size_t c : cells) {
    if (d.free(c)) seeds.push_back({c, 0.0});
  }
  if (seeds.empty()) throw ValidationError("eikonal source is empty after masking");
  return march(d, seeds, max_value);
}

inline DistanceField solve(const Domain& d, const Mask& source_mask,
                           double max_value = kInf) {
  std::vector<std::size_t> cells;
  for (std::size_t k = 0; k < source_mask.size(); ++k) {
    if (source_mask[k]) cells.push_back(k);
  }
  return solve(d, cells, max_value);
}

//! Cells of the rasterized disk (centres within radius, plus the cell holding
//! the centre), restricted to free space.
inline std::vector<std::size_t> disk_cells(const Domain& d, Vec2 center,
                                           double radius) {
  const GridSpec& g = d.grid;
  std::vector<std::size_t> out;
  const Cell c0 = g.cell_of(center);
  const int r = static_cast<int>(std::ceil(radius / g.cell_size)) + 1;
  for (int j = c0.j - r; j <= c0.j + r; ++j) {
    for (int i = c0.i - r; i <= c0.i + r; ++i) {
      Cell c{i, j};
      if (!d.free(c)) continue;
      if ((i == c0.i && j == c0.j) || distance(g.center(c), center) <= radius) {
        out.push_back(g.index(c));
      }
    }
  }
  return out;
}

inline DistanceField solve_disk(const Domain& d, Vec2 center, double radius,
                                double max_value = kInf) {
  auto cells = disk_cells(d, center, radius);
  if (cells.empty()) throw ValidationError("disk source lies entirely in obstacles");
  return solve(d, cells, max_value);
}

//! Point source: the 3x3 block around p is seeded with exact Euclidean
//! distances where the straight segment is clear.
inline DistanceField solve_point(const Domain& d, Vec2 p, double max_value = kInf) {
  const GridSpec& g = d.grid;
  if (!d.free_point(p)) throw ValidationError("point source " + to_string(p) + " is not in free space");
  const Cell c0 = g.cell_of(p);
  std::vector<Seed> seeds;
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      Cell c{c0.i + di, c0.j + dj};
      if (!d.free(c)) continue;
      if ((di != 0 || dj != 0) && !segment_clear(g, *d.obstacle, p, g.center(c))) continue;
      seeds.push_back({g.index(c), distance(g.center(c), p)});
    }
  }
  DistanceField f = march(d, seeds, max_value);
  f.source_point = p;
  return f;
}

//! Interpolated field value at a world point. Throws for points in obstacles.
inline double distance_to(const DistanceField& f, Vec2 x) {
  const GridSpec& g = f.grid();
  if (!f.domain.free_point(x)) {
    throw ValidationError("query point " + to_string(x) + " is in an obstacle");
  }
  Vec2 q = g.to_grid(x);
  q.x = std::clamp(q.x, 0.0, static_cast<double>(g.width - 1));
  q.y = std::clamp(q.y, 0.0, static_cast<double>(g.height - 1));
  const int i0 = std::min(static_cast<int>(std::floor(q.x)), g.width - 2);
  const int j0 = std::min(static_cast<int>(std::floor(q.y)), g.height - 2);
  const double tx = q.x - i0, ty = q.y - j0;
  const std::array<Cell, 4> cells{{{i0, j0}, {i0 + 1, j0}, {i0, j0 + 1}, {i0 + 1, j0 + 1}}};
  const std::array<double, 4> w{(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  double acc = 0.0;
  bool all_finite = true;
  for (int k = 0; k < 4; ++k) {
    const double v = f.at(cells[k]);
    if (!std::isfinite(v)) {
      if (w[k] > 0.0) all_finite = false;
      continue;
    }
    acc += w[k] * v;
  }
  if (all_finite) return acc;
  // Stencil straddles an obstacle or the unreached region: fall back to the
  // best finite neighbour plus the straight hop to it.
  double best = kInf;
  for (const Cell& c : cells) {
    const double v = f.at(c);
    if (std::isfinite(v)) best = std::min(best, v + distance(g.center(c), x));
  }
  return best;
}

inline double travel_time(const DistanceField& f, Vec2 x, double speed) {
  if (!(speed > 0.0)) throw ValidationError("speed must be positive");
  return distance_to(f, x) / speed;
}

struct PathPolyline {
  std::vector<Vec2> vertices;
  double length = 0.0;

  bool empty() const { return vertices.empty(); }
};

inline double polyline_length(const std::vector<Vec2>& v) {
  double len = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) len += distance(v[k - 1], v[k]);
  return len;
}

//! Cells visited by steepest discrete descent from `from` down to a local
//! minimum of the field (a source cell).
inline std::vector<std::size_t> descent_cells(const DistanceField& f, Cell from) {
  const Domain& d = f.domain;
  const GridSpec& g = d.grid;
  std::vector<std::size_t> out;
  Cell c = from;
  out.push_back(g.index(c));
  const std::size_t guard = g.size();
  for (std::size_t step = 0; step < guard; ++step) {
    const double cur = f.at(c);
    double best_slope = 0.0;
    Cell best = c;
    for (const auto& nb : detail::kNeighbors8) {
      Cell n{c.i + nb.di, c.j + nb.dj};
      if (!d.free(n)) continue;
      if (nb.di != 0 && nb.dj != 0 && !detail::diagonal_ok(d, c, nb.di, nb.dj)) continue;
      const double v = f.at(n);
      if (!std::isfinite(v)) continue;
      const double slope = (cur - v) / std::hypot(nb.di, nb.dj);
      if (slope > best_slope) {
        best_slope = slope;
        best = n;
      }
    }
    if (best == c) break;
    c = best;
    out.push_back(g.index(c));
  }
  return out;
}

//! Greedy line-of-sight shortcutting followed by resampling so consecutive
//! vertices are at most one cell apart.
inline std::vector<Vec2> taut_polyline(const Domain& d, const std::vector<Vec2>& raw) {
  if (raw.size() <= 2) return raw;
  std::vector<Vec2> pulled{raw.front()};
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = i + 1;
    while (j + 1 < raw.size() && segment_clear(d.grid, *d.obstacle, raw[i], raw[j + 1])) ++j;
    pulled.push_back(raw[j]);
    i = j;
  }
  const double h = d.grid.cell_size;
  std::vector<Vec2> out{pulled.front()};
  for (std::size_t k = 1; k < pulled.size(); ++k) {
    const Vec2 a = pulled[k - 1], b = pulled[k];
    const int pieces = std::max(1, static_cast<int>(std::ceil(distance(a, b) / h)));
    for (int s = 1; s <= pieces; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / pieces));
  }
  return out;
}

//! Shortest path from `from` back to the field's source.
inline PathPolyline extract_path(const DistanceField& f, Vec2 from) {
  const double d0 = distance_to(f, from);
  if (!std::isfinite(d0)) throw ValidationError("path start " + to_string(from) + " is unreachable");
  const GridSpec& g = f.grid();
  std::vector<Vec2> raw{from};
  const Cell start = g.cell_of(from);
  bool at_source = std::find(f.sources.begin(), f.sources.end(), g.index(start)) != f.sources.end();
  if (f.source_point && distance(*f.source_point, from) <= 1e-12) {
    return {{from}, 0.0};
  }
  if (!f.source_point && at_source) return {{from}, 0.0};
  for (std::size_t idx : descent_cells(f, start)) raw.push_back(g.center(idx));
  if (f.source_point && segment_clear(g, *f.domain.obstacle, raw.back(), *f.source_point)) {
    raw.push_back(*f.source_point);
  }
  // Drop duplicate consecutive points (from may coincide with a centre).
  raw.erase(std::unique(raw.begin(), raw.end(),
                        [](Vec2 a, Vec2 b) { return distance(a, b) < 1e-12; }),
            raw.end());
  PathPolyline p;
  p.vertices = taut_polyline(f.domain, raw);
  p.length = polyline_length(p.vertices);
  return p;
}

}  // namespace reachavoid

#endif  // REACHAVOID_EIKONAL_HPP_
