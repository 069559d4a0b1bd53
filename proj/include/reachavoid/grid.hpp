#ifndef REACHAVOID_GRID_HPP_
#define REACHAVOID_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reachavoid {

//! Thrown for malformed inputs: bad scenario documents, positions inside
//! obstacles, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

//! Thrown when a computation would exceed its configured memory budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

//! Integer cell coordinate; (0,0) is the bottom-left cell.
struct Cell {
  int i = 0;  // column
  int j = 0;  // row
  constexpr bool operator==(const Cell&) const = default;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

//! Uniform cell-centred raster over an axis-aligned rectangle. Storage is
//! row-major with row 0 at the bottom.
struct GridSpec {
  int width = 0;
  int height = 0;
  double cell_size = 1.0;
  Vec2 origin{};

  void validate() const {
    if (width < 3 || height < 3) {
      throw ValidationError("grid must be at least 3x3 cells");
    }
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
      throw ValidationError("grid cell_size must be positive");
    }
  }

  std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(Cell c) const {
    return c.i >= 0 && c.j >= 0 && c.i < width && c.j < height;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.j) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(c.i);
  }
  std::size_t index(int i, int j) const { return index(Cell{i, j}); }
  Cell cell(std::size_t idx) const {
    return {static_cast<int>(idx % static_cast<std::size_t>(width)),
            static_cast<int>(idx / static_cast<std::size_t>(width))};
  }

  Vec2 center(Cell c) const {
    return {origin.x + (c.i + 0.5) * cell_size,
            origin.y + (c.j + 0.5) * cell_size};
  }
  Vec2 center(std::size_t idx) const { return center(cell(idx)); }

  //! Continuous grid coordinates: cell centres sit at integer values.
  Vec2 to_grid(Vec2 p) const {
    return {(p.x - origin.x) / cell_size - 0.5,
            (p.y - origin.y) / cell_size - 0.5};
  }
  Vec2 to_world(Vec2 g) const {
    return {origin.x + (g.x + 0.5) * cell_size,
            origin.y + (g.y + 0.5) * cell_size};
  }

  //! Cell containing p, clamped to the raster.
  Cell cell_of(Vec2 p) const {
    int i = static_cast<int>(std::floor((p.x - origin.x) / cell_size));
    int j = static_cast<int>(std::floor((p.y - origin.y) / cell_size));
    return {std::clamp(i, 0, width - 1), std::clamp(j, 0, height - 1)};
  }
  bool inside(Vec2 p) const {
    return p.x >= origin.x && p.y >= origin.y &&
           p.x <= origin.x + width * cell_size &&
           p.y <= origin.y + height * cell_size;
  }
  Vec2 extent() const { return {width * cell_size, height * cell_size}; }

  bool operator==(const GridSpec&) const = default;
};

//! Boolean raster sharing a GridSpec layout.
using Mask = std::vector<std::uint8_t>;

inline std::size_t count(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(
      m.begin(), m.end(), [](std::uint8_t v) { return v != 0; }));
}

//! Cells touched by the segment a-b (supercover traversal in grid
//! coordinates). Consecutive cells share an edge.
inline std::vector<Cell> supercover(const GridSpec& g, Vec2 a, Vec2 b) {
  std::vector<Cell> out;
  Vec2 ga = g.to_grid(a);
  Vec2 gb = g.to_grid(b);
  // Shift so cell (i,j) spans [i, i+1) in each axis.
  double x0 = ga.x + 0.5, y0 = ga.y + 0.5;
  double x1 = gb.x + 0.5, y1 = gb.y + 0.5;
  int i = static_cast<int>(std::floor(x0));
  int j = static_cast<int>(std::floor(y0));
  const int iend = static_cast<int>(std::floor(x1));
  const int jend = static_cast<int>(std::floor(y1));
  const double dx = x1 - x0, dy = y1 - y0;
  const int si = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sj = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double tdx = si != 0 ? std::abs(1.0 / dx) : kInf;
  const double tdy = sj != 0 ? std::abs(1.0 / dy) : kInf;
  double tmx = si > 0 ? (std::floor(x0) + 1 - x0) * tdx
               : si < 0 ? (x0 - std::floor(x0)) * tdx
                        : kInf;
  double tmy = sj > 0 ? (std::floor(y0) + 1 - y0) * tdy
               : sj < 0 ? (y0 - std::floor(y0)) * tdy
                        : kInf;
  out.push_back({i, j});
  const int max_steps = std::abs(iend - i) + std::abs(jend - j) + 2;
  for (int n = 0; n < max_steps && (i != iend || j != jend); ++n) {
    if (std::abs(tmx - tmy) < 1e-12) {
      // Exact corner crossing: include both side cells.
      out.push_back({i + si, j});
      out.push_back({i, j + sj});
      i += si;
      j += sj;
      tmx += tdx;
      tmy += tdy;
    } else if (tmx < tmy) {
      i += si;
      tmx += tdx;
    } else {
      j += sj;
      tmy += tdy;
    }
    out.push_back({i, j});
  }
  return out;
}

//! True when every cell touched by segment a-b is inside the grid and free.
inline bool segment_clear(const GridSpec& g, const Mask& obstacle, Vec2 a,
                          Vec2 b) {
  for (Cell c : supercover(g, a, b)) {
    if (!g.contains(c) || obstacle[g.index(c)]) return false;
  }
  return true;
}

inline std::string to_string(Vec2 p) {
  std::ostringstream ss;
  ss << "(" << p.x << ", " << p.y << ")";
  return ss.str();
}

}  // namespace reachavoid

#endif  // REACHAVOID_GRID_HPP_
