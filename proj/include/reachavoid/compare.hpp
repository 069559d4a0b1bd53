#ifndef REACHAVOID_COMPARE_HPP_
#define REACHAVOID_COMPARE_HPP_

#include <cstdint>
#include <vector>

#include "reachavoid/grid.hpp"

namespace reachavoid {

inline constexpr int kBandCells = 2;

//! Cells whose centre lies within `band` cells of a set cell's centre.
inline Mask dilate(const GridSpec& g, const Mask& m, int band) {
  Mask out(m.size(), 0);
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      if (!m[g.index(i, j)]) continue;
      for (int dj = -band; dj <= band; ++dj) {
        for (int di = -band; di <= band; ++di) {
          if (di * di + dj * dj > band * band) continue;
          const Cell n{i + di, j + dj};
          if (g.contains(n)) out[g.index(n)] = 1;
        }
      }
    }
  }
  return out;
}

struct SliceComparison {
  std::size_t pd_area = 0;      // cells
  std::size_t oracle_area = 0;
  std::size_t both = 0;
  std::size_t pd_only = 0;      // PD claims the oracle rejects
  std::size_t violations = 0;   // pd_only cells outside the band
  double area_ratio() const {
    return oracle_area ? static_cast<double>(pd_area) / static_cast<double>(oracle_area) : 0.0;
  }
  // Per cell: 0 neither, 1 oracle only, 2 both, 3 PD only inside the band,
  // 4 PD only outside the band.
  std::vector<std::uint8_t> diff;
};

//! Checks pd ⊆ oracle up to a boundary band of `band` cells.
inline SliceComparison compare_slices(const GridSpec& g, const Mask& pd, const Mask& oracle,
                                      int band = kBandCells) {
  SliceComparison c;
  const Mask near = dilate(g, oracle, band);
  c.diff.assign(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    c.pd_area += pd[k] ? 1 : 0;
    c.oracle_area += oracle[k] ? 1 : 0;
    if (pd[k] && oracle[k]) {
      ++c.both;
      c.diff[k] = 2;
    } else if (pd[k]) {
      ++c.pd_only;
      if (near[k]) {
        c.diff[k] = 3;
      } else {
        ++c.violations;
        c.diff[k] = 4;
      }
    } else if (oracle[k]) {
      c.diff[k] = 1;
    }
  }
  return c;
}

}  // namespace reachavoid

#endif  // REACHAVOID_COMPARE_HPP_
