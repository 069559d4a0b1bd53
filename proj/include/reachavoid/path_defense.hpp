#ifndef REACHAVOID_PATH_DEFENSE_HPP_
#define REACHAVOID_PATH_DEFENSE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reachavoid/eikonal.hpp"
#include "reachavoid/parallel.hpp"
#include "reachavoid/scenario.hpp"

namespace reachavoid {

//! A path "touches" the target when it passes within this many cells of it.
inline constexpr double kTouchTolCells = 1.5;

enum class Anchor { A, B };

//! Which side of a defense path each free cell lies on. Labels are 4-connected
//! components of free space minus the rasterized path; -1 marks path and
//! obstacle cells.
struct SidePartition {
  std::vector<std::int32_t> label;
  std::int32_t target_label = -1;

  //! Free cells on the side containing `p` (empty if p is on the path).
  Mask side_of(std::int32_t l) const {
    Mask m(label.size(), 0);
    if (l < 0) return m;
    for (std::size_t k = 0; k < label.size(); ++k) m[k] = label[k] == l ? 1 : 0;
    return m;
  }
};

struct PathOfDefense {
  int id = -1;
  std::size_t anchor_a = 0;  // boundary cell indices
  std::size_t anchor_b = 0;
  Vec2 e_a{};
  Vec2 e_b{};
  PathPolyline polyline;      // e_a -> e_b
  std::vector<double> arc;    // cumulative arc length per vertex
  std::shared_ptr<const DistanceField> field_a;
  std::shared_ptr<const DistanceField> field_b;
  std::vector<double> level_a;  // nondecreasing envelope of field_a along arc
  std::vector<double> level_b;  // nonincreasing envelope of field_b along arc
  SidePartition sides;
  double target_gap = 0.0;  // min distance from the path to the target

  double length() const { return arc.empty() ? 0.0 : arc.back(); }

  Vec2 point_at(double s) const {
    const auto& v = polyline.vertices;
    if (s <= 0.0) return v.front();
    if (s >= arc.back()) return v.back();
    auto it = std::upper_bound(arc.begin(), arc.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - arc.begin());
    const double seg = arc[k] - arc[k - 1];
    const double t = seg > 0.0 ? (s - arc[k - 1]) / seg : 0.0;
    return v[k - 1] + (v[k] - v[k - 1]) * t;
  }

  //! Side label of a point, -1 if it sits on the path.
  std::int32_t side_label(Vec2 p) const {
    return sides.label[polyline_grid_index(p)];
  }

  //! Usable against an attacker at p: p lies strictly on the non-target side.
  bool attacker_side(Vec2 p) const {
    const std::int32_t l = side_label(p);
    return l >= 0 && l != sides.target_label;
  }

  std::size_t polyline_grid_index(Vec2 p) const {
    const GridSpec& g = field_a->grid();
    return g.index(g.cell_of(p));
  }
};

//! Shared per-scenario data for path construction: computed once regardless
//! of how many players there are.
struct PathDefenseContext {
  Domain domain;
  Mask target;
  double capture_radius = 0.0;
  std::vector<std::size_t> boundary;
  std::shared_ptr<const DistanceField> target_field;
  double touch_tol = 0.0;

  const GridSpec& grid() const { return domain.grid; }
};

inline PathDefenseContext make_context(const Scenario& s) {
  PathDefenseContext ctx;
  ctx.domain = make_domain(s);
  ctx.target = s.target;
  ctx.capture_radius = s.capture_radius;
  ctx.boundary = boundary_cells(s);
  ctx.target_field = std::make_shared<const DistanceField>(solve(ctx.domain, s.target));
  ctx.touch_tol = kTouchTolCells * s.grid.cell_size;
  return ctx;
}

namespace detail {

inline Mask rasterize_polyline(const GridSpec& g, const std::vector<Vec2>& v) {
  Mask m(g.size(), 0);
  if (v.size() == 1) m[g.index(g.cell_of(v[0]))] = 1;
  for (std::size_t k = 1; k < v.size(); ++k) {
    for (Cell c : supercover(g, v[k - 1], v[k])) {
      if (g.contains(c)) m[g.index(c)] = 1;
    }
  }
  return m;
}

inline SidePartition partition_sides(const Domain& d, const Mask& path_cells) {
  const GridSpec& g = d.grid;
  SidePartition sp;
  sp.label.assign(g.size(), -1);
  std::int32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!d.free(k) || path_cells[k] || sp.label[k] >= 0) continue;
    sp.label[k] = next;
    stack.push_back(k);
    while (!stack.empty()) {
      const Cell c = g.cell(stack.back());
      stack.pop_back();
      constexpr int di[4] = {1, -1, 0, 0};
      constexpr int dj[4] = {0, 0, 1, -1};
      for (int q = 0; q < 4; ++q) {
        Cell n{c.i + di[q], c.j + dj[q]};
        if (!d.free(n)) continue;
        const std::size_t ni = g.index(n);
        if (path_cells[ni] || sp.label[ni] >= 0) continue;
        sp.label[ni] = next;
        stack.push_back(ni);
      }
    }
    ++next;
  }
  return sp;
}

//! Target cells off the path must share a single side.
inline std::optional<std::int32_t> target_side(const SidePartition& sp, const Mask& target) {
  std::int32_t lbl = -1;
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (!target[k] || sp.label[k] < 0) continue;
    if (lbl < 0) {
      lbl = sp.label[k];
    } else if (lbl != sp.label[k]) {
      return std::nullopt;
    }
  }
  return lbl;
}

inline double min_along(const DistanceField& f, const std::vector<Vec2>& v) {
  double best = kInf;
  for (Vec2 p : v) best = std::min(best, distance_to(f, p));
  return best;
}

//! Position along an envelope sampled at `arc` where it equals `level`.
inline double invert_envelope(const std::vector<double>& arc,
                              const std::vector<double>& env, double level,
                              bool increasing) {
  const std::size_t n = arc.size();
  auto value = [&](std::size_t k) { return increasing ? env[k] : -env[k]; };
  const double target = increasing ? level : -level;
  if (target <= value(0)) return arc.front();
  if (target >= value(n - 1)) return arc.back();
  // Bisection over vertex indices, then linear interpolation.
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (value(mid) < target) lo = mid; else hi = mid;
  }
  const double span = value(hi) - value(lo);
  const double t = span > 0.0 ? (target - value(lo)) / span : 0.0;
  return arc[lo] + t * (arc[hi] - arc[lo]);
}

}  // namespace detail

//! Completes a PathOfDefense from a polyline oriented e_a -> e_b.
inline PathOfDefense finish_path(const PathDefenseContext& ctx, std::size_t anchor_a,
                                 std::size_t anchor_b, PathPolyline poly,
                                 std::shared_ptr<const DistanceField> field_a,
                                 SidePartition sides) {
  const GridSpec& g = ctx.grid();
  PathOfDefense p;
  p.anchor_a = anchor_a;
  p.anchor_b = anchor_b;
  p.e_a = g.center(anchor_a);
  p.e_b = g.center(anchor_b);
  p.polyline = std::move(poly);
  p.arc.assign(p.polyline.vertices.size(), 0.0);
  for (std::size_t k = 1; k < p.arc.size(); ++k) {
    p.arc[k] = p.arc[k - 1] + distance(p.polyline.vertices[k - 1], p.polyline.vertices[k]);
  }
  p.polyline.length = p.arc.back();
  p.field_a = std::move(field_a);
  p.field_b = std::make_shared<const DistanceField>(solve_point(ctx.domain, p.e_b));
  const std::size_t n = p.arc.size();
  p.level_a.resize(n);
  p.level_b.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    p.level_a[k] = distance_to(*p.field_a, p.polyline.vertices[k]);
    p.level_b[k] = distance_to(*p.field_b, p.polyline.vertices[k]);
  }
  for (std::size_t k = 1; k < n; ++k) p.level_a[k] = std::max(p.level_a[k], p.level_a[k - 1]);
  for (std::size_t k = n - 1; k-- > 0;) p.level_b[k] = std::max(p.level_b[k], p.level_b[k + 1]);
  p.sides = std::move(sides);
  p.target_gap = detail::min_along(*ctx.target_field, p.polyline.vertices);
  return p;
}

//! Searches the boundary counterclockwise from anchor `boundary_pos` for a
//! partner anchor whose shortest path touches the target while leaving the
//! whole target on one side. Among valid partners the shortest path wins.
inline std::optional<PathOfDefense> build_path(const PathDefenseContext& ctx,
                                               std::size_t boundary_pos) {
  if (boundary_pos >= ctx.boundary.size()) {
    throw ValidationError("anchor is not a boundary cell");
  }
  const GridSpec& g = ctx.grid();
  const DistanceField& tf = *ctx.target_field;
  const std::size_t a = ctx.boundary[boundary_pos];
  // Target touching the boundary at the anchor itself is degenerate.
  if (!(tf.at(a) > ctx.touch_tol)) return std::nullopt;

  auto field_a = std::make_shared<const DistanceField>(solve_point(ctx.domain, g.center(a)));
  const std::size_t nb = ctx.boundary.size();

  // Cheap pass: discrete descent path of every candidate.
  std::vector<std::uint8_t> touches(nb, 0);
  for (std::size_t k = 1; k < nb; ++k) {
    const std::size_t b = ctx.boundary[(boundary_pos + k) % nb];
    if (!std::isfinite(field_a->at(b)) || !(tf.at(b) > ctx.touch_tol)) continue;
    double gap = kInf;
    for (std::size_t c : descent_cells(*field_a, g.cell(b))) gap = std::min(gap, tf.at(c));
    touches[k] = gap <= ctx.touch_tol + g.cell_size ? 1 : 0;
  }

  struct Candidate {
    std::size_t b;
    PathPolyline poly;
    SidePartition sides;
  };
  std::optional<Candidate> best;
  enum class Chord { Skip, NoTouch, Valid, Crossing };
  std::vector<Chord> seen(nb, Chord::Skip);
  std::vector<std::uint8_t> evaluated(nb, 0);
  auto eval = [&](std::size_t k) {
    if (evaluated[k]) return seen[k];
    evaluated[k] = 1;
    const std::size_t b = ctx.boundary[(boundary_pos + k) % nb];
    if (!std::isfinite(field_a->at(b)) || !(tf.at(b) > ctx.touch_tol)) return seen[k] = Chord::Skip;
    PathPolyline poly = extract_path(*field_a, g.center(b));
    std::reverse(poly.vertices.begin(), poly.vertices.end());
    if (poly.vertices.size() < 2) return seen[k] = Chord::Skip;
    if (detail::min_along(tf, poly.vertices) > ctx.touch_tol) return seen[k] = Chord::NoTouch;
    SidePartition sides = detail::partition_sides(
        ctx.domain, detail::rasterize_polyline(g, poly.vertices));
    auto tside = detail::target_side(sides, ctx.target);
    if (!tside) return seen[k] = Chord::Crossing;
    sides.target_label = *tside;
    if (!best || poly.length < best->poly.length) best = Candidate{b, std::move(poly), std::move(sides)};
    return seen[k] = Chord::Valid;
  };
  // The descent test only brackets the tangent chords: taut paths differ from
  // descent paths by a few cells. From each end of a touching run, walk
  // outward across crossing chords and inward across non-touching ones,
  // keeping up to kEndProbe valid chords per direction.
  constexpr std::size_t kEndProbe = 3;
  auto walk = [&](std::size_t from, int dir, Chord pass) {
    std::size_t taken = 0;
    for (std::size_t q = from; q >= 1 && q < nb && taken < kEndProbe;
         q = static_cast<std::size_t>(static_cast<long>(q) + dir)) {
      const Chord c = eval(q);
      if (c == Chord::Valid) {
        ++taken;
      } else if (c != pass || taken > 0) {
        break;
      }
    }
  };
  for (std::size_t k = 1; k < nb; ++k) {
    if (!touches[k] || touches[k - 1]) continue;
    std::size_t e = k;
    while (e + 1 < nb && touches[e + 1]) ++e;
    walk(k, -1, Chord::Crossing);
    walk(k, +1, Chord::NoTouch);
    walk(e, +1, Chord::Crossing);
    walk(e, -1, Chord::NoTouch);
    k = e;
  }
  if (!best) return std::nullopt;
  return finish_path(ctx, a, best->b, std::move(best->poly), field_a, std::move(best->sides));
}

//! Default anchor stride: about 128 anchors around the boundary.
inline std::size_t default_anchor_stride(const PathDefenseContext& ctx) {
  return std::max<std::size_t>(1, ctx.boundary.size() / 128);
}

//! Paths for every stride-th boundary anchor, in boundary order.
inline std::vector<PathOfDefense> build_paths(const PathDefenseContext& ctx,
                                              std::size_t anchor_stride, int jobs = 1) {
  if (anchor_stride < 1) throw ValidationError("anchor_stride must be >= 1");
  std::vector<std::size_t> anchors;
  for (std::size_t k = 0; k < ctx.boundary.size(); k += anchor_stride) anchors.push_back(k);
  std::vector<std::optional<PathOfDefense>> built(anchors.size());
  parallel_for(anchors.size(), jobs, [&](std::size_t i) { built[i] = build_path(ctx, anchors[i]); });
  std::vector<PathOfDefense> out;
  for (auto& p : built) {
    if (!p) continue;
    p->id = static_cast<int>(out.size());
    out.push_back(std::move(*p));
  }
  return out;
}

struct LevelSetImage {
  double arc = 0.0;
  Vec2 point{};
};

//! The point on the path at the attacker's geodesic distance from the anchor.
inline LevelSetImage attacker_level_set_image(const PathOfDefense& path, Vec2 x_a, Anchor anchor) {
  const double tol = 1e-9;
  if (anchor == Anchor::A) {
    const double level = distance_to(*path.field_a, x_a);
    if (level > path.level_a.back() + tol) {
      throw ValidationError("level set image lies beyond the far endpoint");
    }
    const double s = detail::invert_envelope(path.arc, path.level_a, level, true);
    return {s, path.point_at(s)};
  }
  const double level = distance_to(*path.field_b, x_a);
  if (level > path.level_b.front() + tol) {
    throw ValidationError("level set image lies beyond the far endpoint");
  }
  const double s = detail::invert_envelope(path.arc, path.level_b, level, false);
  return {s, path.point_at(s)};
}

//! Distance from an anchor field's source to the capture disk around p:
//! minimum over nearby free cells of the field value plus the gap from the
//! cell centre to the disk. Continuous in p.
inline double capture_set_distance(const DistanceField& f, Vec2 p, double capture_radius) {
  const GridSpec& g = f.grid();
  const double h = g.cell_size;
  const Cell c0 = g.cell_of(p);
  const int r = static_cast<int>(std::ceil((capture_radius + 2.0 * h) / h));
  double best = kInf;
  for (int j = c0.j - r; j <= c0.j + r; ++j) {
    for (int i = c0.i - r; i <= c0.i + r; ++i) {
      Cell c{i, j};
      if (!g.contains(c)) continue;
      const double v = f.at(c);
      if (!std::isfinite(v)) continue;
      const double gap = std::max(0.0, distance(g.center(c), p) - capture_radius);
      if (gap > 2.0 * h) continue;
      best = std::min(best, v + gap);
    }
  }
  if (!std::isfinite(best)) throw ValidationError("capture disk lies entirely in obstacles");
  return best;
}

struct InducedRegions {
  Vec2 p{};
  double r_pa_threshold = 0.0;
  double r_pb_threshold = 0.0;
  Mask r_pa;
  Mask r_pb;
};

inline std::pair<double, double> induced_thresholds(const PathOfDefense& path, Vec2 p,
                                                    double capture_radius) {
  return {capture_set_distance(*path.field_a, p, capture_radius),
          capture_set_distance(*path.field_b, p, capture_radius)};
}

inline InducedRegions induced_regions(const PathOfDefense& path, Vec2 p, double capture_radius) {
  InducedRegions r;
  r.p = p;
  std::tie(r.r_pa_threshold, r.r_pb_threshold) = induced_thresholds(path, p, capture_radius);
  const std::size_t n = path.field_a->values.size();
  r.r_pa.assign(n, 0);
  r.r_pb.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    r.r_pa[k] = path.field_a->values[k] <= r.r_pa_threshold ? 1 : 0;
    r.r_pb[k] = path.field_b->values[k] <= r.r_pb_threshold ? 1 : 0;
  }
  return r;
}

//! Attacker distance to R_PA(p) and R_PB(p) in closed form: the geodesic to
//! an anchor crosses the region's level set, so the gap is a difference of
//! anchor distances. Negative values mean the attacker is already inside.
struct RegionGaps {
  double to_a = 0.0;
  double to_b = 0.0;
  double min_clamped() const { return std::max(0.0, std::min(to_a, to_b)); }
};

inline RegionGaps region_gaps(const PathOfDefense& path, Vec2 x_a, Vec2 p, double capture_radius) {
  const auto [ta, tb] = induced_thresholds(path, p, capture_radius);
  return {distance_to(*path.field_a, x_a) - ta, distance_to(*path.field_b, x_a) - tb};
}

struct PStar {
  double arc = 0.0;
  Vec2 point{};
  double balance = 0.0;  // g(p*) in distance units
  bool clamped = false;
};

//! Balance point where the attacker needs equal time to reach R_PA and R_PB.
//! g(s) = gap_a(s) - gap_b(s) decreases along the path; bisection to a
//! sixteenth of a cell.
inline PStar find_pstar(const PathOfDefense& path, Vec2 x_a0, double capture_radius) {
  const double da = distance_to(*path.field_a, x_a0);
  const double db = distance_to(*path.field_b, x_a0);
  auto g = [&](double s) {
    const Vec2 p = path.point_at(s);
    const auto [ta, tb] = induced_thresholds(path, p, capture_radius);
    return (da - ta) - (db - tb);
  };
  const double len = path.length();
  double lo = 0.0, hi = len;
  double glo = g(lo), ghi = g(hi);
  if (glo <= 0.0 || ghi >= 0.0) {
    // No sign change: clamp to the endpoint with the smaller imbalance.
    const bool use_lo = std::abs(glo) <= std::abs(ghi);
    const double s = use_lo ? lo : hi;
    return {s, path.point_at(s), use_lo ? glo : ghi, true};
  }
  const double tol = path.field_a->grid().cell_size / 16.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm > 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  // Pick the bracket end with the smaller residual.
  const bool use_lo = std::abs(glo) <= std::abs(ghi);
  const double s = use_lo ? lo : hi;
  return {s, path.point_at(s), use_lo ? glo : ghi, false};
}

//! Attacker time to R_PA(p) u R_PB(p).
inline double attacker_time_to_regions(const PathOfDefense& path, Vec2 x_a0, Vec2 p,
                                       double capture_radius, double v_a) {
  return region_gaps(path, x_a0, p, capture_radius).min_clamped() / v_a;
}

struct Speeds {
  double attacker = 1.0;
  double defender = 1.0;
};

inline void check_speeds(Speeds v) {
  if (!(v.attacker > 0.0) || !(v.defender > 0.0)) throw ValidationError("speeds must be positive");
  if (v.attacker > v.defender) {
    throw ValidationError("path defense requires the attacker to be no faster than the defender");
  }
}

//! Sufficient test (exact for equal speeds with the defender on the path):
//! the defender reaches p* before the attacker enters R_PA(p*) u R_PB(p*).
inline bool is_strongly_defendable_from(const PathDefenseContext& ctx, const PathOfDefense& path,
                                        Vec2 x_a0, Vec2 x_d0, Speeds v) {
  check_speeds(v);
  if (!path.attacker_side(x_a0)) return false;
  const PStar ps = find_pstar(path, x_a0, ctx.capture_radius);
  const double t_a = attacker_time_to_regions(path, x_a0, ps.point, ctx.capture_radius, v.attacker);
  if (!(t_a > 0.0)) return false;
  const double t_d = distance(x_d0, ps.point) <= 1e-12
                         ? 0.0
                         : travel_time(solve_point(ctx.domain, ps.point), x_d0, v.defender);
  return t_d <= t_a;
}

struct DefenderWinningRegion {
  int path_id = -1;
  Vec2 e_a{};
  Vec2 e_b{};
  Vec2 x_a0{};
  PStar p_star;
  double attacker_time = 0.0;  // t_A(x_A0, R_PA u R_PB)
  Mask mask;
};

//! {x : t_D(x, p*) <= t_A(x_A0, R_PA(p*) u R_PB(p*))}, always holding p*'s
//! cell. Requires the attacker on the path's non-target side.
inline DefenderWinningRegion defender_winning_region(const PathDefenseContext& ctx,
                                                     const PathOfDefense& path, Vec2 x_a0,
                                                     Speeds v) {
  check_speeds(v);
  if (!path.attacker_side(x_a0)) {
    throw ValidationError("attacker is not on the non-target side of the path");
  }
  DefenderWinningRegion dr;
  dr.path_id = path.id;
  dr.e_a = path.e_a;
  dr.e_b = path.e_b;
  dr.x_a0 = x_a0;
  dr.p_star = find_pstar(path, x_a0, ctx.capture_radius);
  dr.attacker_time =
      attacker_time_to_regions(path, x_a0, dr.p_star.point, ctx.capture_radius, v.attacker);
  const double reach = v.defender * dr.attacker_time;
  const DistanceField f = solve_point(ctx.domain, dr.p_star.point, reach);
  const GridSpec& g = ctx.grid();
  dr.mask.assign(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k) dr.mask[k] = f.values[k] <= reach ? 1 : 0;
  dr.mask[g.index(g.cell_of(dr.p_star.point))] = 1;
  return dr;
}

struct PathClaim {
  int path_id = -1;
  PStar p_star;
  double attacker_time = 0.0;
  std::size_t cells = 0;
};

struct SliceResult {
  Mask mask;
  std::vector<std::int32_t> provenance;  // first claiming path id, -1 if none
  std::vector<PathClaim> claims;         // indexed in path order, usable paths only
  std::vector<std::string> warnings;

  const PathClaim* claim_for(int path_id) const {
    for (const auto& c : claims) if (c.path_id == path_id) return &c;
    return nullptr;
  }
};

//! Union of defender winning regions over all paths usable against x_a0.
//! Regions are computed independently and merged in path order, so the
//! result does not depend on `jobs`.
inline SliceResult slice_union(const PathDefenseContext& ctx,
                               const std::vector<PathOfDefense>& paths, Vec2 x_a0, Speeds v,
                               int jobs = 1) {
  check_speeds(v);
  const GridSpec& g = ctx.grid();
  std::vector<std::optional<DefenderWinningRegion>> regions(paths.size());
  parallel_for(paths.size(), jobs, [&](std::size_t i) {
    const PathOfDefense& p = paths[i];
    if (!p.attacker_side(x_a0)) return;
    const PStar ps = find_pstar(p, x_a0, ctx.capture_radius);
    const double t_a = attacker_time_to_regions(p, x_a0, ps.point, ctx.capture_radius, v.attacker);
    if (!(t_a > 0.0)) return;  // attacker already inside R_PA u R_PB
    regions[i] = defender_winning_region(ctx, p, x_a0, v);
  });
  SliceResult out;
  out.mask.assign(g.size(), 0);
  out.provenance.assign(g.size(), -1);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!regions[i]) continue;
    const auto& dr = *regions[i];
    PathClaim claim{paths[i].id, dr.p_star, dr.attacker_time, 0};
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!dr.mask[k]) continue;
      ++claim.cells;
      if (!out.mask[k]) {
        out.mask[k] = 1;
        out.provenance[k] = paths[i].id;
      }
    }
    out.claims.push_back(claim);
  }
  if (out.claims.empty()) out.warnings.push_back("no usable path of defense for this attacker position");
  return out;
}

//! A path on which one defender provably wins against one attacker.
struct Certificate {
  std::size_t path_index = 0;  // into the path list
  int path_id = -1;
  PStar p_star;
  double attacker_time = 0.0;
  double defender_time = 0.0;
  double slack() const { return attacker_time - defender_time; }
};

//! p* and attacker time for every path usable against x_a0 (nullopt where
//! the attacker is on the target side or already inside R_PA u R_PB).
inline std::vector<std::optional<PathClaim>> path_claims(const PathDefenseContext& ctx,
                                                         const std::vector<PathOfDefense>& paths,
                                                         Vec2 x_a0, double v_attacker) {
  std::vector<std::optional<PathClaim>> out(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const PathOfDefense& p = paths[i];
    if (!p.attacker_side(x_a0)) continue;
    const PStar ps = find_pstar(p, x_a0, ctx.capture_radius);
    const double t_a = attacker_time_to_regions(p, x_a0, ps.point, ctx.capture_radius, v_attacker);
    if (!(t_a > 0.0)) continue;
    out[i] = PathClaim{p.id, ps, t_a, 0};
  }
  return out;
}

//! Pairwise test without rasterizing regions: `defender_field` is the
//! distance field from the defender's position. Returns the certificate with
//! the most slack; ties go to the lower path index.
inline std::optional<Certificate> best_certificate(
    const std::vector<std::optional<PathClaim>>& claims, const DistanceField& defender_field,
    Speeds v) {
  check_speeds(v);
  std::optional<Certificate> best;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (!claims[i]) continue;
    const PathClaim& pc = *claims[i];
    const double t_a = pc.attacker_time;
    const double t_d = distance_to(defender_field, pc.p_star.point) / v.defender;
    if (!(t_d <= t_a)) continue;
    Certificate c{i, pc.path_id, pc.p_star, t_a, t_d};
    if (!best || c.slack() > best->slack()) best = c;
  }
  return best;
}

//! True iff x_d0 lies in the path-defense slice at x_a0.
inline bool pairwise_outcome_pd(const SliceResult& slice, const GridSpec& g, Vec2 x_d0) {
  return slice.mask[g.index(g.cell_of(x_d0))] != 0;
}

inline bool pairwise_outcome_pd(const PathDefenseContext& ctx,
                                const std::vector<PathOfDefense>& paths, Vec2 x_a0, Vec2 x_d0,
                                Speeds v) {
  return pairwise_outcome_pd(slice_union(ctx, paths, x_a0, v), ctx.grid(), x_d0);
}

}  // namespace reachavoid

#endif  // REACHAVOID_PATH_DEFENSE_HPP_
