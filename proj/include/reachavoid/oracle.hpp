#ifndef REACHAVOID_ORACLE_HPP_
#define REACHAVOID_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "reachavoid/grid.hpp"
#include "reachavoid/scenario.hpp"

// Ground-truth pairwise outcomes from backward induction over the joint
// (attacker cell, defender cell) space of a coarsened grid.
//
// One game step: the attacker picks a move, then the defender picks a move
// having seen it; the resulting pair is checked for capture first and target
// arrival second. Moving second hands the defender an information edge, so
// the table leans toward DEFENDER_WIN.

namespace reachavoid {

enum class Outcome : std::uint8_t { DefenderWin = 0, AttackerWin = 1 };

inline const char* to_string(Outcome o) {
  return o == Outcome::AttackerWin ? "ATTACKER_WIN" : "DEFENDER_WIN";
}

struct OracleOptions {
  int coarsening = 0;        // 0 = choose automatically
  int horizon = 0;           // max backward-induction levels, 0 = unbounded
  double step_cells = 3.1622776601683795;  // attacker reach per step (coarse cells)
  double attacker_speed = 0.0;  // 0 = take from the scenario
  double defender_speed = 0.0;
  std::size_t max_joint_states = 4'000'000;  // used when choosing coarsening
  std::size_t budget_bytes = 0;              // 0 = REACHAVOID_BUDGET_MB or 1 GiB
};

inline std::size_t oracle_budget_bytes(const OracleOptions& o) {
  if (o.budget_bytes > 0) return o.budget_bytes;
  if (const char* env = std::getenv("REACHAVOID_BUDGET_MB")) {
    const long mb = std::strtol(env, nullptr, 10);
    if (mb > 0) return static_cast<std::size_t>(mb) * 1024 * 1024;
  }
  return std::size_t{1024} * 1024 * 1024;
}

//! Coarsened per-player grid. A coarse cell is free only if every fine cell
//! it covers is free.
struct JointGrid {
  GridSpec fine;
  GridSpec coarse;
  int k = 1;
  std::vector<std::int32_t> free_index;  // coarse cell -> player state, -1 if blocked
  std::vector<std::uint32_t> cell_of_state;
  Mask target;  // per player state

  std::size_t states() const { return cell_of_state.size(); }
  std::size_t joint_states() const { return states() * states(); }
  Vec2 center(std::uint32_t state) const {
    return coarse.center(static_cast<std::size_t>(cell_of_state[state]));
  }
};

inline JointGrid make_joint_grid(const Scenario& s, int k) {
  if (k < 1) throw ValidationError("coarsening factor must be >= 1");
  JointGrid jg;
  jg.fine = s.grid;
  jg.k = k;
  jg.coarse.width = (s.grid.width + k - 1) / k;
  jg.coarse.height = (s.grid.height + k - 1) / k;
  jg.coarse.cell_size = s.grid.cell_size * k;
  jg.coarse.origin = s.grid.origin;
  jg.free_index.assign(jg.coarse.size(), -1);
  for (int cj = 0; cj < jg.coarse.height; ++cj) {
    for (int ci = 0; ci < jg.coarse.width; ++ci) {
      bool ok = true;
      for (int j = cj * k; j < std::min((cj + 1) * k, s.grid.height) && ok; ++j) {
        for (int i = ci * k; i < std::min((ci + 1) * k, s.grid.width) && ok; ++i) {
          if (s.obstacle[s.grid.index(i, j)]) ok = false;
        }
      }
      // Partial blocks on the far edges would put the centre outside the
      // domain; treat them as blocked.
      if ((ci + 1) * k > s.grid.width || (cj + 1) * k > s.grid.height) ok = false;
      if (!ok) continue;
      const std::size_t cidx = jg.coarse.index(ci, cj);
      jg.free_index[cidx] = static_cast<std::int32_t>(jg.cell_of_state.size());
      jg.cell_of_state.push_back(static_cast<std::uint32_t>(cidx));
      const Vec2 c = jg.coarse.center(Cell{ci, cj});
      jg.target.push_back(s.target[s.grid.index(s.grid.cell_of(c))]);
    }
  }
  if (jg.states() == 0) throw ValidationError("no free coarse cells at this coarsening");
  return jg;
}

//! Smallest coarsening whose joint space fits `max_joint_states`.
inline int choose_coarsening(const Scenario& s, std::size_t max_joint_states) {
  for (int k = 1; k <= std::max(s.grid.width, s.grid.height); ++k) {
    const JointGrid jg = make_joint_grid(s, k);
    if (jg.joint_states() <= max_joint_states) return k;
  }
  return std::max(s.grid.width, s.grid.height);
}

struct ValueTable {
  JointGrid grid;
  std::vector<std::uint8_t> status;  // Outcome per (attacker state, defender state)
  std::vector<std::vector<std::uint32_t>> attacker_moves;
  std::vector<std::vector<std::uint32_t>> defender_moves;
  double capture_radius = 0.0;
  double attacker_speed = 1.0;
  double defender_speed = 1.0;
  double step_cells = 0.0;
  double step_time = 0.0;  // game time per backward-induction level
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  std::size_t n() const { return grid.states(); }
  Outcome at(std::uint32_t a, std::uint32_t d) const {
    return static_cast<Outcome>(status[static_cast<std::size_t>(a) * n() + d]);
  }
};

namespace detail {

inline std::vector<std::pair<int, int>> lattice_disk(double radius) {
  std::vector<std::pair<int, int>> offsets;
  const int r = static_cast<int>(std::floor(radius + 1e-9));
  for (int dj = -r; dj <= r; ++dj) {
    for (int di = -r; di <= r; ++di) {
      if (di * di + dj * dj <= radius * radius + 1e-9) offsets.push_back({di, dj});
    }
  }
  return offsets;
}

//! Inner radius of the convex hull of the lattice disk: the slowest
//! direction a player restricted to these offsets can sustain.
inline double hull_inner_radius(double radius) {
  auto pts = lattice_disk(radius);
  std::sort(pts.begin(), pts.end());
  using P = std::pair<int, int>;
  auto cross = [](P o, P a, P b) {
    return static_cast<long>(a.first - o.first) * (b.second - o.second) -
           static_cast<long>(a.second - o.second) * (b.first - o.first);
  };
  std::vector<P> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return 0.0;
  double inner = kInf;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const P a = hull[i], b = hull[(i + 1) % hull.size()];
    const double ex = b.first - a.first, ey = b.second - a.second;
    inner = std::min(inner, std::abs(a.first * ey - a.second * ex) / std::hypot(ex, ey));
  }
  return inner;
}

//! Smallest lattice-disk radius whose hull covers the Euclidean disk of
//! radius `reach`. Used for the defender so the discretization never slows
//! it below its continuous speed in any direction.
inline double covering_radius(double reach) {
  for (int n = 0;; ++n) {
    // Candidate radii are the distinct lattice norms sqrt(n).
    const double r = std::sqrt(static_cast<double>(n));
    if (r + 1e-9 < reach) continue;
    if (hull_inner_radius(r) + 1e-9 >= reach) return r;
  }
}

inline std::vector<std::vector<std::uint32_t>> lattice_moves(const JointGrid& jg, double radius) {
  const auto offsets = lattice_disk(radius);
  Mask blocked(jg.coarse.size(), 0);
  for (std::size_t c = 0; c < blocked.size(); ++c) blocked[c] = jg.free_index[c] < 0 ? 1 : 0;
  std::vector<std::vector<std::uint32_t>> moves(jg.states());
  for (std::uint32_t s = 0; s < jg.states(); ++s) {
    const Cell c = jg.coarse.cell(jg.cell_of_state[s]);
    for (auto [di, dj] : offsets) {
      const Cell n{c.i + di, c.j + dj};
      if (!jg.coarse.contains(n)) continue;
      const std::int32_t ns = jg.free_index[jg.coarse.index(n)];
      if (ns < 0) continue;
      if ((di != 0 || dj != 0) &&
          !segment_clear(jg.coarse, blocked, jg.coarse.center(c), jg.coarse.center(n))) {
        continue;
      }
      moves[s].push_back(static_cast<std::uint32_t>(ns));
    }
  }
  return moves;
}

inline std::vector<std::vector<std::uint32_t>> transpose(
    const std::vector<std::vector<std::uint32_t>>& fwd) {
  std::vector<std::vector<std::uint32_t>> rev(fwd.size());
  for (std::uint32_t s = 0; s < fwd.size(); ++s) {
    for (std::uint32_t t : fwd[s]) rev[t].push_back(s);
  }
  return rev;
}

}  // namespace detail

//! Backward induction to the fixed point (or `horizon` levels). States left
//! unresolved count as defender wins: the defender may delay indefinitely.
inline ValueTable solve_joint_game(const Scenario& s, OracleOptions opts = {}) {
  const int k = opts.coarsening > 0 ? opts.coarsening : choose_coarsening(s, opts.max_joint_states);
  ValueTable t;
  t.grid = make_joint_grid(s, k);
  t.capture_radius = s.capture_radius;
  t.attacker_speed = opts.attacker_speed > 0 ? opts.attacker_speed : s.attackers.at(0).max_speed;
  t.defender_speed = opts.defender_speed > 0 ? opts.defender_speed
                     : s.defenders.empty()   ? t.attacker_speed
                                             : s.defenders[0].max_speed;
  if (!(opts.step_cells >= 1.0)) throw ValidationError("oracle step must cover at least one cell");
  t.step_cells = opts.step_cells;
  t.step_time = opts.step_cells * t.grid.coarse.cell_size / t.attacker_speed;

  const std::size_t n = t.grid.states();
  const std::size_t joint = n * n;
  const double defender_radius =
      detail::covering_radius(opts.step_cells * t.defender_speed / t.attacker_speed);
  const std::size_t approx_moves =
      static_cast<std::size_t>(3.2 * (opts.step_cells * opts.step_cells +
                                      defender_radius * defender_radius)) + 4;
  const std::size_t bytes = joint * (sizeof(std::uint8_t) * 2 + sizeof(std::uint16_t)) +
                            n * approx_moves * 2 * sizeof(std::uint32_t);
  if (bytes > oracle_budget_bytes(opts)) {
    throw BudgetExceeded("oracle needs ~" + std::to_string(bytes / (1024 * 1024)) +
                         " MiB for " + std::to_string(joint) + " joint states");
  }

  t.attacker_moves = detail::lattice_moves(t.grid, opts.step_cells);
  t.defender_moves = detail::lattice_moves(t.grid, defender_radius);
  const auto attacker_rev = detail::transpose(t.attacker_moves);
  const auto defender_rev = detail::transpose(t.defender_moves);

  const int span = t.grid.coarse.width + t.grid.coarse.height;
  const int horizon = opts.horizon > 0 ? opts.horizon : std::numeric_limits<int>::max();
  if (opts.horizon > 0 && opts.horizon < span) {
    t.warnings.push_back("horizon " + std::to_string(opts.horizon) +
                         " is below the grid span " + std::to_string(span));
  }

  // terminal: 1 = captured (defender), 2 = attacker in target uncaptured.
  std::vector<std::uint8_t> terminal(joint, 0);
  std::vector<std::uint8_t> won(joint, 0);
  std::vector<std::uint16_t> remaining(joint);
  std::vector<std::uint32_t> frontier, next;
  for (std::uint32_t a = 0; a < n; ++a) {
    const Vec2 pa = t.grid.center(a);
    for (std::uint32_t d = 0; d < n; ++d) {
      const std::size_t idx = static_cast<std::size_t>(a) * n + d;
      remaining[idx] = static_cast<std::uint16_t>(t.defender_moves[d].size());
      if (capture_test(pa, t.grid.center(d), t.capture_radius)) {
        terminal[idx] = 1;  // capture wins ties with target arrival
      } else if (t.grid.target[a]) {
        terminal[idx] = 2;
        won[idx] = 1;
        frontier.push_back(static_cast<std::uint32_t>(idx));
      }
    }
  }

  int level = 0;
  while (!frontier.empty() && level < horizon) {
    next.clear();
    for (std::uint32_t idx : frontier) {
      const std::uint32_t a1 = idx / static_cast<std::uint32_t>(n);
      const std::uint32_t d1 = idx % static_cast<std::uint32_t>(n);
      // Every defender reply from d that lands on d1 is now losing.
      for (std::uint32_t d : defender_rev[d1]) {
        const std::size_t mid = static_cast<std::size_t>(a1) * n + d;
        if (--remaining[mid] != 0) continue;
        // Attacker move a -> a1 now forces a win against a defender at d.
        for (std::uint32_t a : attacker_rev[a1]) {
          const std::size_t pre = static_cast<std::size_t>(a) * n + d;
          if (terminal[pre] || won[pre]) continue;
          won[pre] = 1;
          next.push_back(static_cast<std::uint32_t>(pre));
        }
      }
    }
    frontier.swap(next);
    ++level;
  }
  t.iterations = level;
  t.converged = frontier.empty();
  if (!t.converged) t.warnings.push_back("horizon reached before the fixed point");
  t.status.resize(joint);
  for (std::size_t i = 0; i < joint; ++i) {
    t.status[i] = static_cast<std::uint8_t>(won[i] ? Outcome::AttackerWin : Outcome::DefenderWin);
  }
  return t;
}

//! Applies the one-step game operator to the whole table; returns how many
//! statuses would change. Zero at a fixed point.
inline std::size_t sweep_once(const ValueTable& t) {
  const std::size_t n = t.n();
  std::size_t changes = 0;
  for (std::uint32_t a = 0; a < n; ++a) {
    const Vec2 pa = t.grid.center(a);
    for (std::uint32_t d = 0; d < n; ++d) {
      Outcome v;
      if (capture_test(pa, t.grid.center(d), t.capture_radius)) {
        v = Outcome::DefenderWin;
      } else if (t.grid.target[a]) {
        v = Outcome::AttackerWin;
      } else {
        v = Outcome::DefenderWin;
        for (std::uint32_t a1 : t.attacker_moves[a]) {
          bool forced = true;
          for (std::uint32_t d1 : t.defender_moves[d]) {
            if (t.at(a1, d1) != Outcome::AttackerWin) {
              forced = false;
              break;
            }
          }
          if (forced) {
            v = Outcome::AttackerWin;
            break;
          }
        }
      }
      if (v != t.at(a, d)) ++changes;
    }
  }
  return changes;
}

//! Player state for a world position: the containing coarse cell, or the
//! nearest free coarse cell when the containing one is blocked.
inline std::uint32_t state_of(const JointGrid& jg, Vec2 p) {
  const Cell c = jg.coarse.cell_of(p);
  const std::int32_t s = jg.free_index[jg.coarse.index(c)];
  if (s >= 0) return static_cast<std::uint32_t>(s);
  std::uint32_t best = 0;
  double best_d = kInf;
  for (std::uint32_t q = 0; q < jg.states(); ++q) {
    const double d = distance(jg.center(q), p);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

inline Outcome query(const ValueTable& t, Vec2 x_a, Vec2 x_d) {
  if (!t.grid.fine.inside(x_a) || !t.grid.fine.inside(x_d)) {
    throw ValidationError("query position outside the domain");
  }
  return t.at(state_of(t.grid, x_a), state_of(t.grid, x_d));
}

//! Defender positions (fine cells) that win against an attacker at x_a0.
inline Mask oracle_slice(const ValueTable& t, const Scenario& s, Vec2 x_a0) {
  const std::uint32_t a = state_of(t.grid, x_a0);
  Mask m(s.grid.size(), 0);
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    if (s.obstacle[k]) continue;
    const std::uint32_t d = state_of(t.grid, s.grid.center(k));
    m[k] = t.at(a, d) == Outcome::DefenderWin ? 1 : 0;
  }
  return m;
}

// Binary table file: magic, version, then header fields and raw statuses.
inline constexpr char kTableMagic[4] = {'R', 'A', 'O', 'T'};
inline constexpr std::uint32_t kTableVersion = 1;
inline constexpr std::uint8_t kTieRuleCaptureWins = 1;

namespace detail {
template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError("truncated oracle table");
  return v;
}
}  // namespace detail

inline void write_table(const ValueTable& t, std::uint64_t scenario_hash, std::ostream& out) {
  out.write(kTableMagic, 4);
  detail::put(out, kTableVersion);
  detail::put(out, scenario_hash);
  detail::put(out, static_cast<std::int32_t>(t.grid.k));
  detail::put(out, static_cast<std::int32_t>(t.grid.fine.width));
  detail::put(out, static_cast<std::int32_t>(t.grid.fine.height));
  detail::put(out, static_cast<std::int32_t>(t.grid.coarse.width));
  detail::put(out, static_cast<std::int32_t>(t.grid.coarse.height));
  detail::put(out, kTieRuleCaptureWins);
  detail::put(out, t.capture_radius);
  detail::put(out, t.attacker_speed);
  detail::put(out, t.defender_speed);
  detail::put(out, t.step_cells);
  detail::put(out, static_cast<std::int32_t>(t.iterations));
  detail::put(out, static_cast<std::uint8_t>(t.converged));
  detail::put(out, static_cast<std::uint64_t>(t.n()));
  for (std::uint32_t c : t.grid.cell_of_state) detail::put(out, c);
  out.write(reinterpret_cast<const char*>(t.status.data()),
            static_cast<std::streamsize>(t.status.size()));
}

struct TableHeader {
  std::uint64_t scenario_hash = 0;
  int k = 0;
  std::uint8_t tie_rule = 0;
};

//! Reads a table written by write_table for the same scenario.
inline ValueTable read_table(std::istream& in, const Scenario& s, TableHeader* header = nullptr) {
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kTableMagic)) throw ValidationError("not an oracle table");
  if (detail::get<std::uint32_t>(in) != kTableVersion) throw ValidationError("unsupported oracle table version");
  TableHeader h;
  h.scenario_hash = detail::get<std::uint64_t>(in);
  h.k = detail::get<std::int32_t>(in);
  const int fw = detail::get<std::int32_t>(in), fh = detail::get<std::int32_t>(in);
  detail::get<std::int32_t>(in);
  detail::get<std::int32_t>(in);
  h.tie_rule = detail::get<std::uint8_t>(in);
  if (fw != s.grid.width || fh != s.grid.height) throw ValidationError("oracle table grid mismatch");
  ValueTable t;
  t.grid = make_joint_grid(s, h.k);
  t.capture_radius = detail::get<double>(in);
  t.attacker_speed = detail::get<double>(in);
  t.defender_speed = detail::get<double>(in);
  t.step_cells = detail::get<double>(in);
  t.step_time = t.step_cells * t.grid.coarse.cell_size / t.attacker_speed;
  t.iterations = detail::get<std::int32_t>(in);
  t.converged = detail::get<std::uint8_t>(in) != 0;
  const auto n = detail::get<std::uint64_t>(in);
  if (n != t.grid.states()) throw ValidationError("oracle table state count mismatch");
  for (std::size_t q = 0; q < n; ++q) {
    if (detail::get<std::uint32_t>(in) != t.grid.cell_of_state[q]) {
      throw ValidationError("oracle table cell map mismatch");
    }
  }
  t.status.resize(n * n);
  in.read(reinterpret_cast<char*>(t.status.data()), static_cast<std::streamsize>(t.status.size()));
  if (!in) throw ValidationError("truncated oracle table");
  t.attacker_moves = detail::lattice_moves(t.grid, t.step_cells);
  t.defender_moves = detail::lattice_moves(
      t.grid, detail::covering_radius(t.step_cells * t.defender_speed / t.attacker_speed));
  if (header) *header = h;
  return t;
}

}  // namespace reachavoid

#endif  // REACHAVOID_ORACLE_HPP_
