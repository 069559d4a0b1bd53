#ifndef REACHAVOID_SIMULATION_HPP_
#define REACHAVOID_SIMULATION_HPP_

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reachavoid/eikonal.hpp"
#include "reachavoid/grid.hpp"
#include "reachavoid/matching.hpp"
#include "reachavoid/oracle.hpp"
#include "reachavoid/parallel.hpp"
#include "reachavoid/path_defense.hpp"
#include "reachavoid/scenario.hpp"

namespace reachavoid {

enum class DefenderStrategy { PDSemiOpenLoop, OracleGreedy };

inline const char* to_string(DefenderStrategy s) {
  return s == DefenderStrategy::PDSemiOpenLoop ? "PD_SEMI_OPEN_LOOP" : "ORACLE_GREEDY";
}

enum class Phase { GotoPStar, InterceptImage, TrackImage };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::GotoPStar: return "GOTO_PSTAR";
    case Phase::InterceptImage: return "INTERCEPT_IMAGE";
    case Phase::TrackImage: return "TRACK_IMAGE";
  }
  return "?";
}

struct SimConfig {
  double delta = 0.005;  // rematch interval
  double dt = 0.0;       // 0 = largest stable step that divides delta
  double t_max = 4.0;
  double attacker_margin = 0.125;
  std::vector<DefenderStrategy> strategies;  // per defender; empty = all PD
  int pd_refresh = 10;          // PD edges are recomputed every pd_refresh rematches
  std::size_t anchor_stride = 0;  // 0 = default_anchor_stride
  int coarsening = 0;             // oracle coarsening, 0 = automatic
  bool carry_certificates = true;  // matched pairs keep their edge while both play on
  int jobs = 1;

  DefenderStrategy strategy(std::size_t i) const {
    return strategies.empty() ? DefenderStrategy::PDSemiOpenLoop : strategies.at(i);
  }
};

//! Largest explicit step allowed on this grid: half a cell per step.
inline double max_stable_dt(const Scenario& s) {
  double vmax = 0.0;
  for (const auto& p : s.attackers) vmax = std::max(vmax, p.max_speed);
  for (const auto& p : s.defenders) vmax = std::max(vmax, p.max_speed);
  return s.grid.cell_size / (2.0 * vmax);
}

inline void validate(const SimConfig& c, const Scenario& s) {
  if (!(c.delta > 0.0) || !(c.t_max >= c.delta)) throw ValidationError("need 0 < delta <= t_max");
  if (c.dt < 0.0 || c.dt > c.delta) throw ValidationError("need 0 < dt <= delta");
  if (c.dt > max_stable_dt(s) + 1e-15) throw ValidationError("dt exceeds h / (2 max speed)");
  if (!(c.attacker_margin >= 0.0)) throw ValidationError("attacker_margin must be >= 0");
  if (c.pd_refresh < 1) throw ValidationError("pd_refresh must be >= 1");
  if (!c.strategies.empty() && c.strategies.size() != s.defenders.size()) {
    throw ValidationError("one strategy per defender required");
  }
}

//! Obstacle mask grown by `margin`: a free cell is blocked when its centre
//! is closer than margin to some obstacle cell.
inline Mask inflate_obstacles(const GridSpec& g, const Mask& obstacle, double margin) {
  Mask out = obstacle;
  if (margin <= 0.0) return out;
  const double h = g.cell_size;
  const int r = static_cast<int>(std::ceil(margin / h)) + 1;
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      if (obstacle[g.index(i, j)]) continue;
      bool hit = false;
      for (int dj = -r; dj <= r && !hit; ++dj) {
        for (int di = -r; di <= r && !hit; ++di) {
          const Cell n{i + di, j + dj};
          if (!g.contains(n) || !obstacle[g.index(n)]) continue;
          // Distance from this centre to the obstacle cell's square.
          const double dx = std::max(0.0, std::abs(di) * h - 0.5 * h);
          const double dy = std::max(0.0, std::abs(dj) * h - 0.5 * h);
          hit = std::hypot(dx, dy) < margin;
        }
      }
      if (hit) out[g.index(i, j)] = 1;
    }
  }
  return out;
}

//! Distance-to-target fields the attackers descend.
struct AttackerGuide {
  std::shared_ptr<const DistanceField> inflated;  // null if inflation removes the target
  std::shared_ptr<const DistanceField> plain;
};

inline AttackerGuide make_attacker_guide(const Scenario& s, double margin) {
  AttackerGuide g;
  const Domain plain = make_domain(s);
  g.plain = std::make_shared<const DistanceField>(solve(plain, s.target));
  if (margin > 0.0) {
    Mask blocked = inflate_obstacles(s.grid, s.obstacle, margin);
    Mask target = s.target;
    bool any = false;
    for (std::size_t k = 0; k < target.size(); ++k) {
      if (blocked[k]) target[k] = 0;
      any = any || target[k];
    }
    if (any) {
      g.inflated = std::make_shared<const DistanceField>(
          solve(make_domain(s.grid, std::move(blocked)), target));
    }
  }
  return g;
}

namespace detail {

inline bool reachable(const DistanceField& f, Vec2 x) {
  return f.domain.free_point(x) && std::isfinite(distance_to(f, x));
}

//! Unit direction of the first leg of the shortest path to the field source.
inline Vec2 first_leg(const DistanceField& f, Vec2 x) {
  const PathPolyline p = extract_path(f, x);
  if (p.vertices.size() < 2) return {0.0, 0.0};
  const Vec2 d = p.vertices[1] - x;
  const double n = norm(d);
  return n > 0.0 ? d / n : Vec2{0.0, 0.0};
}

//! Control that lands exactly on `goal` when it is within one step.
inline std::optional<Vec2> land_on(Vec2 x, Vec2 goal, double speed, double dt) {
  const double reach = speed * dt;
  const double d = distance(x, goal);
  if (d > reach + 1e-12) return std::nullopt;
  if (d == 0.0) return Vec2{0.0, 0.0};
  return (goal - x) / reach;
}

}  // namespace detail

struct AttackerControl {
  Vec2 direction{};
  bool stuck = false;  // no route to the target even without inflation
};

//! Shortest-path descent toward the target with an obstacle standoff.
inline AttackerControl attacker_policy(Vec2 x_a, const Scenario& s, const AttackerGuide& g) {
  if (s.in_target(x_a)) return {};
  if (g.inflated && detail::reachable(*g.inflated, x_a)) {
    return {detail::first_leg(*g.inflated, x_a), false};
  }
  if (detail::reachable(*g.plain, x_a)) return {detail::first_leg(*g.plain, x_a), false};
  return {{0.0, 0.0}, true};
}

//! The route the attacker policy follows from x_a, for prediction.
inline std::vector<Vec2> attacker_route(Vec2 x_a, const Scenario& s, const AttackerGuide& g) {
  if (s.in_target(x_a)) return {x_a};
  if (g.inflated && detail::reachable(*g.inflated, x_a)) {
    return extract_path(*g.inflated, x_a).vertices;
  }
  if (detail::reachable(*g.plain, x_a)) return extract_path(*g.plain, x_a).vertices;
  return {x_a};
}

//! Semi-open-loop state of one matched defender.
struct PdPolicyState {
  int attacker = -1;
  std::size_t path_index = 0;
  PStar p_star;
  std::shared_ptr<const DistanceField> to_pstar;
  Phase phase = Phase::GotoPStar;
  double arc = 0.0;  // position along the path once on it
};

//! Go to p*, then move along the path toward the attacker's nearer level-set
//! image, then keep pace with it. Returns a control in the unit disk.
inline Vec2 defender_policy_pd(Vec2 x_d, Vec2 x_a, const PathOfDefense& path, PdPolicyState& st,
                               double v_d, double dt, double capture_radius) {
  if (st.phase == Phase::GotoPStar) {
    if (auto u = detail::land_on(x_d, st.p_star.point, v_d, dt)) {
      st.phase = Phase::InterceptImage;
      st.arc = st.p_star.arc;
      return *u;
    }
    return detail::first_leg(*st.to_pstar, x_d);
  }
  std::optional<LevelSetImage> img;
  for (Anchor a : {Anchor::A, Anchor::B}) {
    try {
      const LevelSetImage li = attacker_level_set_image(path, x_a, a);
      if (!img || std::abs(li.arc - st.arc) < std::abs(img->arc - st.arc)) img = li;
    } catch (const ValidationError&) {
    }
  }
  if (!img) return {0.0, 0.0};
  const double reach = v_d * dt;
  const double next = st.arc + std::clamp(img->arc - st.arc, -reach, reach);
  const Vec2 goal = path.point_at(next);
  st.arc = next;
  if (distance(goal, img->point) <= capture_radius) st.phase = Phase::TrackImage;
  const Vec2 d = goal - x_d;
  if (norm(d) == 0.0) return {0.0, 0.0};
  return d / std::max(reach, norm(d));
}

//! Interception plan against an attacker that follows its predicted route.
struct GreedyState {
  int attacker = -1;
  Vec2 aim{};
  std::shared_ptr<const DistanceField> to_aim;
  int age = 0;
};

inline void plan_greedy(GreedyState& st, const Domain& d, Vec2 x_d, double v_d,
                        const std::vector<Vec2>& route, double v_a, double capture_radius) {
  st.age = 0;
  const double route_len = polyline_length(route);
  const double h = d.grid.cell_size;
  const DistanceField from_d =
      solve_point(d, x_d, v_d / v_a * route_len + capture_radius + 4.0 * h);
  std::optional<Vec2> first, best;
  double best_slack = -kInf;
  double s = 0.0;
  for (std::size_t k = 0; k < route.size(); ++k) {
    if (k > 0) s += distance(route[k - 1], route[k]);
    const double dd = distance_to(from_d, route[k]);
    if (!std::isfinite(dd)) continue;
    const double slack = v_d * s / v_a + capture_radius - dd;
    if (slack >= 0.5 * capture_radius && !first) first = route[k];
    if (slack > best_slack) {
      best_slack = slack;
      best = route[k];
    }
  }
  if (first) {
    st.aim = *first;
  } else if (best && best_slack >= 0.0) {
    st.aim = *best;
  } else {
    st.aim = route.front();  // plain pursuit
  }
  st.to_aim = std::make_shared<const DistanceField>(solve_point(d, st.aim));
}

inline Vec2 defender_policy_greedy(Vec2 x_d, const GreedyState& st, double v_d, double dt) {
  if (auto u = detail::land_on(x_d, st.aim, v_d, dt)) return *u;
  return detail::first_leg(*st.to_aim, x_d);
}

//! Explicit Euler with wall sliding: a blocked move keeps whichever axis
//! component stays free, else the player stays put.
inline Vec2 step_player(const Scenario& s, Vec2 x, Vec2 u, double speed, double dt) {
  const double n = norm(u);
  if (n > 1.0) u = u / n;
  const Vec2 next = x + u * (speed * dt);
  if (s.free_point(next)) return next;
  const Vec2 along_x{next.x, x.y};
  const Vec2 along_y{x.x, next.y};
  const bool fx = s.free_point(along_x) && next.x != x.x;
  const bool fy = s.free_point(along_y) && next.y != x.y;
  if (fx && fy) return std::abs(u.x) >= std::abs(u.y) ? along_x : along_y;
  if (fx) return along_x;
  if (fy) return along_y;
  return x;
}

inline JointState step(const Scenario& s, const JointState& x, const std::vector<Vec2>& u_a,
                       const std::vector<Vec2>& u_d, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  JointState out = x;
  for (std::size_t j = 0; j < x.attacker_positions.size(); ++j) {
    out.attacker_positions[j] =
        step_player(s, x.attacker_positions[j], u_a[j], s.attackers[j].max_speed, dt);
  }
  for (std::size_t i = 0; i < x.defender_positions.size(); ++i) {
    out.defender_positions[i] =
        step_player(s, x.defender_positions[i], u_d[i], s.defenders[i].max_speed, dt);
  }
  out.time = x.time + dt;
  return out;
}

struct SimEvent {
  enum class Kind { Capture, Arrival } kind;
  double t = 0.0;
  int attacker = -1;
  int defender = -1;  // capturing defender
};

struct MatchSample {
  double t = 0.0;
  int matched = 0;
  int captured = 0;
  int fresh = 0;    // matching size without carried certificates
  int carried = 0;  // matched pairs whose edge came from carry-over only
  int size() const { return matched + captured; }
};

struct Frame {
  double t = 0.0;
  std::vector<Vec2> attackers;
  std::vector<Vec2> defenders;
};

struct Audit {
  int initial_matching = 0;
  int reached = 0;   // attackers that reached the target uncaptured
  int captured = 0;
  int bound = 0;     // N_A - initial matching
  bool within_bound() const { return reached <= bound; }
  bool monotone = true;
  // Steps where a tracking defender's nearer level-set image left its capture
  // disk (one cell of slack).
  int tracking_violations = 0;
};

struct Trajectory {
  std::vector<Frame> frames;
  std::vector<SimEvent> events;
  std::vector<MatchSample> matching;
  std::vector<std::vector<std::pair<int, int>>> pairs;  // matching per sample
  Audit audit;
  double dt = 0.0;
  std::vector<std::string> warnings;
};

//! Precomputed inputs shared across runs on one scenario.
struct SimResources {
  std::shared_ptr<const PathDefenseContext> ctx;
  std::shared_ptr<const std::vector<PathOfDefense>> paths;
  std::shared_ptr<const ValueTable> oracle;
  AttackerGuide guide;
  double margin = -1.0;
};

inline SimResources prepare(const Scenario& s, const SimConfig& c) {
  SimResources r;
  bool need_pd = s.defenders.empty() ? false : c.strategies.empty();
  bool need_oracle = false;
  for (auto st : c.strategies) {
    need_pd = need_pd || st == DefenderStrategy::PDSemiOpenLoop;
    need_oracle = need_oracle || st == DefenderStrategy::OracleGreedy;
  }
  r.ctx = std::make_shared<const PathDefenseContext>(make_context(s));
  if (need_pd) {
    const std::size_t stride = c.anchor_stride > 0 ? c.anchor_stride : default_anchor_stride(*r.ctx);
    r.paths = std::make_shared<const std::vector<PathOfDefense>>(build_paths(*r.ctx, stride, c.jobs));
  }
  if (need_oracle) {
    OracleOptions o;
    o.coarsening = c.coarsening;
    r.oracle = std::make_shared<const ValueTable>(solve_joint_game(s, o));
  }
  r.guide = make_attacker_guide(s, c.attacker_margin);
  r.margin = c.attacker_margin;
  return r;
}

//! Multiplayer episode: rematch every delta, integrate, audit.
inline Trajectory run(const Scenario& s, const SimConfig& c, const SimResources& res) {
  validate(c, s);
  const int na = static_cast<int>(s.attackers.size());
  const int nd = static_cast<int>(s.defenders.size());
  Trajectory tr;
  const double dt_cap = c.dt > 0.0 ? c.dt : std::min(c.delta, max_stable_dt(s));
  const int substeps = static_cast<int>(std::ceil(c.delta / dt_cap - 1e-9));
  const double dt = c.delta / substeps;
  tr.dt = dt;
  const Domain& dom = res.ctx->domain;

  JointState x = s.initial_state();
  std::vector<char> active(na, 1);
  int captured = 0, reached = 0;
  auto check_events = [&](double t) {
    for (int j = 0; j < na; ++j) {
      if (!active[j]) continue;
      for (int i = 0; i < nd; ++i) {
        if (capture_test(x.attacker_positions[j], x.defender_positions[i], s.capture_radius)) {
          tr.events.push_back({SimEvent::Kind::Capture, t, j, i});
          active[j] = 0;
          ++captured;
          break;
        }
      }
      if (active[j] && s.in_target(x.attacker_positions[j])) {
        tr.events.push_back({SimEvent::Kind::Arrival, t, j, -1});
        active[j] = 0;
        ++reached;
      }
    }
  };
  auto record = [&](double t) {
    tr.frames.push_back({t, x.attacker_positions, x.defender_positions});
  };
  check_events(0.0);
  record(0.0);

  // Edge bookkeeping. PD edges are fresh only on refresh rounds.
  std::vector<std::vector<std::optional<Certificate>>> cert(
      nd, std::vector<std::optional<Certificate>>(na));
  Matching prev;
  std::vector<int> assigned(nd, -1);
  std::vector<PdPolicyState> pd_state(nd);
  std::vector<GreedyState> greedy_state(nd);
  std::vector<char> greedy_mode(nd, 1);

  auto speeds = [&](int i, int j) { return Speeds{s.attackers[j].max_speed, s.defenders[i].max_speed}; };

  for (int round = 0;; ++round) {
    const double t = round * c.delta;
    bool any_active = false;
    for (char a : active) any_active = any_active || a;
    if (!any_active || t >= c.t_max - 1e-12) break;

    const bool refresh = round % c.pd_refresh == 0;
    PairwiseOutcomeMatrix fresh(nd, na);
    if (refresh && res.paths) {
      std::vector<std::vector<std::optional<PathClaim>>> claims(na);
      parallel_for(na, c.jobs, [&](std::size_t j) {
        if (active[j]) {
          claims[j] = path_claims(*res.ctx, *res.paths, x.attacker_positions[j], s.attackers[j].max_speed);
        }
      });
      parallel_for(nd, c.jobs, [&](std::size_t i) {
        if (c.strategy(i) != DefenderStrategy::PDSemiOpenLoop) return;
        const DistanceField f = solve_point(dom, x.defender_positions[i]);
        for (int j = 0; j < na; ++j) {
          cert[i][j].reset();
          if (!active[j] || s.attackers[j].max_speed > s.defenders[i].max_speed) continue;
          cert[i][j] = best_certificate(claims[j], f, speeds(static_cast<int>(i), j));
        }
      });
    }
    for (int i = 0; i < nd; ++i) {
      for (int j = 0; j < na; ++j) {
        if (!active[j]) continue;
        if (c.strategy(i) == DefenderStrategy::PDSemiOpenLoop) {
          fresh.set(i, j, cert[i][j].has_value(), Provenance::PD);
        } else {
          fresh.set(i, j,
                    query(*res.oracle, x.attacker_positions[j], x.defender_positions[i]) ==
                        Outcome::DefenderWin,
                    Provenance::Oracle);
        }
      }
    }
    PairwiseOutcomeMatrix edges = fresh;
    int carried = 0;
    Matching kept;
    for (auto [i, j] : prev.pairs) {
      if (!active[j]) continue;
      kept.pairs.push_back({i, j});
      if (c.carry_certificates && !edges.wins(i, j)) {
        edges.set(i, j, true, fresh.provenance[fresh.index(i, j)]);
        ++carried;
      }
    }
    const Matching m = max_matching(build_graph(edges), &kept);
    const Matching mf = max_matching(build_graph(fresh));
    tr.matching.push_back({t, m.size(), captured, mf.size(), carried});
    tr.pairs.push_back(m.pairs);
    if (round == 0) tr.audit.initial_matching = m.size();

    // Policy assignment.
    std::vector<int> next_assigned(nd, -1);
    for (auto [i, j] : m.pairs) next_assigned[i] = j;
    for (int i = 0; i < nd; ++i) {
      const int j = next_assigned[i];
      const bool same = j >= 0 && j == assigned[i];
      if (j >= 0 && c.strategy(i) == DefenderStrategy::PDSemiOpenLoop) {
        if (!same || greedy_mode[i]) {
          const Certificate& ce = *cert[i][j];
          PdPolicyState st;
          st.attacker = j;
          st.path_index = ce.path_index;
          st.p_star = ce.p_star;
          st.to_pstar = std::make_shared<const DistanceField>(solve_point(dom, ce.p_star.point));
          pd_state[i] = std::move(st);
          greedy_mode[i] = 0;
        }
        continue;
      }
      greedy_mode[i] = 1;
      int target = j;
      if (target < 0) {
        double best = kInf;
        for (int a = 0; a < na; ++a) {
          if (!active[a]) continue;
          const double d = distance(x.defender_positions[i], x.attacker_positions[a]);
          if (d < best) {
            best = d;
            target = a;
          }
        }
      }
      GreedyState& gs = greedy_state[i];
      if (target < 0) {
        gs.attacker = -1;
        continue;
      }
      if (gs.attacker != target || gs.age >= c.pd_refresh || !gs.to_aim) {
        gs.attacker = target;
        plan_greedy(gs, dom, x.defender_positions[i], s.defenders[i].max_speed,
                    attacker_route(x.attacker_positions[target], s, res.guide),
                    s.attackers[target].max_speed, s.capture_radius);
      }
      ++gs.age;
    }
    assigned = next_assigned;
    prev = m;

    for (int sub = 0; sub < substeps; ++sub) {
      std::vector<Vec2> ua(na, Vec2{0.0, 0.0}), ud(nd, Vec2{0.0, 0.0});
      for (int j = 0; j < na; ++j) {
        if (active[j]) ua[j] = attacker_policy(x.attacker_positions[j], s, res.guide).direction;
      }
      for (int i = 0; i < nd; ++i) {
        const double vd = s.defenders[i].max_speed;
        if (!greedy_mode[i]) {
          const int j = pd_state[i].attacker;
          if (!active[j]) continue;  // hold until the next rematch
          ud[i] = defender_policy_pd(x.defender_positions[i], x.attacker_positions[j],
                                     (*res.paths)[pd_state[i].path_index], pd_state[i], vd, dt,
                                     s.capture_radius);
        } else if (greedy_state[i].attacker >= 0 && active[greedy_state[i].attacker]) {
          ud[i] = defender_policy_greedy(x.defender_positions[i], greedy_state[i], vd, dt);
        }
      }
      x = step(s, x, ua, ud, dt);
      const double tn = t + (sub + 1) * dt;
      x.time = tn;
      check_events(tn);
      record(tn);
      for (int i = 0; i < nd; ++i) {
        if (greedy_mode[i] || pd_state[i].phase != Phase::TrackImage) continue;
        const int j = pd_state[i].attacker;
        if (!active[j]) continue;
        const PathOfDefense& path = (*res.paths)[pd_state[i].path_index];
        double gap = kInf;
        for (Anchor a : {Anchor::A, Anchor::B}) {
          try {
            const LevelSetImage li = attacker_level_set_image(path, x.attacker_positions[j], a);
            gap = std::min(gap, distance(li.point, x.defender_positions[i]));
          } catch (const ValidationError&) {
          }
        }
        if (std::isfinite(gap) && gap > s.capture_radius + s.grid.cell_size) {
          ++tr.audit.tracking_violations;
        }
      }
    }
  }
  // Final sample after the last integration window.
  {
    int matched = 0;
    for (auto [i, j] : prev.pairs) matched += active[j] ? 1 : 0;
    const double t_end = tr.frames.back().t;
    tr.matching.push_back({t_end, matched, captured, matched, 0});
  }
  tr.audit.reached = reached;
  tr.audit.captured = captured;
  tr.audit.bound = na - tr.audit.initial_matching;
  for (std::size_t k = 1; k < tr.matching.size(); ++k) {
    if (tr.matching[k].size() < tr.matching[k - 1].size()) tr.audit.monotone = false;
  }
  return tr;
}

inline Trajectory run(const Scenario& s, const SimConfig& c) { return run(s, c, prepare(s, c)); }

}  // namespace reachavoid

#endif  // REACHAVOID_SIMULATION_HPP_
