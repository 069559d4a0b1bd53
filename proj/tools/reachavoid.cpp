// reachavoid: command-line front end for slices, oracle tables, matchings and
// simulations. Every subcommand writes manifest.json next to its outputs.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "reachavoid/reachavoid.hpp"

namespace fs = std::filesystem;
using namespace reachavoid;

namespace {

struct Common {
  std::string scenario;
  std::string out = "out";
  int jobs = 1;
  bool allow_faster_attacker = false;
};

struct AttackerSel {
  int index = 0;
  std::string pos;
};

struct Loaded {
  Scenario s;
  std::string hash;
};

Loaded load(const Common& c) {
  LoadOptions lo;
  lo.allow_faster_attacker = c.allow_faster_attacker;
  Loaded l{load_scenario_file(c.scenario, lo), ""};
  l.hash = hash_hex(scenario_hash(l.s));
  return l;
}

Vec2 parse_pos(const std::string& text) {
  std::istringstream in(text);
  Vec2 p;
  char comma = 0;
  if (!(in >> p.x >> comma >> p.y) || comma != ',') {
    throw ValidationError("expected X,Y but got '" + text + "'");
  }
  return p;
}

Vec2 attacker_position(const Scenario& s, const AttackerSel& a) {
  Vec2 p;
  if (!a.pos.empty()) {
    p = parse_pos(a.pos);
  } else {
    if (a.index < 0 || a.index >= static_cast<int>(s.attackers.size())) {
      throw ValidationError("attacker index out of range");
    }
    p = s.attackers[a.index].position;
  }
  if (!s.free_point(p)) throw ValidationError("attacker position " + to_string(p) + " is not free");
  return p;
}

double attacker_speed(const Scenario& s, const AttackerSel& a) {
  return a.pos.empty() ? s.attackers.at(a.index).max_speed : s.attackers.at(0).max_speed;
}

double defender_speed(const Scenario& s, double fallback) {
  return s.defenders.empty() ? fallback : s.defenders[0].max_speed;
}

RunManifest manifest(const std::string& sub, const std::vector<std::string>& argv,
                     const Loaded& l) {
  RunManifest m;
  m.subcommand = sub;
  m.argv = argv;
  m.scenario_hash = l.hash;
  return m;
}

std::size_t resolve_stride(const PathDefenseContext& ctx, std::size_t stride) {
  return stride > 0 ? stride : default_anchor_stride(ctx);
}

OracleOptions oracle_options(int coarsen, int horizon) {
  OracleOptions o;
  o.coarsening = coarsen;
  o.horizon = horizon;
  return o;
}

void put_oracle_params(RunManifest& m, const ValueTable& t) {
  m.parameters["coarsen"] = t.grid.k;
  m.parameters["step_cells"] = t.step_cells;
  m.parameters["iterations"] = t.iterations;
  m.parameters["converged"] = t.converged;
  m.parameters["tie_rule"] = "capture_wins";
  for (const auto& w : t.warnings) m.warnings.push_back(w);
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--scenario", c.scenario, "scenario JSON file")->required();
  app->add_option("--out", c.out, "output directory");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--allow-faster-attacker", c.allow_faster_attacker,
                "accept attackers faster than some defender (oracle only)");
}

void add_attacker(CLI::App* app, AttackerSel& a) {
  auto* idx = app->add_option("--attacker-index", a.index, "attacker from the scenario");
  app->add_option("--attacker-pos", a.pos, "explicit attacker position X,Y")->excludes(idx);
}

}  // namespace

int main(int argc, char** argv) {
  // argv[0] is left out so manifests do not depend on the install path.
  const std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  CLI::App app{"Reach-avoid game toolkit: path-defense slices, discrete oracle, matching, simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  AttackerSel atk;
  std::size_t stride = 0;
  int coarsen = 0, horizon = 0;

  // slice
  auto* slice = app.add_subcommand("slice", "path-defense slice for one attacker position");
  add_common(slice, common);
  add_attacker(slice, atk);
  slice->add_option("--stride", stride, "anchor stride in boundary cells (0 = default)");

  // pairwise
  int def_index = 0;
  std::string provenance = "pd";
  auto* pairwise = app.add_subcommand("pairwise", "one defender against one attacker");
  add_common(pairwise, common);
  add_attacker(pairwise, atk);
  pairwise->add_option("--defender-index", def_index, "defender from the scenario");
  pairwise->add_option("--provenance", provenance, "pd or oracle")
      ->check(CLI::IsMember({"pd", "oracle"}));
  pairwise->add_option("--stride", stride, "anchor stride (0 = default)");
  pairwise->add_option("--coarsen", coarsen, "oracle coarsening (0 = automatic)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "solve the discrete joint game and write the table");
  add_common(oracle, common);
  oracle->add_option("--coarsen", coarsen, "coarsening factor (0 = automatic)");
  oracle->add_option("--horizon", horizon, "max backward-induction levels (0 = unbounded)");

  // oracle-slice
  std::string table_path;
  auto* oslice = app.add_subcommand("oracle-slice", "oracle defender-winning mask for one attacker");
  add_common(oslice, common);
  add_attacker(oslice, atk);
  oslice->add_option("--table", table_path, "table from `oracle` (solved afresh if omitted)");
  oslice->add_option("--coarsen", coarsen, "coarsening factor (0 = automatic)");

  // match
  auto* match = app.add_subcommand("match", "pairwise matrix, maximum matching and guarantee");
  add_common(match, common);
  match->add_option("--provenance", provenance, "pd or oracle")
      ->check(CLI::IsMember({"pd", "oracle"}));
  match->add_option("--stride", stride, "anchor stride (0 = default)");
  match->add_option("--coarsen", coarsen, "oracle coarsening (0 = automatic)");

  // simulate
  SimConfig sim;
  std::string strategy = "pd";
  auto* simulate = app.add_subcommand("simulate", "multiplayer episode with real-time rematching");
  add_common(simulate, common);
  simulate->add_option("--delta", sim.delta, "rematch interval");
  simulate->add_option("--dt", sim.dt, "integration step (0 = automatic)");
  simulate->add_option("--t-max", sim.t_max, "horizon");
  simulate->add_option("--margin", sim.attacker_margin, "attacker obstacle standoff");
  simulate->add_option("--strategy", strategy, "pd or oracle, for every defender")
      ->check(CLI::IsMember({"pd", "oracle"}));
  simulate->add_option("--pd-refresh", sim.pd_refresh, "recompute PD edges every N rematches");
  simulate->add_option("--stride", stride, "anchor stride (0 = default)");
  simulate->add_option("--coarsen", coarsen, "oracle coarsening (0 = automatic)");
  bool no_carry = false;
  simulate->add_flag("--no-carry", no_carry, "drop matched edges that fail recomputation");

  // compare
  auto* compare = app.add_subcommand("compare", "PD slice against the oracle slice");
  add_common(compare, common);
  add_attacker(compare, atk);
  compare->add_option("--stride", stride, "anchor stride (0 = default)");
  compare->add_option("--coarsen", coarsen, "oracle coarsening (0 = automatic)");

  // field
  std::string source = "target";
  auto* field = app.add_subcommand("field", "distance field export (CSV and 16-bit PGM)");
  add_common(field, common);
  field->add_option("--source", source, "`target` or a point X,Y");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Loaded l = load(common);
    const Scenario& s = l.s;
    const fs::path out = common.out;
    fs::create_directories(out);

    if (*slice) {
      const Vec2 xa = attacker_position(s, atk);
      const auto ctx = make_context(s);
      const std::size_t st = resolve_stride(ctx, stride);
      const auto paths = build_paths(ctx, st, common.jobs);
      const double va = attacker_speed(s, atk);
      const auto sl = slice_union(ctx, paths, xa, {va, defender_speed(s, va)}, common.jobs);
      write_mask_pgm(out / "slice.pgm", s.grid, sl.mask);
      write_mask_csv(out / "slice.csv", s.grid, sl.mask);
      {
        auto f = open_out(out / "provenance.csv");
        f << "i,j,path_id,pstar_x,pstar_y\n";
        for (std::size_t k = 0; k < s.grid.size(); ++k) {
          if (sl.provenance[k] < 0) continue;
          const Cell c = s.grid.cell(k);
          const PathClaim* pc = sl.claim_for(sl.provenance[k]);
          f << c.i << ',' << c.j << ',' << sl.provenance[k] << ',' << fmt9(pc->p_star.point.x)
            << ',' << fmt9(pc->p_star.point.y) << '\n';
        }
      }
      {
        auto f = open_out(out / "paths.csv");
        f << "path_id,ea_x,ea_y,eb_x,eb_y,length,claimed_cells,attacker_time\n";
        for (const auto& p : paths) {
          const PathClaim* pc = sl.claim_for(p.id);
          f << p.id << ',' << fmt9(p.e_a.x) << ',' << fmt9(p.e_a.y) << ',' << fmt9(p.e_b.x) << ','
            << fmt9(p.e_b.y) << ',' << fmt9(p.length()) << ',' << (pc ? pc->cells : 0) << ','
            << (pc ? fmt9(pc->attacker_time) : std::string("")) << '\n';
        }
      }
      RunManifest m = manifest("slice", args, l);
      m.parameters["attacker"] = {xa.x, xa.y};
      m.parameters["stride"] = st;
      m.parameters["paths"] = paths.size();
      m.parameters["touch_tol_cells"] = kTouchTolCells;
      m.outputs = {"slice.pgm", "slice.csv", "provenance.csv", "paths.csv"};
      m.warnings = sl.warnings;
      write_manifest(out, m);
      std::printf("paths %zu usable %zu slice cells %zu\n", paths.size(), sl.claims.size(),
                  count(sl.mask));
      for (const auto& w : sl.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      return 0;
    }

    if (*pairwise) {
      const Vec2 xa = attacker_position(s, atk);
      if (def_index < 0 || def_index >= static_cast<int>(s.defenders.size())) {
        throw ValidationError("defender index out of range");
      }
      const Vec2 xd = s.defenders[def_index].position;
      std::ostringstream rep;
      RunManifest m = manifest("pairwise", args, l);
      m.parameters["attacker"] = {xa.x, xa.y};
      m.parameters["defender"] = {xd.x, xd.y};
      m.parameters["provenance"] = provenance;
      bool win = false;
      if (provenance == "pd") {
        const auto ctx = make_context(s);
        const std::size_t st = resolve_stride(ctx, stride);
        const auto paths = build_paths(ctx, st, common.jobs);
        const Speeds v{attacker_speed(s, atk), s.defenders[def_index].max_speed};
        const auto sl = slice_union(ctx, paths, xa, v, common.jobs);
        win = pairwise_outcome_pd(sl, s.grid, xd);
        rep << "outcome " << (win ? "DEFENDER_WIN" : "ATTACKER_WIN") << " (pd)\n";
        const std::int32_t pid = sl.provenance[s.grid.index(s.grid.cell_of(xd))];
        if (win && pid >= 0) {
          const PathClaim* pc = sl.claim_for(pid);
          const auto& p = paths[static_cast<std::size_t>(pid)];
          rep << "witness path " << pid << " e_a " << to_string(p.e_a) << " e_b " << to_string(p.e_b)
              << " length " << fmt9(p.length()) << "\n";
          rep << "p* " << to_string(pc->p_star.point) << " attacker_time " << fmt9(pc->attacker_time)
              << "\n";
        }
        m.parameters["stride"] = st;
      } else {
        const ValueTable t = solve_joint_game(s, oracle_options(coarsen, horizon));
        win = query(t, xa, xd) == Outcome::DefenderWin;
        rep << "outcome " << (win ? "DEFENDER_WIN" : "ATTACKER_WIN") << " (oracle)\n";
        const auto a = state_of(t.grid, xa), d = state_of(t.grid, xd);
        rep << "witness coarse cells attacker " << to_string(t.grid.center(a)) << " defender "
            << to_string(t.grid.center(d)) << " status " << to_string(t.at(a, d)) << "\n";
        put_oracle_params(m, t);
      }
      auto f = open_out(out / "report.txt");
      f << rep.str();
      m.outputs = {"report.txt"};
      write_manifest(out, m);
      std::cout << rep.str();
      return 0;
    }

    if (*oracle) {
      const auto t0 = std::chrono::steady_clock::now();
      const ValueTable t = solve_joint_game(s, oracle_options(coarsen, horizon));
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      {
        auto f = open_out(out / "table.raot", true);
        write_table(t, scenario_hash(s), f);
      }
      RunManifest m = manifest("oracle", args, l);
      put_oracle_params(m, t);
      m.parameters["horizon"] = horizon;
      m.parameters["states"] = t.n();
      m.outputs = {"table.raot"};
      write_manifest(out, m);
      std::printf("coarse %dx%d free %zu joint %zu levels %d converged %s (%.2f s)\n",
                  t.grid.coarse.width, t.grid.coarse.height, t.n(), t.grid.joint_states(),
                  t.iterations, t.converged ? "yes" : "no", secs);
      for (const auto& w : t.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      return 0;
    }

    if (*oslice) {
      const Vec2 xa = attacker_position(s, atk);
      ValueTable t;
      if (!table_path.empty()) {
        std::ifstream in(table_path, std::ios::binary);
        if (!in) throw ValidationError("cannot read " + table_path);
        TableHeader h;
        t = read_table(in, s, &h);
        if (h.scenario_hash != scenario_hash(s)) throw ValidationError("table was built for another scenario");
      } else {
        t = solve_joint_game(s, oracle_options(coarsen, horizon));
      }
      const Mask m = oracle_slice(t, s, xa);
      write_mask_pgm(out / "oracle_slice.pgm", s.grid, m);
      write_mask_csv(out / "oracle_slice.csv", s.grid, m);
      RunManifest rm = manifest("oracle-slice", args, l);
      rm.parameters["attacker"] = {xa.x, xa.y};
      put_oracle_params(rm, t);
      rm.outputs = {"oracle_slice.pgm", "oracle_slice.csv"};
      write_manifest(out, rm);
      std::printf("oracle slice cells %zu\n", count(m));
      return 0;
    }

    if (*match) {
      const int nd = static_cast<int>(s.defenders.size());
      const int na = static_cast<int>(s.attackers.size());
      PairwiseOutcomeMatrix mat(nd, na);
      mat.scenario_hash = scenario_hash(s);
      RunManifest rm = manifest("match", args, l);
      rm.parameters["provenance"] = provenance;
      if (provenance == "pd") {
        const auto ctx = make_context(s);
        const std::size_t st = resolve_stride(ctx, stride);
        const auto paths = build_paths(ctx, st, common.jobs);
        rm.parameters["stride"] = st;
        std::vector<SliceResult> slices(na);
        parallel_for(na, common.jobs, [&](std::size_t j) {
          slices[j] = slice_union(ctx, paths, s.attackers[j].position,
                                  {s.attackers[j].max_speed, s.attackers[j].max_speed});
        });
        for (int i = 0; i < nd; ++i) {
          for (int j = 0; j < na; ++j) {
            bool w = false;
            if (s.attackers[j].max_speed <= s.defenders[i].max_speed) {
              // Slices scale with the defender speed; recompute only when it differs.
              const SliceResult sl =
                  s.defenders[i].max_speed == s.attackers[j].max_speed
                      ? slices[j]
                      : slice_union(ctx, paths, s.attackers[j].position,
                                    {s.attackers[j].max_speed, s.defenders[i].max_speed});
              w = pairwise_outcome_pd(sl, s.grid, s.defenders[i].position);
            }
            mat.set(i, j, w, Provenance::PD);
          }
        }
      } else {
        const ValueTable t = solve_joint_game(s, oracle_options(coarsen, horizon));
        put_oracle_params(rm, t);
        for (int i = 0; i < nd; ++i) {
          for (int j = 0; j < na; ++j) {
            mat.set(i, j, query(t, s.attackers[j].position, s.defenders[i].position) ==
                              Outcome::DefenderWin,
                    Provenance::Oracle);
          }
        }
      }
      const Matching mm = max_matching(build_graph(mat));
      const DefenseGuarantee g = defense_guarantee(mm, na, s.m);
      std::ostringstream rep;
      rep << "matrix (rows = defenders, cols = attackers, 1 = defender wins)\n";
      for (int i = 0; i < nd; ++i) {
        rep << "  D" << i << ' ';
        for (int j = 0; j < na; ++j) rep << (mat.wins(i, j) ? '1' : '0');
        rep << '\n';
      }
      rep << "matching";
      for (auto [d, a] : mm.pairs) rep << " D" << d << "-A" << a;
      rep << "\nm* " << mm.size() << "\n";
      rep << "blocked " << g.blocked << "\nbound_reaching " << g.bound_reaching << "\n";
      rep << "attackers_win_m " << (g.attackers_win_m ? "true" : "false") << " (m = " << s.m << ")\n";
      {
        auto f = open_out(out / "matrix.csv");
        f << "defender,attacker,win,provenance\n";
        for (int i = 0; i < nd; ++i) {
          for (int j = 0; j < na; ++j) {
            f << i << ',' << j << ',' << (mat.wins(i, j) ? 1 : 0) << ','
              << to_string(mat.provenance[mat.index(i, j)]) << '\n';
          }
        }
      }
      auto f = open_out(out / "report.txt");
      f << rep.str();
      rm.outputs = {"matrix.csv", "report.txt"};
      write_manifest(out, rm);
      std::cout << rep.str();
      return 0;
    }

    if (*simulate) {
      sim.jobs = common.jobs;
      sim.anchor_stride = stride;
      sim.coarsening = coarsen;
      sim.carry_certificates = !no_carry;
      sim.strategies.assign(s.defenders.size(), strategy == "pd" ? DefenderStrategy::PDSemiOpenLoop
                                                                 : DefenderStrategy::OracleGreedy);
      validate(sim, s);
      const SimResources res = prepare(s, sim);
      const Trajectory tr = run(s, sim, res);
      {
        auto f = open_out(out / "trajectory.csv");
        f << "t,player,x,y\n";
        for (const auto& fr : tr.frames) {
          for (std::size_t j = 0; j < fr.attackers.size(); ++j) {
            f << fmt9(fr.t) << ",A" << j << ',' << fmt9(fr.attackers[j].x) << ','
              << fmt9(fr.attackers[j].y) << '\n';
          }
          for (std::size_t i = 0; i < fr.defenders.size(); ++i) {
            f << fmt9(fr.t) << ",D" << i << ',' << fmt9(fr.defenders[i].x) << ','
              << fmt9(fr.defenders[i].y) << '\n';
          }
        }
      }
      {
        auto f = open_out(out / "events.csv");
        f << "t,kind,attacker,defender\n";
        for (const auto& e : tr.events) {
          f << fmt9(e.t) << ',' << (e.kind == SimEvent::Kind::Capture ? "capture" : "arrival") << ','
            << e.attacker << ',' << e.defender << '\n';
        }
      }
      {
        auto f = open_out(out / "matching.csv");
        f << "t,size,matched,captured,fresh,carried\n";
        for (const auto& m : tr.matching) {
          f << fmt9(m.t) << ',' << m.size() << ',' << m.matched << ',' << m.captured << ','
            << m.fresh << ',' << m.carried << '\n';
        }
      }
      RunManifest rm = manifest("simulate", args, l);
      rm.parameters["delta"] = sim.delta;
      rm.parameters["dt"] = tr.dt;
      rm.parameters["t_max"] = sim.t_max;
      rm.parameters["margin"] = sim.attacker_margin;
      rm.parameters["strategy"] = strategy;
      rm.parameters["pd_refresh"] = sim.pd_refresh;
      rm.parameters["carry_certificates"] = sim.carry_certificates;
      if (res.paths) rm.parameters["paths"] = res.paths->size();
      if (res.oracle) put_oracle_params(rm, *res.oracle);
      rm.parameters["audit"] = {{"initial_matching", tr.audit.initial_matching},
                                {"reached", tr.audit.reached},
                                {"captured", tr.audit.captured},
                                {"bound", tr.audit.bound},
                                {"monotone", tr.audit.monotone},
                                {"tracking_violations", tr.audit.tracking_violations}};
      rm.outputs = {"trajectory.csv", "events.csv", "matching.csv"};
      write_manifest(out, rm);
      std::printf("m*(0) %d captured %d reached %d bound %d monotone %s\n",
                  tr.audit.initial_matching, tr.audit.captured, tr.audit.reached, tr.audit.bound,
                  tr.audit.monotone ? "yes" : "no");
      return 0;
    }

    if (*compare) {
      const Vec2 xa = attacker_position(s, atk);
      const auto ctx = make_context(s);
      const std::size_t st = resolve_stride(ctx, stride);
      const auto paths = build_paths(ctx, st, common.jobs);
      const double va = attacker_speed(s, atk);
      const Speeds v{va, defender_speed(s, va)};
      const auto sl = slice_union(ctx, paths, xa, v, common.jobs);
      const ValueTable t = solve_joint_game(s, oracle_options(coarsen, horizon));
      const Mask om = oracle_slice(t, s, xa);
      const SliceComparison c = compare_slices(s.grid, sl.mask, om);
      write_pgm8(out / "diff.pgm", s.grid, [&](std::size_t k) {
        static constexpr int kLevel[] = {0, 64, 128, 192, 255};
        return kLevel[c.diff[k]];
      });
      std::ostringstream rep;
      rep << "pd_area_cells " << c.pd_area << "\noracle_area_cells " << c.oracle_area << "\n";
      rep << "area_ratio " << fmt9(c.area_ratio()) << "\n";
      rep << "pd_only_cells " << c.pd_only << "\nviolations_outside_band " << c.violations << "\n";
      rep << "band_cells " << kBandCells << "\n";
      auto f = open_out(out / "report.txt");
      f << rep.str();
      RunManifest rm = manifest("compare", args, l);
      rm.parameters["attacker"] = {xa.x, xa.y};
      rm.parameters["stride"] = st;
      put_oracle_params(rm, t);
      rm.outputs = {"diff.pgm", "report.txt"};
      write_manifest(out, rm);
      std::cout << rep.str();
      return 0;
    }

    if (*field) {
      const Domain d = make_domain(s);
      const DistanceField f =
          source == "target" ? solve(d, s.target) : solve_point(d, parse_pos(source));
      write_field_csv(out / "field.csv", s.grid, f.values);
      write_field_pgm16(out / "field.pgm", s.grid, f.values);
      RunManifest rm = manifest("field", args, l);
      rm.parameters["source"] = source;
      rm.outputs = {"field.csv", "field.pgm"};
      write_manifest(out, rm);
      return 0;
    }
  } catch (const BudgetExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
