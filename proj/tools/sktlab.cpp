// sktlab: command-line front end for the cross-diffusion entropy laboratory.
//
// Subcommands:
//   check     validate the structural hypotheses of the configured model
//   simulate  run the implicit finite-volume solver and dump the trajectory
//   probe     compare a run against its reference and test the entropy bound
//   audit     integrate the entropy balance and report the term-by-term split
//   sweep     repeat the probe over a grid of parameter values
//
// Exit codes: 0 success, 1 configuration error, 2 hypothesis failure,
// 3 solver failure, 4 probe criterion unmet.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "skt/audit.hpp"
#include "skt/config.hpp"
#include "skt/csv.hpp"
#include "skt/entropy.hpp"
#include "skt/errors.hpp"
#include "skt/grid.hpp"
#include "skt/model.hpp"
#include "skt/solver.hpp"

namespace {

using namespace skt;

std::string path_join(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

std::string bool_word(bool b) { return b ? "yes" : "no"; }

// Reference setup shared by probe-like commands: proxy + matching forcing.
struct ReferenceSide {
  StrongProxy proxy;
  Forcing fn;  // empty in fine_proxy mode
  const Forcing* forcing() const { return fn ? &fn : nullptr; }
};

ReferenceSide make_reference(const RunConfig& cfg) {
  ReferenceSide ref;
  if (cfg.probe.mode == "manufactured") {
    ManufacturedSolution ms = manufactured_strong(cfg.model, cfg.grid, cfg.probe.m, cfg.probe.amp);
    ref.fn = ms.forcing_fn();
    ref.proxy = StrongProxy::from_manufactured(std::move(ms));
  }
  return ref;  // fine_proxy: proxy is built from the fine run later
}

int cmd_check(const RunConfig& cfg, const std::string& outdir) {
  SamplingPlan plan;
  plan.seed = cfg.seed ? cfg.seed : 1;
  HypothesisReport rep = validate_hypotheses(cfg.model, plan);
  std::cout << rep.text();
  write_rows_csv(path_join(outdir, "hypotheses.csv"), rep.rows());
  write_text_file(path_join(outdir, "config_used.txt"), cfg.render());
  return rep.ok() ? 0 : 2;
}

int cmd_simulate(const RunConfig& cfg, const std::string& outdir) {
  structural_constants(cfg.model);  // diffusion structure is required to step
  Field u0 = cfg.initial_field();

  Forcing fn;
  const Forcing* forcing = nullptr;
  if (cfg.initial.mode == "manufactured") {
    ManufacturedSolution ms = manufactured_strong(cfg.model, cfg.grid, cfg.probe.m, cfg.probe.amp);
    fn = ms.forcing_fn();
    forcing = &fn;
  }

  SimOutcome out = simulate(cfg.model, u0, cfg.sim_options(), forcing);
  write_trajectory_csv(path_join(outdir, "trajectory.csv"), out.traj, cfg.output.snapshot_every);
  {
    std::ostringstream txt;
    txt << "t,entropy,umin,umax";
    for (int i = 0; i < cfg.model.n; ++i) txt << ",mass" << (i + 1);
    txt << "\n";
    for (std::size_t k = 0; k < out.traj.states.size(); ++k) {
      const Field& f = out.traj.states[k];
      txt << fmt17(out.traj.times[k]) << ',' << fmt17(total_entropy(cfg.model, f)) << ','
          << fmt17(f.min_value()) << ',' << fmt17(f.max_value());
      for (double m : f.masses()) txt << ',' << fmt17(m);
      txt << "\n";
    }
    write_text_file(path_join(outdir, "entropy.csv"), txt.str());
  }
  write_text_file(path_join(outdir, "config_used.txt"), cfg.render());
  if (!out.completed) {
    std::cerr << "solver failure: " << out.failure << "\n";
    return 3;
  }
  std::cout << "simulate: " << out.traj.states.size() - 1 << " steps to T = "
            << out.traj.times.back() << ", " << cfg.grid.ncells() << " cells, "
            << cfg.model.n << " species\n";
  return 0;
}

int cmd_probe(const RunConfig& cfg, const std::string& outdir) {
  Field u0 = cfg.initial_field();
  ProbeReport rep = weak_strong_probe(cfg.model, cfg.grid, cfg.cutoff, u0, cfg.time.T,
                                      cfg.time.dt, cfg.probe_options(), cfg.newton_options());
  write_series_csv(path_join(outdir, "series.csv"), rep.series);
  {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("c_hat", fmt17(rep.gronwall.c_hat));
    rows.emplace_back("fit_residual", fmt17(rep.gronwall.fit_residual));
    rows.emplace_back("degenerate", bool_word(rep.gronwall.degenerate));
    rows.emplace_back("bound_ok", bool_word(rep.gronwall.bound_ok));
    rows.emplace_back("uniqueness_branch", bool_word(rep.gronwall.uniqueness_branch));
    rows.emplace_back("uniqueness_ok", bool_word(rep.gronwall.uniqueness_ok));
    rows.emplace_back("max_h", fmt17(rep.gronwall.max_h));
    rows.emplace_back("tol", fmt17(rep.tol));
    rows.emplace_back("criterion_met", bool_word(rep.criterion_met));
    rows.emplace_back("tail_threshold", fmt17(rep.fischer.l_found));
    rows.emplace_back("tail_margin", fmt17(rep.fischer.fis1_margin));
    rows.emplace_back("tail_ok", bool_word(rep.fischer.ineq1_ok));
    rows.emplace_back("square_ratio", fmt17(rep.fischer.ratio));
    rows.emplace_back("square_ok", bool_word(rep.fischer.ineq2_ok));
    write_rows_csv(path_join(outdir, "probe.csv"), rows);
  }
  write_rows_csv(path_join(outdir, "hypotheses.csv"), rep.hypotheses.rows());
  write_text_file(path_join(outdir, "probe_summary.txt"),
                  rep.summary + "\n\n" + rep.hypotheses.text());
  write_text_file(path_join(outdir, "config_used.txt"), cfg.render());
  std::cout << rep.summary << "\n";
  return rep.criterion_met ? 0 : 4;
}

int cmd_audit(const RunConfig& cfg, const std::string& outdir) {
  structural_constants(cfg.model);
  Field u0 = cfg.initial_field();
  ReferenceSide ref = make_reference(cfg);

  SimOutcome weak = simulate(cfg.model, u0, cfg.sim_options(), ref.forcing());
  if (!weak.completed) {
    std::cerr << "solver failure: " << weak.failure << "\n";
    return 3;
  }
  if (cfg.probe.mode == "fine_proxy") {
    Grid fine_grid = cfg.grid;
    for (int a = 0; a < fine_grid.dim; ++a) fine_grid.cells[a] *= cfg.probe.refinement;
    Field u0_fine = transfer(u0, fine_grid, TransferMode::prolongation);
    SimOptions fine_sim{cfg.time.T, cfg.time.dt / cfg.probe.refinement, cfg.newton_options()};
    SimOutcome fine = simulate(cfg.model, u0_fine, fine_sim, nullptr);
    if (!fine.completed) {
      std::cerr << "solver failure (reference run): " << fine.failure << "\n";
      return 3;
    }
    ref.proxy = StrongProxy::from_fine_run(cfg.probe.refinement, std::move(fine.traj));
  }

  const double window = cfg.audit.window.value_or(cfg.time.T);
  EntropyBalanceTerms terms =
      entropy_balance_terms(cfg.model, cfg.cutoff, weak.traj, ref.proxy, window);
  write_balance_csv(path_join(outdir, "balance.csv"), terms);
  std::cout << "audit: window " << terms.window << ", change " << terms.lhs
            << ", explained " << terms.rhs() << ", residual " << terms.residual << "\n";

  // Optional refinement ladder on exactly sampled reference trajectories:
  // isolates the quadrature error of the balance itself.
  if (!cfg.audit.levels.empty() && cfg.probe.mode == "manufactured") {
    std::vector<std::pair<std::string, std::string>> rows;
    std::vector<double> lx, lr;
    const int base = cfg.audit.levels.front();
    for (int lvl : cfg.audit.levels) {
      Grid g = cfg.grid;
      for (int a = 0; a < g.dim; ++a) g.cells[a] = lvl;
      ManufacturedSolution ms = manufactured_strong(cfg.model, g, cfg.probe.m, cfg.probe.amp);
      const double scale = static_cast<double>(base) / lvl;
      const double dt = cfg.time.dt * scale * scale;
      Trajectory traj;
      const int nsteps = std::max(1, static_cast<int>(std::ceil(window / dt)));
      for (int k = 0; k <= nsteps; ++k) {
        const double t = std::min(window, k * dt);
        traj.times.push_back(t);
        traj.states.push_back(ms.sample(t));
      }
      EntropyBalanceTerms tl = entropy_balance_terms(cfg.model, cfg.cutoff, traj,
                                                     StrongProxy::from_manufactured(ms), window);
      rows.emplace_back("residual_" + std::to_string(lvl), fmt17(tl.residual));
      if (tl.residual != 0) {
        lx.push_back(std::log(g.dx(0)));
        lr.push_back(std::log(std::abs(tl.residual)));
      }
    }
    double order = 0;
    if (lx.size() >= 2) {
      double xb = 0, yb = 0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        xb += lx[i];
        yb += lr[i];
      }
      xb /= lx.size();
      yb /= lr.size();
      double sxy = 0, sxx = 0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - xb) * (lr[i] - yb);
        sxx += (lx[i] - xb) * (lx[i] - xb);
      }
      order = sxy / sxx;
    }
    rows.emplace_back("order", fmt17(order));
    write_rows_csv(path_join(outdir, "audit_ladder.csv"), rows);
    std::cout << "audit ladder: observed order " << order << " over "
              << cfg.audit.levels.size() << " levels\n";
  }

  write_text_file(path_join(outdir, "config_used.txt"), cfg.render());
  return 0;
}

void apply_sweep_value(RunConfig& cfg, const std::string& key, double v) {
  if (key == "time.T")
    cfg.time.T = v;
  else if (key == "time.dt")
    cfg.time.dt = v;
  else if (key == "time.newton_tol")
    cfg.time.newton_tol = v;
  else if (key == "cutoff.K")
    cfg.cutoff.K = static_cast<int>(std::llround(v));
  else if (key == "cutoff.L")
    cfg.cutoff.L = v;
  else if (key == "cutoff.M")
    cfg.cutoff.M = v;
  else if (key == "cutoff.eps")
    cfg.cutoff.eps = v;
  else if (key == "probe.refinement")
    cfg.probe.refinement = static_cast<int>(std::llround(v));
  else if (key == "probe.perturbation")
    cfg.probe.perturbation = v;
  else
    throw InputError("sweep: unknown parameter '" + key + "'");
}

int cmd_sweep(const RunConfig& cfg, const std::string& outdir) {
  if (cfg.sweep.params.empty()) {
    std::cerr << "config error: sweep requires a [sweep] section with at least one axis\n";
    return 1;
  }
  // All value combinations, lexicographic in the order the axes were given.
  std::vector<std::vector<double>> combos{{}};
  for (const auto& [key, vals] : cfg.sweep.params) {
    (void)key;
    std::vector<std::vector<double>> next;
    next.reserve(combos.size() * vals.size());
    for (const auto& c : combos)
      for (double v : vals) {
        auto c2 = c;
        c2.push_back(v);
        next.push_back(std::move(c2));
      }
    combos = std::move(next);
  }

  struct Row {
    std::vector<double> values;
    std::string status = "ok";
    int code = 0;
    bool met = false;
    double c_hat = 0, max_h = 0, tol = 0;
  };

  auto run_one = [&cfg](std::vector<double> values) {
    Row row;
    row.values = values;
    try {
      RunConfig c2 = cfg;
      for (std::size_t a = 0; a < values.size(); ++a)
        apply_sweep_value(c2, cfg.sweep.params[a].first, values[a]);
      c2.validate();
      Field u0 = c2.initial_field();
      ProbeReport rep = weak_strong_probe(c2.model, c2.grid, c2.cutoff, u0, c2.time.T,
                                          c2.time.dt, c2.probe_options(), c2.newton_options());
      row.met = rep.criterion_met;
      row.c_hat = rep.gronwall.c_hat;
      row.max_h = rep.gronwall.max_h;
      row.tol = rep.tol;
      if (!rep.criterion_met) {
        row.status = "criterion-unmet";
        row.code = 4;
      }
    } catch (const InputError& e) {
      row.status = std::string("config-error: ") + e.what();
      row.code = 1;
    } catch (const HypothesisError& e) {
      row.status = std::string("hypothesis-error: ") + e.what();
      row.code = 2;
    } catch (const SolverError& e) {
      row.status = std::string("solver-error: ") + e.what();
      row.code = 3;
    }
    return row;
  };

  std::vector<std::future<Row>> futures;
  futures.reserve(combos.size());
  for (const auto& c : combos)
    futures.push_back(std::async(std::launch::async, run_one, c));

  std::ostringstream txt;
  txt << "row";
  for (const auto& [key, vals] : cfg.sweep.params) {
    (void)vals;
    txt << ',' << key;
  }
  txt << ",status,criterion_met,c_hat,max_h,tol\n";
  bool any_completed = false;
  int met_count = 0;
  for (std::size_t r = 0; r < futures.size(); ++r) {
    Row row = futures[r].get();
    if (row.code == 0 || row.code == 4) any_completed = true;
    if (row.met) ++met_count;
    txt << r;
    for (double v : row.values) txt << ',' << fmt17(v);
    std::string status = row.status;
    std::replace(status.begin(), status.end(), ',', ';');
    txt << ',' << status << ',' << bool_word(row.met) << ',' << fmt17(row.c_hat) << ','
        << fmt17(row.max_h) << ',' << fmt17(row.tol) << "\n";
  }
  write_text_file(path_join(outdir, "sweep.csv"), txt.str());
  write_text_file(path_join(outdir, "config_used.txt"), cfg.render());
  std::cout << "sweep: " << combos.size() << " rows, " << met_count
            << " met the probe criterion\n";
  if (any_completed) return 0;
  return 3;  // no row ran to completion
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for entropy structure in cross-diffusion systems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "path to the run configuration file")->required();
  auto* out_opt = app.add_option("--out-dir", out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "sampling seed (overrides config)");

  auto* sub_check = app.add_subcommand("check", "validate structural hypotheses");
  auto* sub_sim = app.add_subcommand("simulate", "run the finite-volume solver");
  auto* sub_probe = app.add_subcommand("probe", "weak-strong comparison probe");
  auto* sub_audit = app.add_subcommand("audit", "entropy balance term audit");
  auto* sub_sweep = app.add_subcommand("sweep", "probe over a parameter grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = RunConfig::load(config_path);
    if (seed_opt->count()) cfg.seed = seed;
    if (out_opt->count()) cfg.output.dir = out_dir;
    const std::string outdir = cfg.output.dir;

    if (sub_check->parsed()) return cmd_check(cfg, outdir);
    if (sub_sim->parsed()) return cmd_simulate(cfg, outdir);
    if (sub_probe->parsed()) return cmd_probe(cfg, outdir);
    if (sub_audit->parsed()) return cmd_audit(cfg, outdir);
    if (sub_sweep->parsed()) return cmd_sweep(cfg, outdir);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
