#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "campus/abc.hpp"
#include "campus/config.hpp"
#include "campus/ensemble.hpp"
#include "campus/errors.hpp"
#include "campus/io.hpp"
#include "campus/peaks.hpp"
#include "campus/policy.hpp"
#include "campus/reproduction.hpp"
#include "campus/server.hpp"

namespace fs = std::filesystem;
using namespace campus;

namespace {

// Smaller than the full 21-point, 1000-trajectory fit so a laptop finishes in
// well under a minute. --full or an explicit config restores the full scale.
constexpr int kDeskGridPoints = 11;
constexpr int kDeskTrajectories = 200;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned workers = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("-c,--config", c.config_path, "TOML run configuration")->check(CLI::ExistingFile);
  cmd->add_option("-s,--seed", c.seed, "base seed (defaults to the config seed)");
  if (with_out) cmd->add_option("-o,--out", c.out, "output directory");
  cmd->add_option("-j,--workers", c.workers, "worker threads (0 = all cores)");
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  if (c.seed) {
    cfg.seed = *c.seed;
  } else {
    std::cerr << "seed: " << cfg.seed << (cfg.seed_set ? " (from config)" : " (default)") << "\n";
  }
  return cfg;
}

fs::path out_dir(const Common& c, const RunConfig& cfg, const char* command) {
  return c.out.empty() ? cfg.output_dir / command : fs::path(c.out);
}

void write_stream(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream buffer;
  body(buffer);
  write_text(path, buffer.str());
}

PosteriorSample load_posterior(const fs::path& path) {
  fs::path file = path;
  if (fs::is_directory(file)) file /= "acceptance_surface.csv";
  return read_acceptance_surface_csv(file);
}

struct ProgressBar {
  bool enabled = false;
  int last = -1;
  void operator()(double fraction) {
    if (!enabled) return;
    const int pct = static_cast<int>(fraction * 100.0);
    if (pct == last) return;
    last = pct;
    std::cerr << "\r" << pct << "%" << (pct >= 100 ? "\n" : "") << std::flush;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Campus COVID-19 testing and quarantine simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());
  std::vector<std::string> args(argv, argv + argc);

  // simulate
  Common sim_c;
  std::optional<double> sim_alpha, sim_beta;
  std::optional<Count> sim_iout;
  std::optional<int> sim_horizon;
  auto* sim = app.add_subcommand("simulate", "run one stochastic trajectory");
  add_common(sim, sim_c);
  sim->add_option("--alpha", sim_alpha, "share of exposed who become symptomatic");
  sim->add_option("--beta", sim_beta, "transmission rate");
  sim->add_option("--i-out", sim_iout, "infections brought back after the break");
  sim->add_option("--horizon", sim_horizon, "days to simulate");

  // stats
  std::string stats_path;
  Count stats_floor = 20;
  auto* stats = app.add_subcommand("stats", "detect peaks in a week,cases CSV");
  stats->add_option("observed", stats_path, "weekly case CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--floor", stats_floor, "smallest height counted as a peak");

  // r0
  Common r0_c;
  std::optional<double> r0_alpha, r0_beta;
  bool r0_json = false;
  auto* r0 = app.add_subcommand("r0", "basic reproduction number");
  r0->add_option("-c,--config", r0_c.config_path, "TOML run configuration")->check(CLI::ExistingFile);
  r0->add_option("--alpha", r0_alpha);
  r0->add_option("--beta", r0_beta);
  r0->add_flag("--json", r0_json, "print JSON");

  // fit
  Common fit_c;
  std::string fit_observed;
  std::optional<int> fit_points, fit_traj;
  bool fit_full = false, fit_quiet = false;
  auto* fit = app.add_subcommand("fit", "rejection ABC fit to observed weekly cases");
  add_common(fit, fit_c);
  fit->add_option("-d,--observed", fit_observed, "weekly case CSV (week,cases)");
  fit->add_option("--grid-points", fit_points, "points per grid axis");
  fit->add_option("--n-traj", fit_traj, "trajectories per grid point");
  fit->add_flag("--full", fit_full, "21 points per axis and 1000 trajectories");
  fit->add_flag("-q,--quiet", fit_quiet, "no progress output");

  // ensemble
  Common ens_c;
  std::string ens_posterior;
  std::optional<std::size_t> ens_size;
  auto* ens = app.add_subcommand("ensemble", "posterior predictive curves and functional boxplot");
  add_common(ens, ens_c);
  ens->add_option("-p,--posterior", ens_posterior, "fit output directory or acceptance_surface.csv")
      ->required();
  ens->add_option("-n,--size", ens_size, "number of curves");

  // policy
  Common pol_c;
  std::string pol_posterior, pol_strategies;
  std::optional<int> pol_runs;
  bool pol_independent = false, pol_quiet = false;
  auto* pol = app.add_subcommand("policy", "compare surveillance testing strategies");
  add_common(pol, pol_c);
  pol->add_option("-p,--posterior", pol_posterior, "fit output directory or acceptance_surface.csv")
      ->required();
  pol->add_option("--strategies", pol_strategies, "JSON file with a list of {sigma, interval_days, label}")
      ->check(CLI::ExistingFile);
  pol->add_option("-n,--runs", pol_runs, "semesters per strategy");
  pol->add_flag("--independent", pol_independent, "fresh random numbers for every strategy");
  pol->add_flag("-q,--quiet", pol_quiet, "no progress output");

  // serve
  ServerOptions srv_opts;
  if (const char* env = std::getenv("CAMPUS_PORT")) srv_opts.port = std::atoi(env);
  auto* srv = app.add_subcommand("serve", "HTTP API for the dashboard");
  srv->add_option("--host", srv_opts.host);
  srv->add_option("--port", srv_opts.port, "listen port (env CAMPUS_PORT)");
  srv->add_option("--data-dir", srv_opts.data_dir, "where jobs and posteriors are kept");
  srv->add_option("--web", srv_opts.web_dir, "static files for the dashboard");
  srv->add_option("--jobs", srv_opts.job_workers, "jobs run at the same time");
  srv->add_option("-j,--workers", srv_opts.compute_workers, "threads per job (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*sim) {
      RunConfig cfg = load(sim_c);
      ModelParams params = cfg.sim.base;
      if (sim_alpha) params.alpha = *sim_alpha;
      if (sim_beta) params.beta = *sim_beta;
      if (sim_iout) params.i_out = *sim_iout;
      if (sim_horizon) cfg.sim.horizon_days = *sim_horizon;
      cfg.sim.base = params;
      cfg.validate();
      RngStream rng(cfg.seed);
      const Trajectory traj = simulate(params, cfg.sim.init, cfg.sim.horizon_days, rng);
      const fs::path dir = out_dir(sim_c, cfg, "simulate");
      write_stream(dir / "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
      write_stream(dir / "weekly_cases.csv",
                   [&](std::ostream& o) { write_observed_csv(o, weekly_cases(traj)); });
      write_text(dir / "peaks.json", dump(to_json(detect_peaks(weekly_cases(traj), cfg.sim.tolerance.peak_floor))));
      write_manifest(dir, cfg, "simulate", args);
      std::cout << dir.string() << "\n";
      return 0;
    }

    if (*stats) {
      const ObservedSeries obs = parse_observed_csv(fs::path(stats_path));
      std::cout << dump(to_json(detect_peaks(obs.cases, stats_floor)));
      return 0;
    }

    if (*r0) {
      RunConfig cfg = r0_c.config_path.empty() ? RunConfig{} : load_config(r0_c.config_path);
      ModelParams p = cfg.sim.base;
      if (r0_alpha) p.alpha = *r0_alpha;
      if (r0_beta) p.beta = *r0_beta;
      p.validate();
      const NextGenInputs in = NextGenInputs::from(p);
      const double spectral = r0_spectral(in);
      const double closed = r0_closed_form(p.alpha, p.beta);
      if (r0_json) {
        std::cout << dump({{"alpha", p.alpha}, {"beta", p.beta}, {"r0", spectral}, {"closed_form", closed}});
      } else {
        std::printf("%.10g\n", spectral);
        std::fprintf(stderr, "closed form (14.8 - 10.8 alpha) beta = %.10g\n", closed);
      }
      return 0;
    }

    if (*fit) {
      if (fit_observed.empty()) {
        std::cerr << "fit: no observed data; pass --observed week_cases.csv\n";
        return 2;
      }
      if (!fs::exists(fit_observed)) {
        std::cerr << "fit: observed file not found: " << fit_observed << "\n";
        return 2;
      }
      RunConfig cfg = load(fit_c);
      if (fit_full) {
        cfg.grid = PriorGrid::uniform(21);
        cfg.n_traj = 1000;
      } else {
        if (!cfg.grid_set) cfg.grid = PriorGrid::uniform(kDeskGridPoints);
        if (!cfg.n_traj_set) cfg.n_traj = kDeskTrajectories;
      }
      if (fit_points) {
        cfg.grid.alpha.points = cfg.grid.beta.points = cfg.grid.i_out.points = *fit_points;
      }
      if (fit_traj) cfg.n_traj = *fit_traj;
      cfg.validate();

      const ObservedSeries obs = parse_observed_csv(fs::path(fit_observed));
      const PeakSet peaks = detect_peaks(obs.cases, cfg.sim.tolerance.peak_floor);
      if (peaks.empty()) {
        std::cerr << "fit: the observed series has no peaks at or above " << cfg.sim.tolerance.peak_floor
                  << " cases\n";
        return 1;
      }
      const auto grid = build_grid(cfg.grid);
      std::cerr << "fitting " << peaks.size() << " peak(s): " << grid.size() << " grid points x "
                << cfg.n_traj << " trajectories\n";
      ProgressBar bar{!fit_quiet};
      AbcOptions opt;
      opt.n_traj = cfg.n_traj;
      opt.base_seed = cfg.seed;
      opt.workers = fit_c.workers;
      opt.progress = [&](double f) { bar(f); };
      const PosteriorSample posterior = run_abc(grid, peaks, cfg.sim, opt);

      const fs::path dir = out_dir(fit_c, cfg, "fit");
      write_stream(dir / "posterior_draws.csv",
                   [&](std::ostream& o) { write_posterior_draws_csv(o, posterior); });
      write_stream(dir / "acceptance_surface.csv",
                   [&](std::ostream& o) { write_acceptance_surface_csv(o, posterior); });
      write_stream(dir / "observed.csv", [&](std::ostream& o) { write_observed_csv(o, obs.cases); });
      write_text(dir / "observed_peaks.json", dump(to_json(peaks)));
      write_manifest(dir, cfg, "fit", args);
      if (posterior.empty()) {
        std::cerr << "fit: no trajectory matched the observed peaks; intervals.json not written\n";
        return 1;
      }
      const CredibleIntervals ci = marginal_ci(posterior, cfg.credible_level);
      write_text(dir / "intervals.json", dump(to_json(ci, posterior)));
      std::cout << dump(to_json(ci, posterior));
      return 0;
    }

    if (*ens) {
      RunConfig cfg = load(ens_c);
      if (ens_size) cfg.ensemble_size = *ens_size;
      cfg.validate();
      const PosteriorSample posterior = load_posterior(ens_posterior);
      RngStream pick(derive_seed(cfg.seed, 0xe45e));
      const auto draws = draw_posterior_params(posterior, cfg.ensemble_size, pick);
      const CurveMatrix curves = simulate_ensemble(draws, cfg.sim, cfg.seed, ens_c.workers);
      const FunctionalBand band = functional_band(curves);
      const fs::path dir = out_dir(ens_c, cfg, "ensemble");
      write_stream(dir / "band.csv", [&](std::ostream& o) { write_band_csv(o, band); });
      write_stream(dir / "curves.csv", [&](std::ostream& o) { write_curves_csv(o, curves); });
      write_text(dir / "band.json", dump(to_json(band)));
      write_manifest(dir, cfg, "ensemble", args);
      std::cout << dir.string() << "\n";
      return 0;
    }

    if (*pol) {
      RunConfig cfg = load(pol_c);
      if (pol_runs) cfg.policy_runs = *pol_runs;
      if (pol_independent) cfg.common_random_numbers = false;
      cfg.validate();
      std::vector<Strategy> strategies = default_strategy_grid();
      if (!pol_strategies.empty()) {
        std::ifstream in(pol_strategies);
        const auto j = nlohmann::json::parse(in);
        strategies.clear();
        for (const auto& s : j) strategies.push_back(strategy_from_json(s));
        if (strategies.empty()) throw InvalidArgument("strategy list is empty");
      }
      const PosteriorSample posterior = load_posterior(pol_posterior);
      ProgressBar bar{!pol_quiet};
      SweepOptions opt;
      opt.n_per_strategy = cfg.policy_runs;
      opt.base_seed = cfg.seed;
      opt.common_random_numbers = cfg.common_random_numbers;
      opt.workers = pol_c.workers;
      opt.progress = [&](double f) { bar(f); };
      const auto reports = run_policy_sweep(strategies, posterior, cfg.sim, opt);
      const fs::path dir = out_dir(pol_c, cfg, "policy");
      write_text(dir / "policy_report.json", dump(to_json(reports, opt)));
      write_stream(dir / "policy_curves.csv", [&](std::ostream& o) { write_policy_curves_csv(o, reports); });
      write_manifest(dir, cfg, "policy", args);
      for (const auto& r : reports)
        std::cout << r.strategy.label << ": detected median " << r.detected.q50
                  << ", quarantine entries median " << r.quarantine_entries.q50 << ", tests/week "
                  << std::llround(r.tests_per_week) << "\n";
      return 0;
    }

    if (*srv) return serve(srv_opts);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
