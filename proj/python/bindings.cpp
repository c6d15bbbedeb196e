// Python bindings. Structured results cross the boundary as JSON text and are
// decoded on the Python side, so field names match the CLI artifacts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "campus/abc.hpp"
#include "campus/config.hpp"
#include "campus/ensemble.hpp"
#include "campus/errors.hpp"
#include "campus/io.hpp"
#include "campus/policy.hpp"
#include "campus/reproduction.hpp"

namespace py = pybind11;
using namespace campus;
using nlohmann::json;

namespace {

ModelParams params_from(const std::string& params_json) {
  return params_from_json(params_json.empty() ? json::object() : json::parse(params_json));
}

SimConfig sim_from(const std::string& params_json, Count exposed, int horizon_days) {
  SimConfig config;
  config.base = params_from(params_json);
  config.init = CompartmentState::seeded(config.base.n_total, exposed);
  config.horizon_days = horizon_days;
  config.validate();
  return config;
}

PosteriorSample posterior_from_csv(const std::string& text) {
  std::istringstream in(text);
  return read_acceptance_surface_csv(in);
}

std::string posterior_to_csv(const PosteriorSample& p) {
  std::ostringstream out;
  write_acceptance_surface_csv(out, p);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Campus epidemic simulator core";
  m.attr("__version__") = version_string();

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NoAcceptances>(m, "NoAcceptances", PyExc_RuntimeError);
  py::register_exception<InsufficientCurves>(m, "InsufficientCurves", PyExc_ValueError);
  py::register_exception<SingularMatrix>(m, "SingularMatrix", PyExc_ArithmeticError);

  m.def("default_params", [] { return to_json(ModelParams{}).dump(); });

  m.def(
      "simulate",
      [](const std::string& params_json, Count exposed, int horizon_days, std::uint64_t seed) {
        const SimConfig config = sim_from(params_json, exposed, horizon_days);
        py::gil_scoped_release release;
        RngStream rng(seed);
        return trajectory_summary(simulate(config.base, config.init, config.horizon_days, rng)).dump();
      },
      py::arg("params_json"), py::arg("exposed"), py::arg("horizon_days"), py::arg("seed"));

  m.def(
      "detect_peaks",
      [](const std::vector<Count>& series, Count floor) { return to_json(detect_peaks(series, floor)).dump(); },
      py::arg("series"), py::arg("floor") = 20);

  m.def(
      "r0",
      [](const std::string& params_json) {
        const ModelParams p = params_from(params_json);
        p.validate();
        return r0_spectral(NextGenInputs::from(p));
      },
      py::arg("params_json") = "");
  m.def("r0_closed_form", &r0_closed_form, py::arg("alpha"), py::arg("beta"));

  m.def(
      "fit",
      [](const std::vector<Count>& observed, const std::string& params_json, Count exposed, int horizon_days,
         int grid_points, int n_traj, std::uint64_t seed, unsigned workers) {
        const SimConfig config = sim_from(params_json, exposed, horizon_days);
        const PeakSet peaks = detect_peaks(observed, config.tolerance.peak_floor);
        AbcOptions opt;
        opt.n_traj = n_traj;
        opt.base_seed = seed;
        opt.workers = workers;
        const auto grid = build_grid(PriorGrid::uniform(grid_points));
        PosteriorSample posterior;
        {
          py::gil_scoped_release release;
          posterior = run_abc(grid, peaks, config, opt);
        }
        json result{{"observed_peaks", to_json(peaks)}, {"posterior_size", posterior.size()}};
        result["intervals"] = posterior.empty() ? json(nullptr) : to_json(marginal_ci(posterior), posterior);
        return py::make_tuple(result.dump(), posterior_to_csv(posterior));
      },
      py::arg("observed"), py::arg("params_json") = "", py::arg("exposed") = 10, py::arg("horizon_days") = 112,
      py::arg("grid_points") = 11, py::arg("n_traj") = 200, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "ensemble",
      [](const std::string& surface_csv, std::size_t size, const std::string& params_json, Count exposed,
         int horizon_days, std::uint64_t seed, unsigned workers) {
        const SimConfig config = sim_from(params_json, exposed, horizon_days);
        const PosteriorSample posterior = posterior_from_csv(surface_csv);
        py::gil_scoped_release release;
        RngStream pick(derive_seed(seed, 0xe45e));
        const auto draws = draw_posterior_params(posterior, size, pick);
        const CurveMatrix curves = simulate_ensemble(draws, config, seed, workers);
        return json{{"band", to_json(functional_band(curves))}, {"curves", curves.curves}}.dump();
      },
      py::arg("surface_csv"), py::arg("size"), py::arg("params_json") = "", py::arg("exposed") = 10,
      py::arg("horizon_days") = 112, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "functional_band",
      [](const std::vector<std::vector<Count>>& curves) {
        CurveMatrix m;
        m.curves = curves;
        m.provenance.resize(curves.size());
        return to_json(functional_band(m)).dump();
      },
      py::arg("curves"));

  m.def(
      "policy_sweep",
      [](const std::string& strategies_json, const std::string& surface_csv, int n, const std::string& params_json,
         Count exposed, int horizon_days, std::uint64_t seed, bool common_random_numbers, unsigned workers) {
        std::vector<Strategy> strategies;
        if (strategies_json.empty()) {
          strategies = default_strategy_grid();
        } else {
          for (const auto& s : json::parse(strategies_json)) strategies.push_back(strategy_from_json(s));
        }
        const SimConfig config = sim_from(params_json, exposed, horizon_days);
        const PosteriorSample posterior = posterior_from_csv(surface_csv);
        SweepOptions opt;
        opt.n_per_strategy = n;
        opt.base_seed = seed;
        opt.common_random_numbers = common_random_numbers;
        opt.workers = workers;
        py::gil_scoped_release release;
        return to_json(run_policy_sweep(strategies, posterior, config, opt), opt).dump();
      },
      py::arg("strategies_json"), py::arg("surface_csv"), py::arg("n") = 200, py::arg("params_json") = "",
      py::arg("exposed") = 10, py::arg("horizon_days") = 112, py::arg("seed") = 1,
      py::arg("common_random_numbers") = true, py::arg("workers") = 0);

  m.def(
      "parse_config",
      [](const std::string& text) { return to_toml(parse_config(text)); }, py::arg("text"),
      "Validates TOML and returns the canonical rendering with defaults filled in.");
}
