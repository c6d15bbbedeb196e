#include "campus/config.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "campus/errors.hpp"

namespace campus {

void RunConfig::validate() const {
  sim.validate();
  grid.validate();
  if (n_traj < 1) throw InvalidArgument("abc.n_traj must be at least 1");
  if (seed > static_cast<std::uint64_t>(INT64_MAX)) throw InvalidArgument("seed must be below 2^63");
  if (!(credible_level > 0.0 && credible_level < 1.0))
    throw InvalidArgument("abc.credible_level must lie in (0, 1)");
  if (ensemble_size < 1) throw InvalidArgument("ensemble.size must be at least 1");
  if (policy_runs < 1) throw InvalidArgument("policy.runs must be at least 1");
  if (sim.tolerance.weeks < 1 || sim.tolerance.cases < 1 || sim.tolerance.peak_floor < 1)
    throw InvalidArgument("ABC thresholds must be positive");
}

namespace {

std::size_t line_of(const toml::node& node) {
  return static_cast<std::size_t>(node.source().begin.line);
}

void reject_unknown(const toml::table& table, const std::set<std::string>& allowed,
                    const std::string& section) {
  for (auto&& [key, node] : table) {
    if (!allowed.contains(std::string(key.str())))
      throw ParseError("unknown key '" + (section.empty() ? "" : section + ".") +
                           std::string(key.str()) + "'",
                       line_of(node));
  }
}

const toml::table* section(const toml::table& root, const char* name) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) throw ParseError(std::string("'") + name + "' must be a table", line_of(*node));
  return node->as_table();
}

template <typename T>
bool read(const toml::table& table, const char* key, T& out) {
  const toml::node* node = table.get(key);
  if (!node) return false;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) {
      out = *v;
      return true;
    }
    throw ParseError(std::string("'") + key + "' must be a number", line_of(*node));
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value_exact<bool>()) {
      out = *v;
      return true;
    }
    throw ParseError(std::string("'") + key + "' must be a boolean", line_of(*node));
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node->value_exact<std::string>()) {
      out = *v;
      return true;
    }
    throw ParseError(std::string("'") + key + "' must be a string", line_of(*node));
  } else {
    if (auto v = node->value_exact<std::int64_t>()) {
      if (*v < 0) throw ParseError(std::string("'") + key + "' must be non-negative", line_of(*node));
      out = static_cast<T>(*v);
      return true;
    }
    throw ParseError(std::string("'") + key + "' must be an integer", line_of(*node));
  }
}

void read_range(const toml::table& table, const char* key, AxisSpec& axis) {
  const toml::node* node = table.get(key);
  if (!node) return;
  const toml::array* arr = node->as_array();
  if (!arr || arr->size() != 2)
    throw ParseError(std::string("'grid.") + key + "' must be [low, high]", line_of(*node));
  auto lo = (*arr)[0].value<double>();
  auto hi = (*arr)[1].value<double>();
  if (!lo || !hi)
    throw ParseError(std::string("'grid.") + key + "' bounds must be numbers", line_of(*node));
  axis.low = *lo;
  axis.high = *hi;
}

void read_model(const toml::table& t, ModelParams& p) {
  reject_unknown(t,
                 {"beta", "alpha", "mu", "gamma", "sigma", "tau_f", "tau_s", "tau_r", "r_i", "r_q",
                  "n_cc", "i_out", "n_total", "break_return_day"},
                 "model");
  read(t, "beta", p.beta);
  read(t, "alpha", p.alpha);
  read(t, "mu", p.mu);
  read(t, "gamma", p.gamma);
  read(t, "sigma", p.sigma);
  read(t, "tau_f", p.tau_f);
  read(t, "tau_s", p.tau_s);
  read(t, "tau_r", p.tau_r);
  read(t, "r_i", p.r_i);
  read(t, "r_q", p.r_q);
  read(t, "n_cc", p.n_cc);
  read(t, "i_out", p.i_out);
  read(t, "n_total", p.n_total);
  read(t, "break_return_day", p.break_return_day);
}

// Either `exposed` alone (everyone else susceptible) or an explicit listing.
CompartmentState read_init(const toml::table& t, Count n_total) {
  reject_unknown(t,
                 {"exposed", "s", "s_q", "e", "i_a", "i_s", "i_t", "q_i", "r_d", "r_u",
                  "q_q_exposed", "q_q_infectious", "q_q_recovered"},
                 "init");
  if (t.contains("exposed")) {
    if (t.size() != 1) throw ParseError("init.exposed cannot be combined with explicit compartments", 0);
    Count exposed = 0;
    read(t, "exposed", exposed);
    if (exposed > n_total) throw ParseError("init.exposed exceeds model.n_total", 0);
    return CompartmentState::seeded(n_total, exposed);
  }
  CompartmentState state;
  read(t, "s", state.s);
  read(t, "s_q", state.s_q);
  read(t, "e", state.e);
  read(t, "i_a", state.i_a);
  read(t, "i_s", state.i_s);
  read(t, "i_t", state.i_t);
  read(t, "q_i", state.q_i);
  read(t, "r_d", state.r_d);
  read(t, "r_u", state.r_u);
  read(t, "q_q_exposed", state.q_q_ledger.exposed);
  read(t, "q_q_infectious", state.q_q_ledger.infectious);
  read(t, "q_q_recovered", state.q_q_ledger.recovered);
  state.q_q = state.q_q_ledger.total();
  if (!t.contains("s")) {
    const Count rest = state.total() - state.s;
    if (rest > n_total) throw ParseError("init compartments exceed model.n_total", 0);
    state.s = n_total - rest;
  }
  return state;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string(e.description()), static_cast<std::size_t>(e.source().begin.line));
  }
  reject_unknown(root,
                 {"seed", "horizon_days", "model", "init", "grid", "abc", "ensemble", "policy",
                  "output"},
                 "");

  RunConfig cfg;
  cfg.seed_set = read(root, "seed", cfg.seed);
  read(root, "horizon_days", cfg.sim.horizon_days);

  if (const auto* t = section(root, "model")) read_model(*t, cfg.sim.base);
  cfg.sim.init = CompartmentState::seeded(cfg.sim.base.n_total, std::min<Count>(10, cfg.sim.base.n_total));
  if (const auto* t = section(root, "init")) cfg.sim.init = read_init(*t, cfg.sim.base.n_total);

  if (const auto* t = section(root, "grid")) {
    reject_unknown(*t, {"points", "alpha", "beta", "i_out", "alpha_points", "beta_points", "i_out_points"},
                   "grid");
    cfg.grid_set = !t->empty();
    int points = 0;
    if (read(*t, "points", points)) cfg.grid.alpha.points = cfg.grid.beta.points = cfg.grid.i_out.points = points;
    read_range(*t, "alpha", cfg.grid.alpha);
    read_range(*t, "beta", cfg.grid.beta);
    read_range(*t, "i_out", cfg.grid.i_out);
    read(*t, "alpha_points", cfg.grid.alpha.points);
    read(*t, "beta_points", cfg.grid.beta.points);
    read(*t, "i_out_points", cfg.grid.i_out.points);
  }
  if (const auto* t = section(root, "abc")) {
    reject_unknown(*t, {"n_traj", "week_tolerance", "case_tolerance", "peak_floor", "credible_level"},
                   "abc");
    cfg.n_traj_set = read(*t, "n_traj", cfg.n_traj);
    read(*t, "week_tolerance", cfg.sim.tolerance.weeks);
    read(*t, "case_tolerance", cfg.sim.tolerance.cases);
    read(*t, "peak_floor", cfg.sim.tolerance.peak_floor);
    read(*t, "credible_level", cfg.credible_level);
  }
  if (const auto* t = section(root, "ensemble")) {
    reject_unknown(*t, {"size"}, "ensemble");
    read(*t, "size", cfg.ensemble_size);
  }
  if (const auto* t = section(root, "policy")) {
    reject_unknown(*t, {"runs", "common_random_numbers"}, "policy");
    read(*t, "runs", cfg.policy_runs);
    read(*t, "common_random_numbers", cfg.common_random_numbers);
  }
  if (const auto* t = section(root, "output")) {
    reject_unknown(*t, {"dir"}, "output");
    std::string dir;
    if (read(*t, "dir", dir)) cfg.output_dir = dir;
  }

  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("out of range: ") + e.what(), 0);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string(), 0);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string to_toml(const RunConfig& c) {
  const ModelParams& p = c.sim.base;
  const CompartmentState& s = c.sim.init;
  toml::table root{
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"horizon_days", c.sim.horizon_days},
      {"model",
       toml::table{{"beta", p.beta},
                   {"alpha", p.alpha},
                   {"mu", p.mu},
                   {"gamma", p.gamma},
                   {"sigma", p.sigma},
                   {"tau_f", p.tau_f},
                   {"tau_s", p.tau_s},
                   {"tau_r", p.tau_r},
                   {"r_i", p.r_i},
                   {"r_q", p.r_q},
                   {"n_cc", p.n_cc},
                   {"i_out", p.i_out},
                   {"n_total", p.n_total},
                   {"break_return_day", p.break_return_day}}},
      {"init", toml::table{{"s", s.s},
                           {"s_q", s.s_q},
                           {"e", s.e},
                           {"i_a", s.i_a},
                           {"i_s", s.i_s},
                           {"i_t", s.i_t},
                           {"q_i", s.q_i},
                           {"r_d", s.r_d},
                           {"r_u", s.r_u},
                           {"q_q_exposed", s.q_q_ledger.exposed},
                           {"q_q_infectious", s.q_q_ledger.infectious},
                           {"q_q_recovered", s.q_q_ledger.recovered}}},
      {"grid", toml::table{{"alpha", toml::array{c.grid.alpha.low, c.grid.alpha.high}},
                           {"beta", toml::array{c.grid.beta.low, c.grid.beta.high}},
                           {"i_out", toml::array{c.grid.i_out.low, c.grid.i_out.high}},
                           {"alpha_points", c.grid.alpha.points},
                           {"beta_points", c.grid.beta.points},
                           {"i_out_points", c.grid.i_out.points}}},
      {"abc", toml::table{{"n_traj", c.n_traj},
                          {"week_tolerance", c.sim.tolerance.weeks},
                          {"case_tolerance", c.sim.tolerance.cases},
                          {"peak_floor", c.sim.tolerance.peak_floor},
                          {"credible_level", c.credible_level}}},
      {"ensemble", toml::table{{"size", static_cast<std::int64_t>(c.ensemble_size)}}},
      {"policy", toml::table{{"runs", c.policy_runs},
                             {"common_random_numbers", c.common_random_numbers}}},
      {"output", toml::table{{"dir", c.output_dir.string()}}},
  };
  std::ostringstream out;
  out << root << "\n";
  return out.str();
}

}  // namespace campus
