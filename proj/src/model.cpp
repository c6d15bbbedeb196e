#include "campus/model.hpp"

#include <algorithm>
#include <string>

#include "campus/errors.hpp"

namespace campus {

namespace {

void require_unit(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0))
    throw InvalidArgument(std::string(name) + " must lie in [0, 1], got " + std::to_string(value));
}

}  // namespace

void ModelParams::validate() const {
  require_unit(beta, "beta");
  require_unit(alpha, "alpha");
  require_unit(mu, "mu");
  require_unit(gamma, "gamma");
  require_unit(sigma, "sigma");
  require_unit(tau_f, "tau_f");
  require_unit(tau_s, "tau_s");
  require_unit(tau_r, "tau_r");
  require_unit(r_i, "r_i");
  require_unit(r_q, "r_q");
  if (n_total <= 0) throw InvalidArgument("n_total must be positive");
  if (n_cc < 0) throw InvalidArgument("n_cc must be non-negative");
  if (i_out < 0) throw InvalidArgument("i_out must be non-negative");
  if (i_out > n_total) throw InvalidArgument("i_out cannot exceed n_total");
  if (break_return_day < 0) throw InvalidArgument("break_return_day must be non-negative");
}

void CompartmentState::validate(Count n_total) const {
  for (const auto& field : kCompartmentFields)
    if (this->*field.member < 0)
      throw InvalidArgument("compartment " + std::string(field.name) + " is negative");
  if (q_q_ledger.exposed < 0 || q_q_ledger.infectious < 0 || q_q_ledger.recovered < 0)
    throw InvalidArgument("quarantine ledger entry is negative");
  if (q_q_ledger.total() != q_q)
    throw InvalidArgument("quarantine ledger does not sum to Q_q");
  if (total() != n_total)
    throw InvalidArgument("compartments sum to " + std::to_string(total()) + ", expected " +
                          std::to_string(n_total));
}

CompartmentState CompartmentState::seeded(Count n_total, Count exposed) {
  if (exposed < 0 || exposed > n_total) throw InvalidArgument("seeded: exposed outside [0, n_total]");
  CompartmentState state;
  state.s = n_total - exposed;
  state.e = exposed;
  return state;
}

std::array<double, 2> competing_exits(double first, double second) noexcept {
  const double sum = first + second;
  if (sum <= 1.0) return {first, second};
  return {first / sum, second / sum};
}

double force_of_infection(const CompartmentState& state, const ModelParams& params) noexcept {
  const double pressure = params.beta * static_cast<double>(state.i_a + state.i_s + state.i_t) /
                          static_cast<double>(params.n_total);
  return std::min(1.0, pressure);
}

StepResult step(const CompartmentState& state, const ModelParams& params, RngStream& rng) {
  const CompartmentState& x = state;
  DailyFlows f;

  f.n_s_e = binomial_draw(x.s, force_of_infection(x, params), rng);

  const auto e_probs = competing_exits((1.0 - params.alpha) * params.mu, params.alpha * params.mu);
  std::array<Count, 2> e_out{};
  partition_departures(x.e, e_probs, rng, e_out);
  f.n_e_ia = e_out[0];
  f.n_e_is = e_out[1];

  const auto ia_probs =
      competing_exits(params.sigma * params.tau_f, (1.0 - params.sigma) * params.gamma);
  std::array<Count, 2> ia_out{};
  partition_departures(x.i_a, ia_probs, rng, ia_out);
  f.n_ia_it = ia_out[0];
  f.n_ia_ru = ia_out[1];

  const auto is_probs = competing_exits(params.tau_s, params.gamma);
  std::array<Count, 2> is_out{};
  partition_departures(x.i_s, is_probs, rng, is_out);
  f.n_is_it = is_out[0];
  f.n_is_ru = is_out[1];

  f.n_it_qi = binomial_draw(x.i_t, params.tau_r, rng);
  f.n_qi_rd = binomial_draw(x.q_i, params.r_i, rng);

  // Inside quarantine: infectious members are tested on symptom monitoring,
  // exposed members become infectious, and everyone may be released.
  const QuarantineLedger& ledger = x.q_q_ledger;
  std::array<Count, 2> inf_out{};
  std::array<Count, 2> exp_out{};
  partition_departures(ledger.infectious, competing_exits(params.tau_s, params.r_q), rng, inf_out);
  partition_departures(ledger.exposed, competing_exits(params.mu, params.r_q), rng, exp_out);
  const Count rec_released = binomial_draw(ledger.recovered, params.r_q, rng);
  f.n_qq_it = inf_out[0];
  f.n_qq_ru = inf_out[1] + exp_out[1] + rec_released;

  f.n_sq_s = binomial_draw(x.s_q, params.r_q, rng);

  // Close contacts of today's new isolations, drawn from those who stayed put.
  const std::array<Count, 4> eligible{
      x.s - f.n_s_e,
      x.e - f.n_e_ia - f.n_e_is,
      x.i_a - f.n_ia_it - f.n_ia_ru,
      x.r_u,
  };
  std::array<Count, 4> contacts{};
  sample_without_replacement(eligible, params.n_cc * f.n_it_qi, rng, contacts);
  f.n_s_sq = contacts[0];
  f.n_e_qq = contacts[1];
  f.n_ia_qq = contacts[2];
  f.n_ru_qq = contacts[3];

  StepResult out;
  CompartmentState& y = out.state;
  y.s = x.s - f.n_s_e - f.n_s_sq + f.n_sq_s;
  y.s_q = x.s_q - f.n_sq_s + f.n_s_sq;
  y.e = x.e - f.n_e_ia - f.n_e_is - f.n_e_qq + f.n_s_e;
  y.i_a = x.i_a - f.n_ia_it - f.n_ia_qq - f.n_ia_ru + f.n_e_ia;
  y.i_s = x.i_s - f.n_is_it - f.n_is_ru + f.n_e_is;
  y.i_t = x.i_t - f.n_it_qi + f.n_ia_it + f.n_is_it + f.n_qq_it;
  y.q_i = x.q_i - f.n_qi_rd + f.n_it_qi;
  y.q_q = x.q_q - f.n_qq_it - f.n_qq_ru + f.n_e_qq + f.n_ia_qq + f.n_ru_qq;
  y.r_d = x.r_d + f.n_qi_rd;
  y.r_u = x.r_u - f.n_ru_qq + f.n_ia_ru + f.n_is_ru + f.n_qq_ru;

  y.q_q_ledger.exposed = ledger.exposed - exp_out[0] - exp_out[1] + f.n_e_qq;
  y.q_q_ledger.infectious = ledger.infectious - inf_out[0] - inf_out[1] + exp_out[0] + f.n_ia_qq;
  y.q_q_ledger.recovered = ledger.recovered - rec_released + f.n_ru_qq;

  out.flows = f;
  return out;
}

CompartmentState apply_break_injection(const CompartmentState& state, const ModelParams& params) {
  const Count moved = std::min(params.i_out, state.s);
  CompartmentState out = state;
  out.s -= moved;
  out.e += moved;
  return out;
}

void run_days(const ModelParams& params, const CompartmentState& init, int horizon_days,
              RngStream& rng, const DayVisitor& visit) {
  params.validate();
  init.validate(params.n_total);
  if (horizon_days < 1) throw InvalidArgument("horizon must be at least one day");

  CompartmentState current = init;
  for (int day = 0; day < horizon_days; ++day) {
    StepResult result = step(current, params, rng);
    if (params.break_return_day > 0 && day + 1 == params.break_return_day)
      result.state = apply_break_injection(result.state, params);
    visit(day, result.state, result.flows);
    current = result.state;
  }
}

Trajectory simulate(const ModelParams& params, const CompartmentState& init, int horizon_days,
                    RngStream& rng) {
  Trajectory traj;
  traj.params = params;
  traj.seed = rng.base_seed();
  traj.stream_index = rng.index();
  if (horizon_days > 0) {
    traj.states.reserve(static_cast<std::size_t>(horizon_days) + 1);
    traj.flows.reserve(static_cast<std::size_t>(horizon_days));
  }
  traj.states.push_back(init);
  run_days(params, init, horizon_days, rng,
           [&](int, const CompartmentState& next, const DailyFlows& flows) {
             traj.states.push_back(next);
             traj.flows.push_back(flows);
           });
  return traj;
}

}  // namespace campus
