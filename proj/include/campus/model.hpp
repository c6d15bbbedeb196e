#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "campus/rng.hpp"

namespace campus {

/// Rates are per-day probabilities. Defaults reproduce the campus baseline:
/// 3-day latency, 14-day undetected infectious period, 40% of students tested
/// every 14 days, 2 days to a symptomatic test, 2 days for results, 10-day
/// isolation, 14-day quarantine and 10 close contacts per isolation.
struct ModelParams {
  double beta = 0.4;
  double alpha = 0.3;
  double mu = 1.0 / 3.0;
  double gamma = 1.0 / 14.0;
  double sigma = 0.4;
  double tau_f = 1.0 / 14.0;
  double tau_s = 1.0 / 2.0;
  double tau_r = 1.0 / 2.0;
  double r_i = 1.0 / 10.0;
  double r_q = 1.0 / 14.0;
  Count n_cc = 10;
  Count i_out = 100;
  Count n_total = 6500;
  int break_return_day = 77;  // 0 disables the break injection

  /// Throws InvalidArgument when a rate or proportion leaves [0, 1], a count
  /// is negative, n_total is not positive, or i_out exceeds n_total.
  void validate() const;
};

/// Internal status of individuals held in Q_q.
struct QuarantineLedger {
  Count exposed = 0;
  Count infectious = 0;
  Count recovered = 0;

  Count total() const noexcept { return exposed + infectious + recovered; }
  bool operator==(const QuarantineLedger&) const = default;
};

struct CompartmentState {
  Count s = 0;
  Count s_q = 0;
  Count e = 0;
  Count i_a = 0;
  Count i_s = 0;
  Count i_t = 0;
  Count q_i = 0;
  Count q_q = 0;
  Count r_d = 0;
  Count r_u = 0;
  QuarantineLedger q_q_ledger;

  Count total() const noexcept { return s + s_q + e + i_a + i_s + i_t + q_i + q_q + r_d + r_u; }
  Count infectious() const noexcept { return i_a + i_s + i_t; }
  bool operator==(const CompartmentState&) const = default;

  /// Throws InvalidArgument on negative counts, a ledger that does not sum to
  /// q_q, or a total different from n_total.
  void validate(Count n_total) const;

  /// Everyone susceptible except `exposed` individuals in E.
  static CompartmentState seeded(Count n_total, Count exposed);
};

/// Realized transition counts for one day; n_<from>_<to>.
struct DailyFlows {
  Count n_s_e = 0;
  Count n_s_sq = 0;
  Count n_sq_s = 0;
  Count n_e_ia = 0;
  Count n_e_is = 0;
  Count n_e_qq = 0;
  Count n_ia_it = 0;
  Count n_ia_qq = 0;
  Count n_ia_ru = 0;
  Count n_is_it = 0;
  Count n_is_ru = 0;
  Count n_it_qi = 0;
  Count n_qi_rd = 0;
  Count n_qq_it = 0;
  Count n_qq_ru = 0;
  Count n_ru_qq = 0;

  bool operator==(const DailyFlows&) const = default;

  /// New quarantine person-entries (S_q and Q_q) on this day.
  Count quarantine_entries() const noexcept { return n_s_sq + n_e_qq + n_ia_qq + n_ru_qq; }
};

struct FlowField {
  std::string_view name;
  Count DailyFlows::*member;
};

/// Column names used in CSV/JSON exports, in declaration order.
inline constexpr std::array<FlowField, 16> kFlowFields{{
    {"n_SE", &DailyFlows::n_s_e},     {"n_SSq", &DailyFlows::n_s_sq},
    {"n_SqS", &DailyFlows::n_sq_s},   {"n_EIa", &DailyFlows::n_e_ia},
    {"n_EIs", &DailyFlows::n_e_is},   {"n_EQq", &DailyFlows::n_e_qq},
    {"n_IaIt", &DailyFlows::n_ia_it}, {"n_IaQq", &DailyFlows::n_ia_qq},
    {"n_IaRu", &DailyFlows::n_ia_ru}, {"n_IsIt", &DailyFlows::n_is_it},
    {"n_IsRu", &DailyFlows::n_is_ru}, {"n_ItQi", &DailyFlows::n_it_qi},
    {"n_QiRd", &DailyFlows::n_qi_rd}, {"n_QqIt", &DailyFlows::n_qq_it},
    {"n_QqRu", &DailyFlows::n_qq_ru}, {"n_RuQq", &DailyFlows::n_ru_qq},
}};

struct CompartmentField {
  std::string_view name;
  Count CompartmentState::*member;
};

inline constexpr std::array<CompartmentField, 10> kCompartmentFields{{
    {"S", &CompartmentState::s},
    {"S_q", &CompartmentState::s_q},
    {"E", &CompartmentState::e},
    {"I_A", &CompartmentState::i_a},
    {"I_S", &CompartmentState::i_s},
    {"I_T", &CompartmentState::i_t},
    {"Q_i", &CompartmentState::q_i},
    {"Q_q", &CompartmentState::q_q},
    {"R_D", &CompartmentState::r_d},
    {"R_U", &CompartmentState::r_u},
}};

/// states.size() == horizon + 1, flows.size() == horizon. flows[d] moves
/// states[d] to states[d + 1] (before any break injection recorded in
/// states[d + 1]).
struct Trajectory {
  ModelParams params;
  std::vector<CompartmentState> states;
  std::vector<DailyFlows> flows;
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;

  int horizon() const noexcept { return static_cast<int>(flows.size()); }
  const CompartmentState& initial() const { return states.front(); }
};

/// Per-destination probabilities for a compartment with competing exits.
/// Returned unchanged when they sum to at most one, otherwise rescaled so the
/// compartment empties.
std::array<double, 2> competing_exits(double first, double second) noexcept;

/// min(1, beta * (I_A + I_S + I_T) / N). Quarantined, isolated and recovered
/// individuals do not transmit.
double force_of_infection(const CompartmentState& state, const ModelParams& params) noexcept;

struct StepResult {
  CompartmentState state;
  DailyFlows flows;
};

/// One day of the chain-binomial model. All draws use start-of-day occupancy,
/// in this order: infection, exits from E, I_A, I_S, I_T, Q_i, quarantine
/// progression/testing/release, S_q release, then close-contact intake drawn
/// without replacement from individuals who stayed in S, E, I_A or R_U all day.
StepResult step(const CompartmentState& state, const ModelParams& params, RngStream& rng);

/// Moves min(i_out, s) individuals from S to E.
CompartmentState apply_break_injection(const CompartmentState& state, const ModelParams& params);

using DayVisitor = std::function<void(int day, const CompartmentState& next, const DailyFlows&)>;

/// Runs `horizon_days` steps without storing the trajectory. The visitor sees
/// each day's flows and the resulting state (after break injection).
void run_days(const ModelParams& params, const CompartmentState& init, int horizon_days,
              RngStream& rng, const DayVisitor& visit);

Trajectory simulate(const ModelParams& params, const CompartmentState& init, int horizon_days,
                    RngStream& rng);

}  // namespace campus
