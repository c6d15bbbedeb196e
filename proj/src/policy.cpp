#include "campus/policy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>

#include "campus/ensemble.hpp"
#include "campus/errors.hpp"
#include "campus/parallel.hpp"

namespace campus {

void Strategy::validate() const {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw InvalidArgument("strategy sigma must lie in [0, 1]");
  if (!(interval_days >= 1.0)) throw InvalidArgument("testing interval must be at least 1 day");
}

std::vector<Strategy> default_strategy_grid() {
  std::vector<Strategy> out;
  for (double sigma : {0.4, 0.6, 0.8}) {
    const int pct = static_cast<int>(std::lround(sigma * 100));
    out.push_back({sigma, 14.0, std::to_string(pct) + "% every 14 days"});
    out.push_back({sigma, 7.0, std::to_string(pct) + "% weekly"});
    out.push_back({sigma, 3.5, std::to_string(pct) + "% twice a week"});
  }
  return out;
}

TestCounts tests_administered(std::span<const DailyFlows> flows, const ModelParams& params) {
  TestCounts counts;
  const auto daily = static_cast<Count>(
      std::llround(params.sigma * static_cast<double>(params.n_total) * params.tau_f));
  counts.surveillance = daily * static_cast<Count>(flows.size());
  for (const auto& f : flows) {
    counts.symptomatic += f.n_is_it;
    counts.quarantine += f.n_qq_it;
  }
  return counts;
}

TestCounts tests_administered(const Trajectory& trajectory) {
  return tests_administered(trajectory.flows, trajectory.params);
}

namespace {

// Inverse empirical CDF on sorted values.
Count order_quantile(const std::vector<Count>& sorted, double q) {
  const auto n = static_cast<double>(sorted.size());
  auto idx = static_cast<std::size_t>(std::ceil(q * n));
  idx = std::clamp<std::size_t>(idx, 1, sorted.size());
  return sorted[idx - 1];
}

}  // namespace

Quantiles summarize(std::vector<Count> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  return {order_quantile(values, 0.05), order_quantile(values, 0.25), order_quantile(values, 0.5),
          order_quantile(values, 0.75), order_quantile(values, 0.95)};
}

std::vector<PolicyReport> run_policy_sweep(const std::vector<Strategy>& strategies,
                                           const PosteriorSample& posterior,
                                           const SimConfig& config, const SweepOptions& options) {
  if (posterior.empty()) throw NoAcceptances(posterior.max_rate());
  if (options.n_per_strategy < 1) throw InvalidArgument("n_per_strategy must be at least 1");
  for (const auto& s : strategies) s.validate();
  config.validate();

  const std::size_t n = static_cast<std::size_t>(options.n_per_strategy);
  const bool crn = options.common_random_numbers;
  std::vector<std::vector<GridPoint>> draws(crn ? 1 : strategies.size());
  for (std::size_t d = 0; d < draws.size(); ++d) {
    RngStream rng(derive_seed(options.base_seed, 0xd4a5ULL, d));
    draws[d] = draw_posterior_params(posterior, n, rng);
  }

  const std::size_t horizon = static_cast<std::size_t>(config.horizon_days);
  std::vector<PolicyReport> reports(strategies.size());
  // daily_cases[s][run * horizon + day]
  std::vector<std::vector<Count>> daily_cases(strategies.size(),
                                              std::vector<Count>(n * horizon, 0));
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    reports[s].strategy = strategies[s];
    reports[s].runs.resize(n);
  }

  std::size_t finished = 0;
  std::mutex progress_mutex;
  const std::size_t items = strategies.size() * n;
  parallel_for(items, options.workers, [&](std::size_t item) {
    const std::size_t s = item / n;
    const std::size_t j = item % n;
    const Strategy& strategy = strategies[s];
    ModelParams params = config.at(draws[crn ? 0 : s][j]);
    params.sigma = strategy.sigma;
    params.tau_f = strategy.tau_f();

    RngStream rng(options.base_seed, crn ? j : s * n + j);
    SemesterOutcome outcome;
    Count* cases = daily_cases[s].data() + j * horizon;
    std::vector<DailyFlows> flows;
    flows.reserve(horizon);
    const CompartmentState& init = config.init;
    outcome.peak_occupancy = init.s_q + init.q_q + init.q_i;
    CompartmentState last = init;
    run_days(params, init, config.horizon_days, rng,
             [&](int day, const CompartmentState& next, const DailyFlows& f) {
               flows.push_back(f);
               cases[day] = f.n_it_qi;
               outcome.detected += f.n_it_qi;
               outcome.quarantine_entries += f.quarantine_entries();
               outcome.peak_occupancy =
                   std::max(outcome.peak_occupancy, next.s_q + next.q_q + next.q_i);
               last = next;
             });
    outcome.final_quarantine = last.s_q + last.q_q;
    outcome.tests = tests_administered(flows, params).total();
    reports[s].runs[j] = outcome;

    if (options.progress) {
      // Counted under the lock so reported fractions never go backwards.
      std::lock_guard lock(progress_mutex);
      options.progress(static_cast<double>(++finished) / static_cast<double>(items));
    }
  });

  const double weeks = static_cast<double>(config.horizon_days) / kDaysPerWeek;
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    PolicyReport& r = reports[s];
    auto collect = [&](Count SemesterOutcome::*field) {
      std::vector<Count> v;
      v.reserve(n);
      for (const auto& run : r.runs) v.push_back(run.*field);
      return v;
    };
    r.detected = summarize(collect(&SemesterOutcome::detected));
    r.quarantine_entries = summarize(collect(&SemesterOutcome::quarantine_entries));
    r.final_quarantine = summarize(collect(&SemesterOutcome::final_quarantine));
    r.peak_occupancy = summarize(collect(&SemesterOutcome::peak_occupancy));
    const auto tests = collect(&SemesterOutcome::tests);
    r.tests = summarize(tests);
    double total_tests = 0.0;
    for (Count t : tests) total_tests += static_cast<double>(t);
    r.tests_per_week = total_tests / static_cast<double>(n) / weeks;

    r.median_daily_cases.resize(horizon);
    std::vector<Count> column(n);
    for (std::size_t day = 0; day < horizon; ++day) {
      for (std::size_t j = 0; j < n; ++j) column[j] = daily_cases[s][j * horizon + day];
      r.median_daily_cases[day] = summarize(column).q50;
    }
  }
  return reports;
}

}  // namespace campus
