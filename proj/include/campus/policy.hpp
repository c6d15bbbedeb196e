#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "campus/abc.hpp"

namespace campus {

/// A surveillance testing strategy: proportion of students in the testing
/// pool and days between tests. An infinite interval means no surveillance.
struct Strategy {
  double sigma = 0.4;
  double interval_days = 14.0;
  std::string label;

  double tau_f() const { return 1.0 / interval_days; }
  void validate() const;
};

/// sigma in {0.4, 0.6, 0.8} x every 14 days, weekly, twice a week.
std::vector<Strategy> default_strategy_grid();

struct TestCounts {
  Count surveillance = 0;
  Count symptomatic = 0;
  Count quarantine = 0;
  Count total() const { return surveillance + symptomatic + quarantine; }
};

/// Daily surveillance tests are round(sigma * N * tau_f) for the whole pool;
/// symptomatic (I_S -> I_T) and quarantine-triggered (Q_q -> I_T) tests are
/// counted from the flows.
TestCounts tests_administered(std::span<const DailyFlows> flows, const ModelParams& params);
TestCounts tests_administered(const Trajectory& trajectory);

/// Order-statistic quantiles, so every entry is an attained integer value.
struct Quantiles {
  Count q05 = 0;
  Count q25 = 0;
  Count q50 = 0;
  Count q75 = 0;
  Count q95 = 0;
};

Quantiles summarize(std::vector<Count> values);

/// Outcomes of one simulated semester under a strategy.
struct SemesterOutcome {
  Count detected = 0;             // cumulative I_T -> Q_i
  Count quarantine_entries = 0;   // cumulative entries into S_q and Q_q
  Count final_quarantine = 0;     // S_q + Q_q on the last day
  Count peak_occupancy = 0;       // max over days of S_q + Q_q + Q_i
  Count tests = 0;
};

struct PolicyReport {
  Strategy strategy;
  Quantiles detected;
  Quantiles quarantine_entries;
  Quantiles final_quarantine;
  Quantiles peak_occupancy;
  Quantiles tests;
  double tests_per_week = 0.0;  // mean over runs
  std::vector<Count> median_daily_cases;
  std::vector<SemesterOutcome> runs;
};

struct SweepOptions {
  int n_per_strategy = 200;
  std::uint64_t base_seed = 1;
  /// Same posterior draws and trajectory streams for every strategy.
  bool common_random_numbers = true;
  unsigned workers = 0;
  std::function<void(double)> progress;
};

/// For each strategy, overrides (sigma, tau_f) in parameter sets drawn from
/// the posterior and simulates n_per_strategy semesters.
std::vector<PolicyReport> run_policy_sweep(const std::vector<Strategy>& strategies,
                                           const PosteriorSample& posterior,
                                           const SimConfig& config, const SweepOptions& options);

}  // namespace campus
