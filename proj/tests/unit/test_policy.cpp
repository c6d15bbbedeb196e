#include <doctest.h>

#include <cmath>

#include "campus/errors.hpp"
#include "campus/policy.hpp"

using namespace campus;

namespace {

PosteriorSample single_point(GridPoint p) {
  PosteriorSample s;
  s.points = {p};
  s.counts = {{5, 10}};
  return s;
}

}  // namespace

TEST_CASE("default strategy grid") {
  const auto g = default_strategy_grid();
  REQUIRE(g.size() == 9);
  CHECK(g[0].sigma == 0.4);
  CHECK(g[0].interval_days == 14.0);
  CHECK(g[0].label == "40% every 14 days");
  CHECK(g[2].interval_days == 3.5);
  CHECK(g[8].sigma == 0.8);
  CHECK(g[2].tau_f() == doctest::Approx(2.0 / 7));
}

TEST_CASE("strategy validation") {
  Strategy s{1.2, 7, "x"};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = {0.5, 0.5, "x"};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("surveillance testing arithmetic") {
  ModelParams p;
  p.n_total = 7000;
  p.sigma = 0.4;
  p.tau_f = 1.0 / 14;
  std::vector<DailyFlows> flows(28);
  flows[3].n_is_it = 4;
  flows[9].n_qq_it = 6;
  TestCounts t = tests_administered(flows, p);
  CHECK(t.surveillance == 200 * 28);
  CHECK(t.symptomatic == 4);
  CHECK(t.quarantine == 6);
  CHECK(t.total() == 5610);
  // Doubling the frequency doubles surveillance exactly when the daily load is whole.
  p.tau_f = 1.0 / 7;
  CHECK(tests_administered(flows, p).surveillance == 2 * 200 * 28);
  // 6500 students: 40% twice a week and 100% every two weeks, per week.
  p.n_total = 6500;
  p.tau_f = 2.0 / 7;
  const double twice = double(tests_administered(std::span(flows).first(7), p).surveillance);
  p.sigma = 1.0;
  p.tau_f = 1.0 / 14;
  const double fortnightly = double(tests_administered(std::span(flows).first(7), p).surveillance);
  CHECK(twice == doctest::Approx(0.4 * 6500 * 2).epsilon(0.01));
  CHECK(fortnightly == doctest::Approx(6500.0 / 2).epsilon(0.01));
}

TEST_CASE("order-statistic quantiles stay on observed values") {
  const Quantiles q = summarize({5, 1, 4, 2, 3});
  CHECK(q.q05 == 1);
  CHECK(q.q25 == 2);
  CHECK(q.q50 == 3);
  CHECK(q.q75 == 4);
  CHECK(q.q95 == 5);
  const Quantiles even = summarize({10, 20, 30, 40});
  CHECK(even.q50 == 20);
  CHECK(summarize({}).q50 == 0);
}

TEST_CASE("sweep with common random numbers") {
  SimConfig config;
  const auto posterior = single_point({0.3, 0.4, 100});
  SweepOptions opt;
  opt.n_per_strategy = 12;
  opt.base_seed = 3;
  const std::vector<Strategy> same{{0.4, 14, "a"}, {0.4, 14, "b"}};
  const auto reports = run_policy_sweep(same, posterior, config, opt);
  REQUIRE(reports.size() == 2);
  // Identical strategies see identical randomness.
  for (int j = 0; j < 12; ++j) CHECK(reports[0].runs[j].detected == reports[1].runs[j].detected);
  CHECK(reports[0].median_daily_cases.size() == 112);
  CHECK(reports[0].tests_per_week > 0);

  opt.common_random_numbers = false;
  const auto indep = run_policy_sweep(same, posterior, config, opt);
  bool differs = false;
  for (int j = 0; j < 12; ++j) differs = differs || indep[0].runs[j].detected != indep[1].runs[j].detected;
  CHECK(differs);

  opt.workers = 3;
  opt.common_random_numbers = true;
  const auto threaded = run_policy_sweep(same, posterior, config, opt);
  CHECK(threaded[0].runs[5].detected == reports[0].runs[5].detected);
}

TEST_CASE("sweep input checks") {
  SimConfig config;
  SweepOptions opt;
  opt.n_per_strategy = 2;
  CHECK_THROWS_AS(run_policy_sweep(default_strategy_grid(), PosteriorSample{}, config, opt), NoAcceptances);
  CHECK_THROWS_AS(run_policy_sweep({{2.0, 7, "bad"}}, single_point({0.3, 0.4, 100}), config, opt),
                  InvalidArgument);
}
