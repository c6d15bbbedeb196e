#include <doctest.h>

#include <random>

#include "campus/peaks.hpp"
#include "support/brute.hpp"

using namespace campus;

TEST_CASE("peak definition") {
  const std::vector<Count> y{0, 30, 5, 40, 1};
  const PeakSet got = detect_peaks(y);
  REQUIRE(got.size() == 2);
  CHECK(got[0] == Peak{2, 30});
  CHECK(got[1] == Peak{4, 40});
  // Plateaus, ends and small bumps are not peaks.
  CHECK(detect_peaks(std::vector<Count>{10, 50, 50, 10}).empty());
  CHECK(detect_peaks(std::vector<Count>{90, 10, 80}).empty());
  CHECK(detect_peaks(std::vector<Count>{0, 19, 0}).empty());
  CHECK(detect_peaks(std::vector<Count>{0, 20, 0}).size() == 1);
  CHECK(detect_peaks(std::vector<Count>{}).empty());
  CHECK(detect_peaks(std::vector<Count>{0, 19, 0}, 5).size() == 1);
}

TEST_CASE("detect_peaks agrees with the definition on random series") {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 2000; ++i) {
    std::vector<Count> y(std::uniform_int_distribution<int>(0, 20)(gen));
    for (auto& v : y) v = std::uniform_int_distribution<Count>(0, 40)(gen);
    CHECK(detect_peaks(y) == testing::brute_peaks(y, 20));
  }
}

TEST_CASE("weekly aggregation keeps a trailing partial week") {
  std::vector<DailyFlows> flows(10);
  for (std::size_t d = 0; d < flows.size(); ++d) flows[d].n_it_qi = static_cast<Count>(d + 1);
  const WeeklySeries w = weekly_cases(flows);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == 1 + 2 + 3 + 4 + 5 + 6 + 7);
  CHECK(w[1] == 8 + 9 + 10);
  flows.resize(112);
  CHECK(weekly_cases(flows).size() == 16);
}

TEST_CASE("abc_match tolerances") {
  const PeakSet obs{{5, 100}, {12, 60}};
  CHECK(abc_match(obs, {{6, 110}, {11, 50}}));
  CHECK_FALSE(abc_match(obs, {{7, 100}, {12, 60}}));
  CHECK_FALSE(abc_match(obs, {{5, 111}, {12, 60}}));
  CHECK_FALSE(abc_match(obs, {{5, 100}}));
  CHECK_FALSE(abc_match(obs, {{5, 100}, {12, 60}, {14, 30}}));
  AbcTolerance wide;
  wide.weeks = 2;
  wide.cases = 20;
  CHECK(abc_match(obs, {{7, 120}, {12, 60}}, wide));
}
