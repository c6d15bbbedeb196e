#include <doctest.h>

#include <random>

#include "campus/ensemble.hpp"
#include "campus/errors.hpp"
#include "support/brute.hpp"

using namespace campus;

namespace {

CurveMatrix matrix(std::vector<WeeklySeries> curves) {
  CurveMatrix m;
  m.curves = std::move(curves);
  m.provenance.resize(m.curves.size());
  return m;
}

}  // namespace

TEST_CASE("depth on a hand-checked ensemble") {
  // Three parallel curves: the middle one lies in all 3 bands, the outer ones in 2.
  const std::vector<WeeklySeries> c{{1, 1}, {2, 2}, {3, 3}};
  const auto d = modified_band_depth(c);
  CHECK(d[0] == doctest::Approx(2.0 / 3));
  CHECK(d[1] == doctest::Approx(1.0));
  CHECK(d[2] == doctest::Approx(2.0 / 3));
}

TEST_CASE("band invariants and outliers") {
  const CurveMatrix m = matrix({{10, 20, 30}, {11, 21, 31}, {12, 22, 32}, {13, 23, 33}, {9, 19, 29}, {100, 0, 30}});
  const FunctionalBand b = functional_band(m);
  CHECK(b.median_index == 1);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(b.fence_low[t] <= b.band_low[t]);
    CHECK(b.band_low[t] <= b.median[t]);
    CHECK(b.median[t] <= b.band_high[t]);
    CHECK(b.band_high[t] <= b.fence_high[t]);
    CHECK(b.fence_low[t] >= 0);
  }
  // Central region = 3 deepest curves (indices 1, 2, 0): widths of 2, fences 1.5 x 2 = 3 beyond.
  CHECK(b.band_low == WeeklySeries{10, 20, 30});
  CHECK(b.band_high == WeeklySeries{12, 22, 32});
  CHECK(b.fence_low == WeeklySeries{7, 17, 27});
  CHECK(b.fence_high == WeeklySeries{15, 25, 35});
  CHECK(b.outliers == std::vector<std::size_t>{5});
}

TEST_CASE("odd widths round the fences outward") {
  const FunctionalBand b = functional_band(matrix({{0}, {1}, {1}, {1}, {5}}));
  // central = 3 curves, all equal to 1 -> width 0
  CHECK(b.fence_low == WeeklySeries{1});
  const FunctionalBand c = functional_band(matrix({{10}, {11}, {11}, {10}}));
  // band 10..11, width 1 -> 8.5 and 12.5 rounded outward
  CHECK(c.fence_low == WeeklySeries{8});
  CHECK(c.fence_high == WeeklySeries{13});
}

TEST_CASE("median matches the brute-force depth on random ensembles") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = std::uniform_int_distribution<int>(4, 15)(gen);
    const int w = std::uniform_int_distribution<int>(1, 10)(gen);
    std::vector<WeeklySeries> c(k, WeeklySeries(w));
    for (auto& curve : c)
      for (auto& v : curve) v = std::uniform_int_distribution<Count>(0, trial % 2 ? 4 : 300)(gen);
    CHECK(functional_band(matrix(c)).median_index == testing::brute_mbd_median(c));
  }
}

TEST_CASE("band input checks") {
  CHECK_THROWS_AS(functional_band(matrix({{1}, {2}, {3}})), InsufficientCurves);
  CHECK_THROWS_AS(functional_band(matrix({{1}, {2}, {3}, {4, 5}})), InvalidArgument);
}

TEST_CASE("posterior draws follow acceptance counts") {
  PosteriorSample p;
  p.points = {{0.1, 0.3, 10}, {0.5, 0.5, 20}, {0.9, 0.9, 30}};
  p.counts = {{1, 10}, {0, 10}, {3, 10}};
  RngStream rng(4);
  const auto draws = draw_posterior_params(p, 40000, rng);
  long first = 0, middle = 0;
  for (const auto& d : draws) {
    first += d.i_out == 10;
    middle += d.i_out == 20;
  }
  CHECK(middle == 0);
  CHECK(double(first) / 40000 == doctest::Approx(0.25).epsilon(0.05));
  PosteriorSample empty;
  CHECK_THROWS_AS(draw_posterior_params(empty, 3, rng), NoAcceptances);
}

TEST_CASE("ensembles are reproducible and independent of worker count") {
  SimConfig config;
  const std::vector<GridPoint> draws(12, GridPoint{0.3, 0.4, 100});
  const CurveMatrix a = simulate_ensemble(draws, config, 5, 1);
  const CurveMatrix b = simulate_ensemble(draws, config, 5, 3);
  CHECK(a.curves == b.curves);
  CHECK(a.weeks() == 16);
  CHECK(a.curves[0] != a.curves[1]);
}
