#include "campus/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "campus/errors.hpp"
#include "campus/parallel.hpp"

namespace campus {

std::vector<GridPoint> draw_posterior_params(const PosteriorSample& posterior, std::size_t k,
                                             RngStream& rng) {
  std::vector<GridPoint> out;
  if (k == 0) return out;
  const Count total = posterior.size();
  if (total == 0) throw NoAcceptances(posterior.max_rate());

  std::vector<Count> cumulative(posterior.counts.size());
  Count running = 0;
  for (std::size_t i = 0; i < posterior.counts.size(); ++i) {
    running += posterior.counts[i].accepted;
    cumulative[i] = running;
  }
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto u = static_cast<Count>(rng.below(static_cast<std::uint64_t>(total)));
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    out.push_back(posterior.points[static_cast<std::size_t>(it - cumulative.begin())]);
  }
  return out;
}

CurveMatrix simulate_ensemble(const std::vector<GridPoint>& draws, const SimConfig& config,
                              std::uint64_t base_seed, unsigned workers) {
  config.validate();
  CurveMatrix out;
  out.provenance = draws;
  out.curves.resize(draws.size());
  parallel_for(draws.size(), workers, [&](std::size_t i) {
    RngStream rng(base_seed, i);
    out.curves[i] = simulate_weekly(config.at(draws[i]), config, rng);
  });
  return out;
}

namespace {

Count pairs(Count n) { return n * (n - 1) / 2; }

void check_rectangular(const std::vector<WeeklySeries>& curves) {
  for (const auto& c : curves)
    if (c.size() != curves.front().size()) throw InvalidArgument("curves differ in length");
}

}  // namespace

std::vector<double> modified_band_depth(const std::vector<WeeklySeries>& curves) {
  const std::size_t k = curves.size();
  std::vector<double> depth(k, 0.0);
  if (k < 2) return depth;
  check_rectangular(curves);
  const std::size_t weeks = curves.front().size();
  if (weeks == 0) return depth;

  // At each time, a curve lies inside band (j, l) unless both members are
  // strictly above it or both strictly below it.
  std::vector<Count> column(k);
  std::vector<Count> hits(k, 0);
  const Count all_pairs = pairs(static_cast<Count>(k));
  for (std::size_t t = 0; t < weeks; ++t) {
    for (std::size_t i = 0; i < k; ++i) column[i] = curves[i][t];
    std::sort(column.begin(), column.end());
    for (std::size_t i = 0; i < k; ++i) {
      const Count x = curves[i][t];
      const auto below = std::lower_bound(column.begin(), column.end(), x) - column.begin();
      const auto above = column.end() - std::upper_bound(column.begin(), column.end(), x);
      hits[i] += all_pairs - pairs(below) - pairs(above);
    }
  }
  const double norm = static_cast<double>(all_pairs) * static_cast<double>(weeks);
  for (std::size_t i = 0; i < k; ++i) depth[i] = static_cast<double>(hits[i]) / norm;
  return depth;
}

FunctionalBand functional_band(const CurveMatrix& matrix) {
  const auto& curves = matrix.curves;
  if (curves.size() < 4) throw InsufficientCurves("functional band needs at least 4 curves");
  check_rectangular(curves);

  FunctionalBand band;
  band.depth = modified_band_depth(curves);

  std::vector<std::size_t> order(curves.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return band.depth[a] > band.depth[b]; });
  band.median_index = order.front();
  band.median = curves[band.median_index];

  const std::size_t central = (curves.size() + 1) / 2;
  const std::size_t weeks = curves.front().size();
  band.band_low = curves[order[0]];
  band.band_high = curves[order[0]];
  for (std::size_t r = 1; r < central; ++r) {
    const auto& c = curves[order[r]];
    for (std::size_t t = 0; t < weeks; ++t) {
      band.band_low[t] = std::min(band.band_low[t], c[t]);
      band.band_high[t] = std::max(band.band_high[t], c[t]);
    }
  }

  band.fence_low.resize(weeks);
  band.fence_high.resize(weeks);
  for (std::size_t t = 0; t < weeks; ++t) {
    const double width = static_cast<double>(band.band_high[t] - band.band_low[t]);
    const auto lo = static_cast<Count>(std::floor(static_cast<double>(band.band_low[t]) - 1.5 * width));
    band.fence_low[t] = std::max<Count>(0, lo);
    band.fence_high[t] =
        static_cast<Count>(std::ceil(static_cast<double>(band.band_high[t]) + 1.5 * width));
  }

  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t t = 0; t < weeks; ++t) {
      if (curves[i][t] < band.fence_low[t] || curves[i][t] > band.fence_high[t]) {
        band.outliers.push_back(i);
        break;
      }
    }
  }
  return band;
}

}  // namespace campus
