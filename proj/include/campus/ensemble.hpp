#pragma once

#include <cstdint>
#include <vector>

#include "campus/abc.hpp"

namespace campus {

/// k weekly case curves of equal length, with the parameters behind each.
struct CurveMatrix {
  std::vector<WeeklySeries> curves;
  std::vector<GridPoint> provenance;

  std::size_t size() const { return curves.size(); }
  std::size_t weeks() const { return curves.empty() ? 0 : curves.front().size(); }
};

/// Functional boxplot summary. All bounds are integers: the fences are the
/// central region widened by 1.5x its pointwise width, rounded outward and
/// floored at zero.
struct FunctionalBand {
  std::size_t median_index = 0;
  std::vector<double> depth;  // modified band depth per curve
  WeeklySeries median;
  WeeklySeries band_low;
  WeeklySeries band_high;
  WeeklySeries fence_low;
  WeeklySeries fence_high;
  std::vector<std::size_t> outliers;
};

/// k draws with replacement, proportional to acceptance counts. Throws
/// NoAcceptances on an empty posterior (unless k == 0).
std::vector<GridPoint> draw_posterior_params(const PosteriorSample& posterior, std::size_t k,
                                             RngStream& rng);

/// One weekly curve per draw; curve i uses stream derive_seed(base_seed, i).
CurveMatrix simulate_ensemble(const std::vector<GridPoint>& draws, const SimConfig& config,
                              std::uint64_t base_seed, unsigned workers = 0);

/// Modified band depth with two-curve bands (the curve itself included among
/// band members), computed from pointwise ranks.
std::vector<double> modified_band_depth(const std::vector<WeeklySeries>& curves);

/// Throws InsufficientCurves for fewer than four curves, InvalidArgument for
/// ragged input. Depth ties go to the lower curve index.
FunctionalBand functional_band(const CurveMatrix& curves);

}  // namespace campus
