#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "campus/model.hpp"
#include "campus/peaks.hpp"

namespace campus {

/// Evenly spaced axis including both endpoints.
struct AxisSpec {
  double low = 0.0;
  double high = 1.0;
  int points = 21;

  std::vector<double> values() const;
};

struct PriorGrid {
  AxisSpec alpha{0.0, 1.0, 21};
  AxisSpec beta{0.2, 1.0, 21};
  AxisSpec i_out{1.0, 200.0, 21};  // values rounded to integers

  void validate() const;
  /// Same ranges with `points` per axis.
  static PriorGrid uniform(int points);
};

struct GridPoint {
  double alpha = 0.0;
  double beta = 0.0;
  Count i_out = 0;
  bool operator==(const GridPoint&) const = default;
};

/// Cartesian product, alpha outermost and i_out innermost.
std::vector<GridPoint> build_grid(const PriorGrid& spec);

/// Everything needed to simulate one trajectory except the fitted triple.
struct SimConfig {
  ModelParams base;
  CompartmentState init = CompartmentState::seeded(6500, 10);
  int horizon_days = 112;
  AbcTolerance tolerance;

  ModelParams at(const GridPoint& point) const;
  void validate() const;
};

struct GridCount {
  Count accepted = 0;
  Count attempted = 0;
  bool operator==(const GridCount&) const = default;
};

/// Accepted draws stored as per-grid-point counts; draws() expands them to one
/// entry per accepted trajectory.
struct PosteriorSample {
  std::vector<GridPoint> points;
  std::vector<GridCount> counts;

  Count size() const;
  bool empty() const { return size() == 0; }
  double max_rate() const;
  std::vector<GridPoint> draws() const;
};

struct AcceptanceSurface {
  std::vector<GridPoint> points;
  std::vector<double> rates;
};

AcceptanceSurface acceptance_surface(const PosteriorSample& posterior);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double x) const { return low <= x && x <= high; }
  double width() const { return high - low; }
};

struct CredibleIntervals {
  double level = 0.95;
  Interval alpha;
  Interval beta;
  Interval i_out;
};

struct AbcOptions {
  int n_traj = 1000;
  std::uint64_t base_seed = 1;
  unsigned workers = 0;
  /// Called with the completed fraction; may be invoked from worker threads
  /// (serialized).
  std::function<void(double)> progress;
};

/// Seed for trajectory `traj` at grid point `grid_index`.
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::size_t grid_index, int traj);

/// Simulates one trajectory and returns only its weekly detected cases.
WeeklySeries simulate_weekly(const ModelParams& params, const SimConfig& config, RngStream& rng);

/// Rejection ABC over the grid. Throws InvalidArgument for an empty observed
/// peak set or n_traj < 1.
PosteriorSample run_abc(const std::vector<GridPoint>& grid, const PeakSet& observed,
                        const SimConfig& config, const AbcOptions& options);

/// Fits several observed peak sets against one pass of simulations. Result i
/// equals run_abc(grid, observed[i], config, options).
std::vector<PosteriorSample> run_abc_many(const std::vector<GridPoint>& grid,
                                          const std::vector<PeakSet>& observed,
                                          const SimConfig& config, const AbcOptions& options);

/// Empirical quantile intervals of the accepted draws (linear interpolation
/// between order statistics). Throws NoAcceptances when empty.
CredibleIntervals marginal_ci(const PosteriorSample& posterior, double level = 0.95);

struct StudyRow {
  GridPoint truth;
  int curves_used = 0;
  int curves_without_peaks = 0;
  int curves_without_acceptances = 0;
  PosteriorSample pooled;
  CredibleIntervals intervals;  // meaningful only when pooled is non-empty
};

/// The eight truth sets alpha in {0.25, 0.75}, beta in {0.32, 0.8}, i_out in {100, 150}.
std::vector<GridPoint> simulation_study_truths();

/// For each truth: simulate `n_curves` synthetic observed series, fit each by
/// run_abc, pool the accepted draws and summarize. Curves with no peaks or no
/// acceptances are skipped and counted.
std::vector<StudyRow> run_simulation_study(const std::vector<GridPoint>& truths, int n_curves,
                                           const std::vector<GridPoint>& grid,
                                           const SimConfig& config, const AbcOptions& options,
                                           double level = 0.95);

}  // namespace campus
