#include "campus/abc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>

#include "campus/errors.hpp"
#include "campus/parallel.hpp"

namespace campus {

std::vector<double> AxisSpec::values() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(points, 0)));
  for (int i = 0; i < points; ++i) {
    const double t = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
    out[static_cast<std::size_t>(i)] = (i == points - 1) ? high : low + t * (high - low);
  }
  return out;
}

void PriorGrid::validate() const {
  auto check = [](const AxisSpec& axis, const char* name) {
    if (!(axis.low < axis.high)) throw InvalidArgument(std::string(name) + " axis needs low < high");
    if (axis.points < 2) throw InvalidArgument(std::string(name) + " axis needs at least 2 points");
  };
  check(alpha, "alpha");
  check(beta, "beta");
  check(i_out, "i_out");
  if (alpha.low < 0.0 || alpha.high > 1.0) throw InvalidArgument("alpha axis must lie in [0, 1]");
  if (beta.low < 0.0 || beta.high > 1.0) throw InvalidArgument("beta axis must lie in [0, 1]");
  if (i_out.low < 0.0) throw InvalidArgument("i_out axis must be non-negative");
}

PriorGrid PriorGrid::uniform(int points) {
  PriorGrid grid;
  grid.alpha.points = grid.beta.points = grid.i_out.points = points;
  return grid;
}

std::vector<GridPoint> build_grid(const PriorGrid& spec) {
  spec.validate();
  const auto alphas = spec.alpha.values();
  const auto betas = spec.beta.values();
  const auto outs = spec.i_out.values();
  std::vector<GridPoint> grid;
  grid.reserve(alphas.size() * betas.size() * outs.size());
  for (double a : alphas)
    for (double b : betas)
      for (double o : outs) grid.push_back({a, b, static_cast<Count>(std::llround(o))});
  return grid;
}

ModelParams SimConfig::at(const GridPoint& point) const {
  ModelParams p = base;
  p.alpha = point.alpha;
  p.beta = point.beta;
  p.i_out = point.i_out;
  return p;
}

void SimConfig::validate() const {
  base.validate();
  init.validate(base.n_total);
  if (horizon_days < 1) throw InvalidArgument("horizon must be at least one day");
  if (tolerance.weeks < 0 || tolerance.cases < 0 || tolerance.peak_floor < 0)
    throw InvalidArgument("ABC tolerances must be non-negative");
}

Count PosteriorSample::size() const {
  Count n = 0;
  for (const auto& c : counts) n += c.accepted;
  return n;
}

double PosteriorSample::max_rate() const {
  double best = 0.0;
  for (const auto& c : counts)
    if (c.attempted > 0)
      best = std::max(best, static_cast<double>(c.accepted) / static_cast<double>(c.attempted));
  return best;
}

std::vector<GridPoint> PosteriorSample::draws() const {
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    out.insert(out.end(), static_cast<std::size_t>(counts[i].accepted), points[i]);
  return out;
}

AcceptanceSurface acceptance_surface(const PosteriorSample& posterior) {
  AcceptanceSurface surface;
  surface.points = posterior.points;
  surface.rates.reserve(posterior.counts.size());
  for (const auto& c : posterior.counts)
    surface.rates.push_back(c.attempted > 0 ? static_cast<double>(c.accepted) /
                                                  static_cast<double>(c.attempted)
                                            : 0.0);
  return surface;
}

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::size_t grid_index, int traj) {
  return derive_seed(base_seed, grid_index, static_cast<std::uint64_t>(traj));
}

WeeklySeries simulate_weekly(const ModelParams& params, const SimConfig& config, RngStream& rng) {
  WeeklySeries weeks(static_cast<std::size_t>((config.horizon_days + kDaysPerWeek - 1) / kDaysPerWeek),
                     0);
  run_days(params, config.init, config.horizon_days, rng,
           [&](int day, const CompartmentState&, const DailyFlows& flows) {
             weeks[static_cast<std::size_t>(day / kDaysPerWeek)] += flows.n_it_qi;
           });
  return weeks;
}

std::vector<PosteriorSample> run_abc_many(const std::vector<GridPoint>& grid,
                                          const std::vector<PeakSet>& observed,
                                          const SimConfig& config, const AbcOptions& options) {
  if (options.n_traj < 1) throw InvalidArgument("n_traj must be at least 1");
  if (grid.empty()) throw InvalidArgument("empty parameter grid");
  for (const auto& obs : observed)
    if (obs.empty()) throw InvalidArgument("observed peak set is empty; nothing to match");
  config.validate();

  // accepted[k][g] for observed set k at grid point g.
  std::vector<std::vector<Count>> accepted(observed.size(), std::vector<Count>(grid.size(), 0));
  std::size_t finished = 0;
  std::mutex progress_mutex;

  parallel_for(grid.size(), options.workers, [&](std::size_t g) {
    const ModelParams params = config.at(grid[g]);
    params.validate();
    std::vector<Count> local(observed.size(), 0);
    for (int j = 0; j < options.n_traj; ++j) {
      RngStream rng(trajectory_seed(options.base_seed, g, j));
      const WeeklySeries weeks = simulate_weekly(params, config, rng);
      const PeakSet peaks = detect_peaks(weeks, config.tolerance.peak_floor);
      for (std::size_t k = 0; k < observed.size(); ++k)
        if (abc_match(observed[k], peaks, config.tolerance)) ++local[k];
    }
    for (std::size_t k = 0; k < observed.size(); ++k) accepted[k][g] = local[k];

    if (options.progress) {
      // Counted under the lock so reported fractions never go backwards.
      std::lock_guard lock(progress_mutex);
      options.progress(static_cast<double>(++finished) / static_cast<double>(grid.size()));
    }
  });

  std::vector<PosteriorSample> out(observed.size());
  for (std::size_t k = 0; k < observed.size(); ++k) {
    out[k].points = grid;
    out[k].counts.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
      out[k].counts[g] = {accepted[k][g], static_cast<Count>(options.n_traj)};
  }
  return out;
}

PosteriorSample run_abc(const std::vector<GridPoint>& grid, const PeakSet& observed,
                        const SimConfig& config, const AbcOptions& options) {
  return std::move(run_abc_many(grid, {observed}, config, options).front());
}

namespace {

// Quantile (linear interpolation between order statistics) of a sample given
// as value -> multiplicity.
double weighted_quantile(const std::map<double, Count>& sample, Count n, double q) {
  const double h = static_cast<double>(n - 1) * q;
  const auto lo = static_cast<Count>(std::floor(h));
  auto order_stat = [&](Count k) {
    Count seen = 0;
    for (const auto& [value, weight] : sample) {
      seen += weight;
      if (k < seen) return value;
    }
    return sample.rbegin()->first;
  };
  const double a = order_stat(lo);
  const double b = order_stat(std::min(lo + 1, n - 1));
  return a + (h - static_cast<double>(lo)) * (b - a);
}

}  // namespace

CredibleIntervals marginal_ci(const PosteriorSample& posterior, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("credible level must lie in (0, 1)");
  const Count n = posterior.size();
  if (n == 0) throw NoAcceptances(posterior.max_rate());

  std::map<double, Count> alpha, beta, i_out;
  for (std::size_t i = 0; i < posterior.points.size(); ++i) {
    const Count w = posterior.counts[i].accepted;
    if (w == 0) continue;
    alpha[posterior.points[i].alpha] += w;
    beta[posterior.points[i].beta] += w;
    i_out[static_cast<double>(posterior.points[i].i_out)] += w;
  }
  const double lo_q = (1.0 - level) / 2.0;
  const double hi_q = 1.0 - lo_q;
  CredibleIntervals ci;
  ci.level = level;
  ci.alpha = {weighted_quantile(alpha, n, lo_q), weighted_quantile(alpha, n, hi_q)};
  ci.beta = {weighted_quantile(beta, n, lo_q), weighted_quantile(beta, n, hi_q)};
  ci.i_out = {weighted_quantile(i_out, n, lo_q), weighted_quantile(i_out, n, hi_q)};
  return ci;
}

std::vector<GridPoint> simulation_study_truths() {
  std::vector<GridPoint> out;
  for (double a : {0.25, 0.75})
    for (double b : {0.32, 0.8})
      for (Count o : {Count{100}, Count{150}}) out.push_back({a, b, o});
  return out;
}

std::vector<StudyRow> run_simulation_study(const std::vector<GridPoint>& truths, int n_curves,
                                           const std::vector<GridPoint>& grid,
                                           const SimConfig& config, const AbcOptions& options,
                                           double level) {
  if (n_curves < 1) throw InvalidArgument("simulation study needs at least one curve per set");
  config.validate();

  std::vector<StudyRow> rows(truths.size());
  std::vector<PeakSet> observed;
  std::vector<std::size_t> owner;  // observed curve -> truth index
  const std::uint64_t data_seed = splitmix64(~options.base_seed);
  for (std::size_t t = 0; t < truths.size(); ++t) {
    rows[t].truth = truths[t];
    const ModelParams params = config.at(truths[t]);
    for (int c = 0; c < n_curves; ++c) {
      RngStream rng(derive_seed(data_seed, t, static_cast<std::uint64_t>(c)));
      PeakSet peaks = detect_peaks(simulate_weekly(params, config, rng), config.tolerance.peak_floor);
      if (peaks.empty()) {
        ++rows[t].curves_without_peaks;
        continue;
      }
      observed.push_back(std::move(peaks));
      owner.push_back(t);
    }
  }

  // Every fit uses the same base seed, so one simulation pass serves them all.
  std::vector<PosteriorSample> fits;
  if (!observed.empty()) fits = run_abc_many(grid, observed, config, options);

  for (auto& row : rows) {
    row.pooled.points = grid;
    row.pooled.counts.assign(grid.size(), GridCount{});
  }
  for (std::size_t k = 0; k < fits.size(); ++k) {
    StudyRow& row = rows[owner[k]];
    if (fits[k].empty()) {
      ++row.curves_without_acceptances;
      continue;
    }
    ++row.curves_used;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      row.pooled.counts[g].accepted += fits[k].counts[g].accepted;
      row.pooled.counts[g].attempted += fits[k].counts[g].attempted;
    }
  }
  for (auto& row : rows)
    if (!row.pooled.empty()) row.intervals = marginal_ci(row.pooled, level);
  return rows;
}

}  // namespace campus
