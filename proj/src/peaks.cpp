#include "campus/peaks.hpp"

#include <cstdlib>

namespace campus {

WeeklySeries weekly_cases(std::span<const DailyFlows> flows) {
  WeeklySeries weeks((flows.size() + kDaysPerWeek - 1) / kDaysPerWeek, 0);
  for (std::size_t day = 0; day < flows.size(); ++day) weeks[day / kDaysPerWeek] += flows[day].n_it_qi;
  return weeks;
}

WeeklySeries weekly_cases(const Trajectory& trajectory) { return weekly_cases(trajectory.flows); }

PeakSet detect_peaks(std::span<const Count> series, Count floor) {
  PeakSet peaks;
  for (std::size_t t = 1; t + 1 < series.size(); ++t) {
    const Count h = series[t];
    if (h >= floor && series[t - 1] < h && series[t + 1] < h)
      peaks.push_back({static_cast<int>(t) + 1, h});
  }
  return peaks;
}

bool abc_match(const PeakSet& observed, const PeakSet& simulated, const AbcTolerance& tol) {
  if (observed.size() != simulated.size()) return false;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (std::abs(observed[i].week - simulated[i].week) > tol.weeks) return false;
    if (std::llabs(observed[i].height - simulated[i].height) > tol.cases) return false;
  }
  return true;
}

}  // namespace campus
