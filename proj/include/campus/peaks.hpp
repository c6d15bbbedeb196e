#pragma once

#include <span>
#include <vector>

#include "campus/model.hpp"

namespace campus {

inline constexpr int kDaysPerWeek = 7;

/// Weekly detected cases; a trailing partial week is kept.
using WeeklySeries = std::vector<Count>;

struct Peak {
  int week = 0;  // 1-based
  Count height = 0;
  bool operator==(const Peak&) const = default;
};

using PeakSet = std::vector<Peak>;

/// Acceptance thresholds for comparing peak sets.
struct AbcTolerance {
  int weeks = 1;
  Count cases = 10;
  Count peak_floor = 20;
};

/// A case is a returned positive result (the I_T -> Q_i flow).
WeeklySeries weekly_cases(std::span<const DailyFlows> flows);
WeeklySeries weekly_cases(const Trajectory& trajectory);

/// Week t is a peak when strictly above both neighbours and at least `floor`.
/// The first and last weeks are never peaks.
PeakSet detect_peaks(std::span<const Count> series, Count floor = 20);

/// Same peak count, and every pair (in order) within the week and case tolerances.
bool abc_match(const PeakSet& observed, const PeakSet& simulated, const AbcTolerance& tol = {});

}  // namespace campus
