#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "campus/abc.hpp"
#include "campus/config.hpp"
#include "campus/ensemble.hpp"
#include "campus/policy.hpp"

namespace campus {

/// Weekly case counts from a `week,cases` CSV; weeks contiguous from 1.
struct ObservedSeries {
  WeeklySeries cases;
};

ObservedSeries parse_observed_csv(std::istream& in);
ObservedSeries parse_observed_csv(const std::filesystem::path& path);
void write_observed_csv(std::ostream& out, const WeeklySeries& series);

// Trajectory: day, compartments, then one column per flow. Row 0 has zero flows.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
/// Reads states and flows back; params and seed are not part of the CSV.
Trajectory read_trajectory_csv(std::istream& in);

// posterior_draws.csv: alpha,beta,i_out with one row per accepted trajectory.
void write_posterior_draws_csv(std::ostream& out, const PosteriorSample& posterior);
std::vector<GridPoint> read_posterior_draws_csv(std::istream& in);

// acceptance_surface.csv: alpha,beta,i_out,accepted,attempted.
void write_acceptance_surface_csv(std::ostream& out, const PosteriorSample& posterior);
PosteriorSample read_acceptance_surface_csv(std::istream& in);
PosteriorSample read_acceptance_surface_csv(const std::filesystem::path& path);

// band.csv: week,fence_lo,band_lo,median,band_hi,fence_hi.
void write_band_csv(std::ostream& out, const FunctionalBand& band);
// curves.csv: curve,alpha,beta,i_out,week_1..week_w.
void write_curves_csv(std::ostream& out, const CurveMatrix& curves);
CurveMatrix read_curves_csv(std::istream& in);

// Per-strategy median daily case curves: day,<label 1>,<label 2>,...
void write_policy_curves_csv(std::ostream& out, const std::vector<PolicyReport>& reports);

nlohmann::json to_json(const PeakSet& peaks);
PeakSet peaks_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CredibleIntervals& ci, const PosteriorSample& posterior);
CredibleIntervals intervals_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Strategy& strategy);
Strategy strategy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<PolicyReport>& reports, const SweepOptions& options);
std::vector<PolicyReport> policy_reports_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FunctionalBand& band);
nlohmann::json to_json(const ModelParams& params);
/// Applies the keys present in `j` on top of `base`; unknown keys throw InvalidArgument.
ModelParams params_from_json(const nlohmann::json& j, ModelParams base = {});
nlohmann::json to_json(const CompartmentState& state);
CompartmentState state_from_json(const nlohmann::json& j);

/// Summary used by the simulate endpoint and `simulate --json`.
nlohmann::json trajectory_summary(const Trajectory& trajectory);

/// Writes config.toml and manifest.json (command, seed, version) into `dir`.
void write_manifest(const std::filesystem::path& dir, const RunConfig& config,
                    const std::string& command, const std::vector<std::string>& argv);

/// Stable text rendering used for every JSON artifact (2-space indent, trailing newline).
std::string dump(const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

std::string version_string();

}  // namespace campus
