#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "campus/abc.hpp"

namespace campus {

/// Everything a CLI run needs. Omitted keys keep the campus defaults.
struct RunConfig {
  SimConfig sim;
  PriorGrid grid;
  int n_traj = 1000;
  double credible_level = 0.95;
  std::size_t ensemble_size = 1000;
  int policy_runs = 200;
  bool common_random_numbers = true;
  std::uint64_t seed = 20201;
  bool seed_set = false;      // seed given in the file
  bool grid_set = false;      // any [grid] key given in the file
  bool n_traj_set = false;    // abc.n_traj given in the file
  std::filesystem::path output_dir = "out";

  void validate() const;
};

/// Parses TOML text. Unknown keys and out-of-range values throw ParseError.
RunConfig parse_config(std::string_view toml_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical TOML rendering; parse_config(to_toml(c)) reproduces c.
std::string to_toml(const RunConfig& config);

}  // namespace campus
