#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace campus {

using Count = std::int64_t;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Mixes a base seed with up to two indices into a well-separated 64-bit seed.
/// Used for per-trajectory streams: seed(grid_index, traj_index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Deterministic random stream for one trajectory. The same (base_seed, index)
/// always yields the same sequence, independent of thread scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t base_seed, std::uint64_t index = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t base_seed() const noexcept { return base_seed_; }
  std::uint64_t index() const noexcept { return index_; }

 private:
  std::uint64_t base_seed_;
  std::uint64_t index_;
  std::mt19937_64 engine_;
};

/// Exact Binomial(n, p) draw. Inversion for small n*min(p, 1-p), BTPE otherwise.
Count binomial_draw(Count n, double p, RngStream& rng);

/// Multinomial split of n individuals over destinations with the given
/// probabilities; the remainder (1 - sum) stays put. Returns one count per
/// destination.
std::vector<Count> partition_departures(Count n, std::span<const double> probs, RngStream& rng);
/// Allocation-free form; out.size() must equal probs.size().
void partition_departures(Count n, std::span<const double> probs, RngStream& rng,
                          std::span<Count> out);

/// Number of "good" items in a uniform sample without replacement of
/// `sample` items from good + bad.
Count hypergeometric_draw(Count good, Count bad, Count sample, RngStream& rng);

/// Uniform sample of `draws` individuals without replacement from pooled
/// groups. Returns how many were taken from each group. If draws exceeds the
/// pool, everyone is taken.
std::vector<Count> sample_without_replacement(std::span<const Count> groups, Count draws,
                                              RngStream& rng);
/// Allocation-free form; out.size() must equal groups.size().
void sample_without_replacement(std::span<const Count> groups, Count draws, RngStream& rng,
                                std::span<Count> out);

}  // namespace campus
