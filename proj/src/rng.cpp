#include "campus/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "campus/errors.hpp"

namespace campus {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ splitmix64(a + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ splitmix64(b + 0x85157af5ULL));
  return h;
}

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t index)
    : base_seed_(base_seed), index_(index), engine_(derive_seed(base_seed, index)) {}

namespace {
__extension__ using u128 = unsigned __int128;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  // Lemire's nearly-divisionless method.
  u128 m = static_cast<u128>(engine_()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(engine_()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

namespace {

// Inversion by sequential search, p <= 0.5 and n*p small.
Count binomial_inversion(Count n, double p, RngStream& rng) {
  const double q = 1.0 - p;
  const double qn = std::exp(static_cast<double>(n) * std::log(q));
  const double np = static_cast<double>(n) * p;
  const double bound = std::min(static_cast<double>(n), np + 10.0 * std::sqrt(np * q + 1.0));

  Count x = 0;
  double px = qn;
  double u = rng.uniform();
  while (u > px) {
    ++x;
    if (static_cast<double>(x) > bound) {
      x = 0;
      px = qn;
      u = rng.uniform();
    } else {
      u -= px;
      px = (static_cast<double>(n - x + 1) * p * px) / (static_cast<double>(x) * q);
    }
  }
  return x;
}

double stirling_tail(double v) {
  const double v2 = v * v;
  return (13680. - (462. - (132. - (99. - 140. / v2) / v2) / v2) / v2) / v / 166320.;
}

// Kachitvichyanukul & Schmeiser BTPE, p <= 0.5.
Count binomial_btpe(Count n, double p, RngStream& rng) {
  const double nd = static_cast<double>(n);
  const double r = p;
  const double q = 1.0 - r;
  const double fm = nd * r + r;
  const auto m = static_cast<Count>(std::floor(fm));
  const double md = static_cast<double>(m);
  const double p1 = std::floor(2.195 * std::sqrt(nd * r * q) - 4.6 * q) + 0.5;
  const double xm = md + 0.5;
  const double xl = xm - p1;
  const double xr = xm + p1;
  const double c = 0.134 + 20.5 / (15.3 + md);
  double a = (fm - xl) / (fm - xl * r);
  const double laml = a * (1.0 + a / 2.0);
  a = (xr - fm) / (xr * q);
  const double lamr = a * (1.0 + a / 2.0);
  const double p2 = p1 * (1.0 + 2.0 * c);
  const double p3 = p2 + c / laml;
  const double p4 = p3 + c / lamr;
  const double nrq = nd * r * q;

  for (;;) {
    const double u = rng.uniform() * p4;
    double v = rng.uniform();
    Count y;

    if (u <= p1) {
      // Triangular region: immediate accept.
      return static_cast<Count>(std::floor(xm - p1 * v + u));
    }
    if (u <= p2) {
      const double x = xl + (u - p1) / c;
      v = v * c + 1.0 - std::fabs(md - x + 0.5) / p1;
      if (v > 1.0) continue;
      y = static_cast<Count>(std::floor(x));
    } else if (u <= p3) {
      if (v == 0.0) continue;
      const double yl = std::floor(xl + std::log(v) / laml);
      if (yl < 0.0) continue;
      y = static_cast<Count>(yl);
      v = v * (u - p2) * laml;
    } else {
      if (v == 0.0) continue;
      const double yr = std::floor(xr - std::log(v) / lamr);
      if (yr > nd) continue;
      y = static_cast<Count>(yr);
      v = v * (u - p3) * lamr;
    }

    const Count k = std::llabs(y - m);
    if (k <= 20 || static_cast<double>(k) >= nrq / 2.0 - 1.0) {
      // Explicit evaluation of f(y)/f(m) by recursion.
      const double s = r / q;
      const double aa = s * (nd + 1.0);
      double f = 1.0;
      if (m < y) {
        for (Count i = m + 1; i <= y; ++i) f *= (aa / static_cast<double>(i) - s);
      } else if (m > y) {
        for (Count i = y + 1; i <= m; ++i) f /= (aa / static_cast<double>(i) - s);
      }
      if (v > f) continue;
      return y;
    }

    // Squeeze on log f(y) using Stirling's approximation.
    const double kd = static_cast<double>(k);
    const double rho = (kd / nrq) * ((kd * (kd / 3.0 + 0.625) + 0.16666666666666666) / nrq + 0.5);
    const double t = -kd * kd / (2.0 * nrq);
    const double log_v = std::log(v);
    if (log_v < t - rho) return y;
    if (log_v > t + rho) continue;

    const double yd = static_cast<double>(y);
    const double x1 = yd + 1.0;
    const double f1 = md + 1.0;
    const double z = nd + 1.0 - md;
    const double w = nd - yd + 1.0;
    const double bound = xm * std::log(f1 / x1) + (nd - md + 0.5) * std::log(z / w) +
                         (yd - md) * std::log(w * r / (x1 * q)) + stirling_tail(f1) +
                         stirling_tail(z) + stirling_tail(x1) + stirling_tail(w);
    if (log_v > bound) continue;
    return y;
  }
}

// Draws one individual at a time; cheap when the smaller of (sample, rest) is small.
Count hypergeometric_sequential(Count good, Count bad, Count sample, RngStream& rng) {
  const Count pop = good + bad;
  const bool complement = sample > pop / 2;
  const Count picks = complement ? pop - sample : sample;
  Count good_left = good;
  Count left = pop;
  Count chosen_good = 0;
  for (Count k = 0; k < picks; ++k) {
    if (static_cast<Count>(rng.below(static_cast<std::uint64_t>(left))) < good_left) {
      --good_left;
      ++chosen_good;
    }
    --left;
  }
  return complement ? good - chosen_good : chosen_good;
}

double log_factorial(Count k) { return std::lgamma(static_cast<double>(k) + 1.0); }

// Stadlober's ratio-of-uniforms sampler (HRUA).
Count hypergeometric_hrua(Count good, Count bad, Count sample, RngStream& rng) {
  constexpr double kD1 = 1.7155277699214135;
  constexpr double kD2 = 0.8989161620588988;
  const Count pop = good + bad;
  const Count n = std::min(sample, pop - sample);
  const Count min_gb = std::min(good, bad);
  const Count max_gb = std::max(good, bad);
  const double popd = static_cast<double>(pop);
  const double p = static_cast<double>(min_gb) / popd;
  const double q = static_cast<double>(max_gb) / popd;

  const double mode = static_cast<double>(n + 1) * static_cast<double>(min_gb + 1) / (popd + 2.0);
  const double var = static_cast<double>(pop - n) * static_cast<double>(n) * p * q / (popd - 1.0);
  const double a = mode + 0.5;
  const double c = std::sqrt(var + 0.5);
  const double b = std::min(static_cast<double>(std::min(n, min_gb) + 1), std::floor(a + 16.0 * c));
  const double h = kD1 * c + kD2;
  const auto m = static_cast<Count>(std::floor(mode));
  const double g = log_factorial(m) + log_factorial(min_gb - m) + log_factorial(n - m) +
                   log_factorial(max_gb - n + m);

  Count k;
  for (;;) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    if (u == 0.0) continue;
    const double x = a + h * (v - 0.5) / u;
    if (x < 0.0 || x >= b) continue;
    k = static_cast<Count>(std::floor(x));
    const double gp = log_factorial(k) + log_factorial(min_gb - k) + log_factorial(n - k) +
                      log_factorial(max_gb - n + k);
    const double t = g - gp;
    if (u * (4.0 - u) - 3.0 <= t) break;
    if (u * (u - t) >= 1.0) continue;
    if (2.0 * std::log(u) <= t) break;
  }
  if (good > bad) k = n - k;
  if (n < sample) k = good - k;
  return k;
}

}  // namespace

Count binomial_draw(Count n, double p, RngStream& rng) {
  if (n < 0) throw InvalidArgument("binomial_draw: negative trial count");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("binomial_draw: probability outside [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;

  const bool flip = p > 0.5;
  const double r = flip ? 1.0 - p : p;
  const Count draw = (r * static_cast<double>(n) < 12.0) ? binomial_inversion(n, r, rng)
                                                          : binomial_btpe(n, r, rng);
  return flip ? n - draw : draw;
}

void partition_departures(Count n, std::span<const double> probs, RngStream& rng,
                          std::span<Count> out) {
  if (n < 0) throw InvalidArgument("partition_departures: negative count");
  if (out.size() != probs.size()) throw InvalidArgument("partition_departures: output size mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidArgument("partition_departures: probability outside [0, 1]");
    total += p;
  }
  if (total > 1.0 + 1e-12) throw InvalidArgument("partition_departures: probabilities sum above 1");

  std::fill(out.begin(), out.end(), Count{0});
  Count remaining = n;
  double mass_left = 1.0;
  for (std::size_t i = 0; i < probs.size() && remaining > 0; ++i) {
    if (probs[i] <= 0.0) continue;
    const double conditional = mass_left > 0.0 ? std::min(1.0, probs[i] / mass_left) : 1.0;
    out[i] = binomial_draw(remaining, conditional, rng);
    remaining -= out[i];
    mass_left -= probs[i];
  }
}

std::vector<Count> partition_departures(Count n, std::span<const double> probs, RngStream& rng) {
  std::vector<Count> out(probs.size(), 0);
  partition_departures(n, probs, rng, out);
  return out;
}

Count hypergeometric_draw(Count good, Count bad, Count sample, RngStream& rng) {
  if (good < 0 || bad < 0 || sample < 0)
    throw InvalidArgument("hypergeometric_draw: negative argument");
  const Count pop = good + bad;
  if (sample > pop) throw InvalidArgument("hypergeometric_draw: sample larger than population");
  if (sample == 0 || good == 0) return 0;
  if (bad == 0) return sample;
  if (sample == pop) return good;
  return std::min(sample, pop - sample) <= 20 ? hypergeometric_sequential(good, bad, sample, rng)
                                              : hypergeometric_hrua(good, bad, sample, rng);
}

void sample_without_replacement(std::span<const Count> groups, Count draws, RngStream& rng,
                                std::span<Count> out) {
  if (draws < 0) throw InvalidArgument("sample_without_replacement: negative draw count");
  if (out.size() != groups.size())
    throw InvalidArgument("sample_without_replacement: output size mismatch");
  Count pool = 0;
  for (Count g : groups) {
    if (g < 0) throw InvalidArgument("sample_without_replacement: negative group size");
    pool += g;
  }
  if (draws >= pool) {
    std::copy(groups.begin(), groups.end(), out.begin());
    return;
  }

  // Conditional on earlier groups, each group's share is hypergeometric.
  Count remaining = draws;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    pool -= groups[g];
    out[g] = remaining > 0 ? hypergeometric_draw(groups[g], pool, remaining, rng) : 0;
    remaining -= out[g];
  }
}

std::vector<Count> sample_without_replacement(std::span<const Count> groups, Count draws,
                                              RngStream& rng) {
  std::vector<Count> out(groups.size(), 0);
  sample_without_replacement(groups, draws, rng, out);
  return out;
}

}  // namespace campus
