#pragma once

// Deterministic expectation iteration of the chain-binomial step, written
// independently of the simulator: every draw is replaced by its mean and
// fractional individuals are allowed. Used as an oracle at large N.

#include <algorithm>
#include <array>
#include <vector>

#include "campus/model.hpp"

namespace campus::testing {

struct MeanState {
  double s = 0, s_q = 0, e = 0, i_a = 0, i_s = 0, i_t = 0, q_i = 0, r_d = 0, r_u = 0;
  double qq_exposed = 0, qq_infectious = 0, qq_recovered = 0;

  double q_q() const { return qq_exposed + qq_infectious + qq_recovered; }
  double total() const { return s + s_q + e + i_a + i_s + i_t + q_i + r_d + r_u + q_q(); }
  // Same order as kCompartmentFields: S, S_q, E, I_A, I_S, I_T, Q_i, Q_q, R_D, R_U.
  std::array<double, 10> compartments() const { return {s, s_q, e, i_a, i_s, i_t, q_i, q_q(), r_d, r_u}; }

  static MeanState from(const CompartmentState& x) {
    MeanState m;
    m.s = double(x.s);
    m.s_q = double(x.s_q);
    m.e = double(x.e);
    m.i_a = double(x.i_a);
    m.i_s = double(x.i_s);
    m.i_t = double(x.i_t);
    m.q_i = double(x.q_i);
    m.r_d = double(x.r_d);
    m.r_u = double(x.r_u);
    m.qq_exposed = double(x.q_q_ledger.exposed);
    m.qq_infectious = double(x.q_q_ledger.infectious);
    m.qq_recovered = double(x.q_q_ledger.recovered);
    return m;
  }
};

// Two competing daily exit probabilities; rescaled to sum to one if needed.
inline std::array<double, 2> exits(double a, double b) {
  const double sum = a + b;
  return sum > 1.0 ? std::array<double, 2>{a / sum, b / sum} : std::array<double, 2>{a, b};
}

inline MeanState expected_step(const MeanState& x, const ModelParams& p) {
  const double lambda = std::min(1.0, p.beta * (x.i_a + x.i_s + x.i_t) / double(p.n_total));
  const double se = x.s * lambda;
  const auto pe = exits((1 - p.alpha) * p.mu, p.alpha * p.mu);
  const double e_ia = x.e * pe[0], e_is = x.e * pe[1];
  const auto pa = exits(p.sigma * p.tau_f, (1 - p.sigma) * p.gamma);
  const double ia_it = x.i_a * pa[0], ia_ru = x.i_a * pa[1];
  const auto ps = exits(p.tau_s, p.gamma);
  const double is_it = x.i_s * ps[0], is_ru = x.i_s * ps[1];
  const double it_qi = x.i_t * p.tau_r;
  const double qi_rd = x.q_i * p.r_i;
  const auto pqi = exits(p.tau_s, p.r_q);
  const auto pqe = exits(p.mu, p.r_q);
  const double qinf_it = x.qq_infectious * pqi[0], qinf_out = x.qq_infectious * pqi[1];
  const double qexp_inf = x.qq_exposed * pqe[0], qexp_out = x.qq_exposed * pqe[1];
  const double qrec_out = x.qq_recovered * p.r_q;
  const double sq_s = x.s_q * p.r_q;

  // Contacts are split across the eligible groups in proportion to size.
  const std::array<double, 4> pool{x.s - se, x.e - e_ia - e_is, x.i_a - ia_it - ia_ru, x.r_u};
  const double pool_total = pool[0] + pool[1] + pool[2] + pool[3];
  const double wanted = double(p.n_cc) * it_qi;
  const double frac = pool_total > 0 ? std::min(1.0, wanted / pool_total) : 0.0;
  const double s_sq = pool[0] * frac, e_qq = pool[1] * frac, ia_qq = pool[2] * frac, ru_qq = pool[3] * frac;

  MeanState y;
  y.s = x.s - se - s_sq + sq_s;
  y.s_q = x.s_q - sq_s + s_sq;
  y.e = x.e - e_ia - e_is - e_qq + se;
  y.i_a = x.i_a - ia_it - ia_qq - ia_ru + e_ia;
  y.i_s = x.i_s - is_it - is_ru + e_is;
  y.i_t = x.i_t - it_qi + ia_it + is_it + qinf_it;
  y.q_i = x.q_i - qi_rd + it_qi;
  y.r_d = x.r_d + qi_rd;
  y.r_u = x.r_u - ru_qq + ia_ru + is_ru + qinf_out + qexp_out + qrec_out;
  y.qq_exposed = x.qq_exposed - qexp_inf - qexp_out + e_qq;
  y.qq_infectious = x.qq_infectious - qinf_it - qinf_out + qexp_inf + ia_qq;
  y.qq_recovered = x.qq_recovered - qrec_out + ru_qq;
  return y;
}

/// States for days 0..horizon, with the break arrivals added at the end of
/// day break_return_day.
inline std::vector<MeanState> expectation_path(const ModelParams& p, const CompartmentState& init,
                                               int horizon) {
  std::vector<MeanState> path{MeanState::from(init)};
  for (int day = 0; day < horizon; ++day) {
    MeanState next = expected_step(path.back(), p);
    if (p.break_return_day > 0 && day + 1 == p.break_return_day) {
      const double moved = std::min(double(p.i_out), next.s);
      next.s -= moved;
      next.e += moved;
    }
    path.push_back(next);
  }
  return path;
}

}  // namespace campus::testing
