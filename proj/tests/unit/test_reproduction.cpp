#include <doctest.h>

#include "campus/errors.hpp"
#include "campus/reproduction.hpp"

using namespace campus;

namespace {

// Expected secondary cases summed over the paths an exposed person can take:
// E -> I_A (-> I_T) or E -> I_S -> I_T, each stage weighted by its mean stay.
double branch_sum(const NextGenInputs& in) {
  const double leave_a = in.sigma * in.tau_f + (1 - in.sigma) * in.gamma;
  const double via_a = 1.0 / leave_a + (in.sigma * in.tau_f / leave_a) / in.tau_r;
  const double via_s = 1.0 / in.tau_s + 1.0 / in.tau_r;
  return in.beta * ((1 - in.alpha) * via_a + in.alpha * via_s);
}

}  // namespace

TEST_CASE("defaults reproduce the closed form") {
  NextGenInputs in;
  in.alpha = 0.3;
  in.beta = 0.4;
  CHECK(r0_spectral(in) == doctest::Approx(4.624).epsilon(1e-12));
  CHECK(r0_closed_form(0.3, 0.4) == doctest::Approx(4.624).epsilon(1e-12));
}

TEST_CASE("spectral radius equals the branch sum for arbitrary rates") {
  for (double alpha : {0.0, 0.2, 0.9}) {
    for (double sigma : {0.0, 0.5, 1.0}) {
      NextGenInputs in;
      in.alpha = alpha;
      in.beta = 0.7;
      in.sigma = sigma;
      in.tau_f = 0.3;
      in.gamma = 0.1;
      in.tau_s = 0.25;
      in.tau_r = 0.8;
      CHECK(r0_spectral(in) == doctest::Approx(branch_sum(in)).epsilon(1e-12));
      CHECK(r0_eigen(in) == doctest::Approx(branch_sum(in)).epsilon(1e-9));
    }
  }
}

TEST_CASE("matrix structure") {
  const NextGenMatrices m = build_fv(NextGenInputs{});
  CHECK(m.f(0, 0) == 0.0);
  CHECK(m.f(0, 1) == 0.4);
  CHECK(m.f(1, 0) == 0.0);
  CHECK(m.v(0, 1) == 0.0);  // lower triangular
  CHECK(m.v(1, 1) == doctest::Approx(1.0 / 14));
}

TEST_CASE("zero exit rates are singular") {
  NextGenInputs in;
  in.tau_s = 0.0;
  CHECK_THROWS_AS(r0_spectral(in), SingularMatrix);
  in = {};
  in.sigma = 0.0;
  in.gamma = 0.0;
  CHECK_THROWS_AS(build_fv(in), SingularMatrix);
}
