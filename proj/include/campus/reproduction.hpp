#pragma once

#include <Eigen/Core>

#include "campus/model.hpp"

namespace campus {

/// Rows and columns indexed (E, I_A, I_S, I_T).
using Matrix4 = Eigen::Matrix4d;

struct NextGenInputs {
  double alpha = 0.3;
  double beta = 0.4;
  double mu = 1.0 / 3.0;
  double gamma = 1.0 / 14.0;
  double sigma = 0.4;
  double tau_f = 1.0 / 14.0;
  double tau_s = 0.5;
  double tau_r = 0.5;

  static NextGenInputs from(const ModelParams& params);
};

struct NextGenMatrices {
  Matrix4 f;  // new infections
  Matrix4 v;  // transitions among infected classes
};

/// F has a single nonzero row (0, beta, beta, beta). V is lower triangular
/// with exit rates mu, sigma*tau_f + (1-sigma)*gamma, tau_s, tau_r on the
/// diagonal. I_S has no recovery exit here, so the result is the continuous
/// model's R0 rather than the discrete simulator's effective value.
/// Throws SingularMatrix when any diagonal rate is zero.
NextGenMatrices build_fv(const NextGenInputs& inputs);

/// Spectral radius of F V^-1. F = e1 b^T, so the only nonzero eigenvalue is
/// b^T V^-1 e1, computed by a triangular solve.
double r0_spectral(const NextGenInputs& inputs);

/// Same quantity from a general eigen decomposition of F V^-1 (cross-check).
double r0_eigen(const NextGenInputs& inputs);

/// (14.8 - 10.8 alpha) beta; only meaningful at the default fixed rates with
/// sigma = 0.4 and a 14-day surveillance interval.
double r0_closed_form(double alpha, double beta) noexcept;

}  // namespace campus
