#include "campus/reproduction.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "campus/errors.hpp"

namespace campus {

NextGenInputs NextGenInputs::from(const ModelParams& params) {
  return {params.alpha, params.beta,  params.mu,    params.gamma,
          params.sigma, params.tau_f, params.tau_s, params.tau_r};
}

NextGenMatrices build_fv(const NextGenInputs& in) {
  NextGenMatrices m;
  m.f.setZero();
  m.f(0, 1) = in.beta;
  m.f(0, 2) = in.beta;
  m.f(0, 3) = in.beta;

  m.v.setZero();
  m.v(0, 0) = in.mu;
  m.v(1, 0) = -(1.0 - in.alpha) * in.mu;
  m.v(1, 1) = in.sigma * in.tau_f + (1.0 - in.sigma) * in.gamma;
  m.v(2, 0) = -in.alpha * in.mu;
  m.v(2, 2) = in.tau_s;
  m.v(3, 1) = -in.sigma * in.tau_f;
  m.v(3, 2) = -in.tau_s;
  m.v(3, 3) = in.tau_r;

  for (int i = 0; i < 4; ++i)
    if (!(m.v(i, i) > 0.0))
      throw SingularMatrix("next-generation V is singular: zero exit rate on diagonal " +
                           std::to_string(i));
  return m;
}

double r0_spectral(const NextGenInputs& inputs) {
  const auto [f, v] = build_fv(inputs);
  // Eigenvalue of e1 b^T V^-1 is b^T V^-1 e1 = b^T y with V y = e1.
  const Eigen::Vector4d y = v.triangularView<Eigen::Lower>().solve(Eigen::Vector4d::UnitX());
  const Eigen::Vector4d b = f.row(0).transpose();
  return b.dot(y);
}

double r0_eigen(const NextGenInputs& inputs) {
  const auto [f, v] = build_fv(inputs);
  const Matrix4 ngm = f * v.inverse();
  Eigen::EigenSolver<Matrix4> solver(ngm, false);
  if (solver.info() != Eigen::Success) throw SingularMatrix("eigen decomposition failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double r0_closed_form(double alpha, double beta) noexcept { return (14.8 - 10.8 * alpha) * beta; }

}  // namespace campus
