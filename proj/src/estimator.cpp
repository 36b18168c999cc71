#include "zosah/estimator.hpp"

namespace zosah {

namespace {

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite function value");
  return v;
}

}  // namespace

GradientEstimate estimate_gradient(CountedOracle& oracle, const Vector& x, const PairProjection& p,
                                   double epsilon, double f_x) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("estimate_gradient: epsilon must be positive");
  checked(f_x, "estimate_gradient");
  const Vec2<double> theta = project(p, x);

  GradientEstimate est;
  est.epsilon = epsilon;
  for (int i = 0; i < 2; ++i) {
    const Vec2<double> step = epsilon * Vec2<double>::Unit(i);
    const double f_i = checked(oracle(lift(p, step, x)), "estimate_gradient");
    est.probes[static_cast<std::size_t>(i)] = {theta + step, f_i};
    est.g_hat[i] = (f_i - f_x) / epsilon;
  }
  return est;
}

Mat2<double> fd_subspace_hessian(CountedOracle& oracle, const Vector& x, const PairProjection& p,
                                 double epsilon, double f_x, const GradientEstimate& grad) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fd_subspace_hessian: epsilon must be positive");
  const double f1 = grad.probes[0].value;
  const double f2 = grad.probes[1].value;
  const double f11 = checked(oracle(lift(p, Vec2<double>(2 * epsilon, 0.0), x)), "fd_subspace_hessian");
  const double f22 = checked(oracle(lift(p, Vec2<double>(0.0, 2 * epsilon), x)), "fd_subspace_hessian");
  const double f12 = checked(oracle(lift(p, Vec2<double>(epsilon, epsilon), x)), "fd_subspace_hessian");

  const double e2 = epsilon * epsilon;
  Mat2<double> A;
  A(0, 0) = (f11 - 2.0 * f1 + f_x) / e2;
  A(1, 1) = (f22 - 2.0 * f2 + f_x) / e2;
  A(0, 1) = A(1, 0) = (f12 - f1 - f2 + f_x) / e2;
  return A;
}

}  // namespace zosah
