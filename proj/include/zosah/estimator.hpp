#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "zosah/oracle.hpp"
#include "zosah/subspace.hpp"

namespace zosah {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

inline constexpr double kDefaultEpsilon = 1e-3;
inline constexpr double kDefaultKappa = 0.1;
inline constexpr double kGammaFloor = 1e-10;
inline constexpr double kRidgeScale = 1e-8;

class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Gradient
// ---------------------------------------------------------------------------

/// A function value observed at a point of a pair's plane, in the plane's
/// own (absolute) coordinates.
struct PlaneSample {
  Vec2<double> point;
  double value = 0.0;
};

struct GradientEstimate {
  Vec2<double> g_hat;
  std::array<PlaneSample, 2> probes;  // theta + eps e_1, theta + eps e_2
  double epsilon = kDefaultEpsilon;
};

/// Forward coordinate differences in the plane of `p`. Costs exactly two
/// queries; f_x must already hold f(x).
GradientEstimate estimate_gradient(CountedOracle& oracle, const Vector& x, const PairProjection& p,
                                   double epsilon, double f_x);

// ---------------------------------------------------------------------------
// Symmetric 2x2 eigen-decomposition and positive-definite repair
// ---------------------------------------------------------------------------

/// Columns of `vectors` are e_1, e_2 with |values[0]| >= |values[1]|. Equal
/// magnitudes are ordered by signed value, largest first.
template <typename Scalar>
struct SymmetricEigen2 {
  Vec2<Scalar> values;
  Mat2<Scalar> vectors;

  Mat2<Scalar> reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

/// Closed-form eigen-decomposition of a symmetric 2x2 matrix. Only the lower
/// triangle's off-diagonal entry A(1, 0) is read.
template <typename Scalar>
SymmetricEigen2<Scalar> eig2x2(const Mat2<Scalar>& A) {
  using std::abs;
  using std::hypot;
  const Scalar a = A(0, 0);
  const Scalar b = A(1, 1);
  const Scalar c = A(1, 0);

  SymmetricEigen2<Scalar> out;
  const Scalar scale = abs(a) + abs(b);
  if (c == Scalar(0) || abs(c) <= std::numeric_limits<Scalar>::epsilon() * Scalar(1e-3) * scale) {
    out.values << a, b;
    out.vectors.setIdentity();
  } else {
    const Scalar half_trace = (a + b) / Scalar(2);
    const Scalar radius = hypot((a - b) / Scalar(2), c);
    // Larger-magnitude root first; the other via the determinant avoids
    // cancellation.
    const Scalar big = half_trace >= Scalar(0) ? half_trace + radius : half_trace - radius;
    const Scalar small = (a * b - c * c) / big;
    Vec2<Scalar> e1;
    if (abs(a - big) > abs(b - big)) {
      e1 << c, big - a;
    } else {
      e1 << big - b, c;
    }
    e1.normalize();
    out.values << big, small;
    out.vectors.col(0) = e1;
    out.vectors.col(1) << -e1[1], e1[0];
  }

  const Scalar m0 = abs(out.values[0]);
  const Scalar m1 = abs(out.values[1]);
  if (m1 > m0 || (m1 == m0 && out.values[1] > out.values[0])) {
    std::swap(out.values[0], out.values[1]);
    out.vectors.col(0).swap(out.vectors.col(1));
  }
  return out;
}

/// A fitted subspace Hessian together with its eigen-decomposition and the
/// repaired eigenvalues max(|lambda_i|, kappa).
template <typename Scalar>
struct SubspaceHessian {
  Mat2<Scalar> fitted;
  SymmetricEigen2<Scalar> eigen;
  Vec2<Scalar> repaired_values;

  Mat2<Scalar> repaired() const {
    return eigen.vectors * repaired_values.asDiagonal() * eigen.vectors.transpose();
  }
};

template <typename Scalar>
SubspaceHessian<Scalar> repair_hessian(const Mat2<Scalar>& A, Scalar kappa) {
  if (!(kappa > Scalar(0))) throw std::invalid_argument("repair_hessian: kappa must be positive");
  SubspaceHessian<Scalar> h;
  h.fitted = A;
  h.eigen = eig2x2(A);
  h.repaired_values = h.eigen.values.cwiseAbs().cwiseMax(kappa);
  return h;
}

/// sum_i max(|lambda_i|, kappa) e_i e_i^T. Returns A untouched when both
/// eigenvalues already are at least kappa.
template <typename Scalar>
Mat2<Scalar> make_pd(const Mat2<Scalar>& A, Scalar kappa) {
  const auto h = repair_hessian(A, kappa);
  if ((h.eigen.values.array() >= kappa).all()) return A;
  return h.repaired();
}

/// A_bar^{-1} g computed in the eigenbasis of the repaired Hessian.
template <typename Scalar>
Vec2<Scalar> newton_direction(const SubspaceHessian<Scalar>& h, const Vec2<Scalar>& g) {
  const auto& E = h.eigen.vectors;
  return E * (E.transpose() * g).cwiseQuotient(h.repaired_values);
}

/// Ā must be symmetric positive definite.
template <typename Scalar>
Vec2<Scalar> newton_direction(const Mat2<Scalar>& A_bar, const Vec2<Scalar>& g) {
  const auto e = eig2x2(A_bar);
  if (!(e.values.array() > Scalar(0)).all())
    throw std::invalid_argument("newton_direction: matrix is not positive definite");
  return e.vectors * (e.vectors.transpose() * g).cwiseQuotient(e.values);
}

// ---------------------------------------------------------------------------
// Least-squares Hessian fit
// ---------------------------------------------------------------------------

/// A sample expressed relative to the current plane point (which maps to 0).
template <typename Scalar>
struct FitSample {
  Vec2<Scalar> offset;
  Scalar value;
  bool has_reference = false;
  Vec2<Scalar> ref_offset = Vec2<Scalar>::Zero();
  Scalar ref_value = 0;
};

template <typename Scalar>
struct FitSystem {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> design;  // rows phi(offset_i)
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> targets;  // q_i
  Scalar min_eig_gram = 0;

  Eigen::Matrix<Scalar, 3, 3> gram() const { return design.transpose() * design; }
};

/// [t1 t1 / 2, t1 t2, t2 t2 / 2]
template <typename Scalar>
Eigen::Matrix<Scalar, 1, 3> monomials(const Vec2<Scalar>& t) {
  return {Scalar(0.5) * t[0] * t[0], t[0] * t[1], Scalar(0.5) * t[1] * t[1]};
}

/// Monomials for targets built from a forward-difference gradient with step
/// eps. Under the model f = c + b^T t + t^T A t / 2 the probes give
/// g_hat = b + (eps / 2) diag(A), so q(t) = phi(t)^T h - (eps / 2) diag(A)^T t.
/// Reduces to monomials() at eps = 0.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, 3> probe_aware_monomials(const Vec2<Scalar>& t, Scalar eps) {
  return {Scalar(0.5) * t[0] * (t[0] - eps), t[0] * t[1], Scalar(0.5) * t[1] * (t[1] - eps)};
}

/// b = g_hat - (eps / 2) diag(A): the model gradient consistent with
/// forward-difference probes of step eps.
template <typename Scalar>
Vec2<Scalar> curvature_corrected_gradient(const Vec2<Scalar>& g_hat, const Mat2<Scalar>& A,
                                          Scalar eps) {
  return g_hat - Scalar(0.5) * eps * A.diagonal();
}

template <typename Scalar>
Scalar min_eigenvalue(const Eigen::Matrix<Scalar, 3, 3>& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 3, 3>> solver(gram, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

/// Smallest eigenvalue of Phi^T Phi for the given offsets.
template <typename Scalar>
Scalar design_conditioning(std::span<const Vec2<Scalar>> offsets) {
  Eigen::Matrix<Scalar, 3, 3> gram = Eigen::Matrix<Scalar, 3, 3>::Zero();
  for (const auto& t : offsets) {
    const auto row = monomials(t);
    gram.noalias() += row.transpose() * row;
  }
  return min_eigenvalue(gram);
}

class InsufficientData : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// q_i = f(offset_i) - g^T offset_i - f(theta). Needs at least three samples.
/// A non-zero probe_epsilon switches the design rows to
/// probe_aware_monomials(), which makes the fit exact on quadratics even
/// though g_hat carries the forward-difference curvature term.
template <typename Scalar>
FitSystem<Scalar> build_fit_system(std::span<const FitSample<Scalar>> samples,
                                   const Vec2<Scalar>& g_hat, Scalar f_theta,
                                   Scalar probe_epsilon = Scalar(0)) {
  if (samples.size() < 3) throw InsufficientData("build_fit_system: need at least 3 samples");
  FitSystem<Scalar> sys;
  const auto s = static_cast<Eigen::Index>(samples.size());
  sys.design.resize(s, 3);
  sys.targets.resize(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto& smp = samples[static_cast<std::size_t>(i)];
    auto psi = [&](const Vec2<Scalar>& t) {
      return probe_epsilon == Scalar(0) ? monomials(t) : probe_aware_monomials(t, probe_epsilon);
    };
    if (smp.has_reference) {
      sys.design.row(i) = psi(smp.offset) - psi(smp.ref_offset);
      sys.targets[i] = smp.value - smp.ref_value - g_hat.dot(smp.offset - smp.ref_offset);
    } else {
      sys.design.row(i) = psi(smp.offset);
      sys.targets[i] = smp.value - g_hat.dot(smp.offset) - f_theta;
    }
  }
  sys.min_eig_gram = min_eigenvalue(sys.gram());
  return sys;
}

template <typename Scalar>
struct HessianFit {
  Mat2<Scalar> A;
  Eigen::Matrix<Scalar, 3, 1> h;
  bool regularized = false;
};

/// Solves the 3x3 normal equations. Below `gamma_floor` a ridge of
/// ridge_scale * trace(Phi^T Phi) / 3 is added. Empty when the system is
/// singular even after that.
template <typename Scalar>
std::optional<HessianFit<Scalar>> solve_hessian(const FitSystem<Scalar>& sys,
                                                Scalar gamma_floor = Scalar(kGammaFloor),
                                                Scalar ridge_scale = Scalar(kRidgeScale)) {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  Mat3 gram = sys.gram();
  const Eigen::Matrix<Scalar, 3, 1> rhs = sys.design.transpose() * sys.targets;

  HessianFit<Scalar> fit;
  if (!(sys.min_eig_gram >= gamma_floor)) {
    const Scalar ridge = ridge_scale * gram.trace() / Scalar(3);
    if (!(ridge > Scalar(0))) return std::nullopt;
    gram.diagonal().array() += ridge;
    fit.regularized = true;
  }
  Eigen::LDLT<Mat3> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  fit.h = ldlt.solve(rhs);
  if (!fit.h.allFinite()) return std::nullopt;
  fit.A << fit.h[0], fit.h[1], fit.h[1], fit.h[2];
  return fit;
}

// ---------------------------------------------------------------------------
// Finite-difference subspace Hessian (ablation)
// ---------------------------------------------------------------------------

/// Second differences in the plane of `p` reusing the gradient probes.
/// Costs exactly three new queries.
Mat2<double> fd_subspace_hessian(CountedOracle& oracle, const Vector& x, const PairProjection& p,
                                 double epsilon, double f_x, const GradientEstimate& grad);

}  // namespace zosah
