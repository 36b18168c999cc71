#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "zosah/estimator.hpp"

using namespace zosah;
using M2 = Eigen::Matrix2d;
using V2 = Eigen::Vector2d;

namespace {

std::shared_ptr<const Objective> fn(Index d, FunctionObjective::Fn f) {
  return std::make_shared<FunctionObjective>(d, std::move(f));
}

M2 random_symmetric(std::mt19937_64& rng, double scale = 5.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  M2 A;
  A(0, 0) = u(rng);
  A(1, 1) = u(rng);
  A(0, 1) = A(1, 0) = u(rng);
  return A;
}

// Random symmetric matrix with condition number (|max| / |min| eigenvalue) in [1, 100].
M2 random_conditioned(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double angle = 2.0 * M_PI * u(rng);
  const double l1 = std::pow(10.0, 2.0 * u(rng) - 1.0);
  const double l2 = l1 / std::pow(100.0, u(rng)) * (u(rng) < 0.3 ? -1.0 : 1.0);
  M2 R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  M2 A = R * V2(l1, l2).asDiagonal() * R.transpose();
  A(1, 0) = A(0, 1);
  return A;
}

// Least squares for h in f(t) - g^T t - f0 = 1/2 h0 t1^2 + h1 t1 t2 + 1/2 h2 t2^2,
// solved by complete orthogonal decomposition on the raw design.
Eigen::Vector3d dense_lstsq(const std::vector<V2>& ts, const std::vector<double>& q) {
  Eigen::MatrixXd Phi(static_cast<Index>(ts.size()), 3);
  Eigen::VectorXd rhs(static_cast<Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto r = static_cast<Index>(i);
    Phi(r, 0) = ts[i][0] * ts[i][0] / 2.0;
    Phi(r, 1) = ts[i][0] * ts[i][1];
    Phi(r, 2) = ts[i][1] * ts[i][1] / 2.0;
    rhs[r] = q[i];
  }
  return Phi.completeOrthogonalDecomposition().solve(rhs);
}

std::vector<FitSample<double>> samples_from(const M2& A, const std::vector<V2>& ts) {
  std::vector<FitSample<double>> s;
  for (const auto& t : ts) s.push_back({t, 0.5 * t.dot(A * t)});
  return s;
}

}  // namespace

TEST(EstimateGradient, ExactOnAffine) {
  auto obj = fn(4, [](const Eigen::Ref<const Vector>& x) { return 3.0 * x[1] + 2.0 * x[3] - 7.0 + x[0]; });
  CountedOracle f(obj);
  const Vector x{{0.5, -1.0, 2.0, 4.0}};
  for (double eps : {1e-3, 0.25, 1.0}) {
    const auto before = f.count();
    const auto est = estimate_gradient(f, x, {1, 3}, eps, f(x));
    EXPECT_EQ(f.count() - before, 3u);  // one for f(x) above, two probes
    EXPECT_NEAR(est.g_hat[0], 3.0, 1e-12);
    EXPECT_NEAR(est.g_hat[1], 2.0, 1e-12);
  }
}

TEST(EstimateGradient, ForwardDifferenceOfSquare) {
  CountedOracle f(fn(2, [](const Eigen::Ref<const Vector>& x) { return x[0] * x[0]; }));
  const Vector x{{1.0, 0.0}};
  const auto est = estimate_gradient(f, x, {0, 1}, 1e-3, 1.0);
  EXPECT_EQ(f.count(), 2u);
  EXPECT_NEAR(est.g_hat[0], 2.001, 1e-10);
  EXPECT_NEAR(est.g_hat[1], 0.0, 1e-15);
  EXPECT_EQ(est.probes[0].point, V2(1.001, 0.0));
  EXPECT_EQ(est.probes[1].point, V2(1.0, 1e-3));
}

TEST(EstimateGradient, ErrorBoundOnQuadratics) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<Index> dim(2, 8);
  std::uniform_real_distribution<double> eps_dist(1e-4, 1e-1);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index d = dim(rng);
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(d, d);
    const Eigen::MatrixXd A = 0.5 * (B + B.transpose()) * 4.0;
    const Vector b = Vector::Random(d);
    const double C1 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().cwiseAbs().maxCoeff();
    auto obj = std::make_shared<QuadraticObjective>(A, b, 0.3);
    CountedOracle f(obj);
    const Vector x = Vector::Random(d);
    std::uniform_int_distribution<Index> coord(0, d - 1);
    const Index i = coord(rng);
    Index j = coord(rng);
    while (j == i) j = coord(rng);
    const double eps = eps_dist(rng);
    const auto est = estimate_gradient(f, x, {i, j}, eps, obj->value(x));
    const Vector grad = obj->gradient(x);
    const double err = (est.g_hat - V2(grad[i], grad[j])).norm();
    ASSERT_LE(err, eps / std::sqrt(2.0) * C1 + 1e-12) << "trial " << trial;
  }
}

TEST(Eig2x2, RotatedMatrix) {
  const auto e = eig2x2<double>(M2{{5.5, 4.5}, {4.5, 5.5}});
  EXPECT_NEAR(e.values[0], 10.0, 1e-12);
  EXPECT_NEAR(e.values[1], 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors.col(0).dot(V2(1, 1) / std::sqrt(2.0))), 1.0, 1e-12);
}

TEST(Eig2x2, Identity) {
  const auto e = eig2x2<double>(M2::Identity());
  EXPECT_EQ(e.values, V2(1, 1));
  EXPECT_NEAR((e.vectors.transpose() * e.vectors - M2::Identity()).norm(), 0.0, 1e-15);
}

TEST(Eig2x2, IndefiniteDiagonal) {
  const auto e = eig2x2<double>(M2{{-1, 0}, {0, 1}});
  EXPECT_EQ(e.values.cwiseAbs(), V2(1, 1));
  EXPECT_EQ(e.values, V2(1, -1));  // equal magnitudes: larger signed value first
  EXPECT_EQ(e.vectors.col(0).cwiseAbs(), V2(0, 1));
  EXPECT_EQ(e.vectors.col(1).cwiseAbs(), V2(1, 0));
}

TEST(Eig2x2, ReconstructsAndMatchesEigen) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const M2 A = random_symmetric(rng);
    const auto e = eig2x2(A);
    ASSERT_LE((e.reconstruct() - A).norm(), 1e-10);
    ASSERT_GE(std::abs(e.values[0]), std::abs(e.values[1]));
    ASSERT_NEAR((e.vectors.transpose() * e.vectors - M2::Identity()).norm(), 0.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<M2> ref(A);
    V2 got = e.values;
    std::sort(got.data(), got.data() + 2);
    ASSERT_NEAR((got - ref.eigenvalues()).norm(), 0.0, 1e-12);
  }
}

TEST(Eig2x2, TinyOffDiagonal) {
  const M2 A{{2.0, 1e-30}, {1e-30, 1.0}};
  const auto e = eig2x2(A);
  EXPECT_LE((e.reconstruct() - A).norm(), 1e-15);
}

TEST(MakePd, KnownCases) {
  EXPECT_EQ(make_pd<double>(M2{{-1, 0}, {0, 1}}, 0.1), M2::Identity());
  EXPECT_EQ(make_pd<double>(M2{{0.05, 0}, {0, 2}}, 0.1), (M2{{0.1, 0}, {0, 2}}));
}

TEST(MakePd, LeavesWellConditionedMatrixAlone) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    M2 B = random_symmetric(rng, 2.0);
    const M2 A = B * B.transpose() + 0.2 * M2::Identity();
    EXPECT_EQ(make_pd(A, 0.1), A);
  }
}

TEST(MakePd, AlwaysPositiveDefinite) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const M2 A = random_symmetric(rng);
    const M2 Abar = make_pd(A, 0.1);
    const auto e = Eigen::SelfAdjointEigenSolver<M2>(Abar).eigenvalues();
    ASSERT_GE(e.minCoeff(), 0.1 - 1e-12);
    const V2 x = V2::Random();
    ASSERT_GE(x.dot(Abar * x), 0.1 * x.squaredNorm() * (1 - 1e-12));
  }
}

TEST(MakePd, RejectsNonPositiveKappa) {
  EXPECT_THROW(make_pd<double>(M2::Identity(), 0.0), std::invalid_argument);
}

TEST(NewtonDirection, KnownCases) {
  EXPECT_LE((newton_direction<double>(M2{{10, 0}, {0, 1}}, V2(10, 1)) - V2(1, 1)).norm(), 1e-15);
  EXPECT_EQ(newton_direction<double>(M2::Identity(), V2(0.3, -2)), V2(0.3, -2));
  EXPECT_THROW(newton_direction<double>(M2{{1, 0}, {0, -1}}, V2(1, 1)), std::invalid_argument);
}

TEST(NewtonDirection, DescentForAnyRepairedMatrix) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const M2 A = random_symmetric(rng);
    V2 g = V2::Random();
    if (g.isZero()) g = V2(1, 0);
    const auto h = repair_hessian(A, 0.1);
    ASSERT_GT(g.dot(newton_direction(h, g)), 0.0);
    ASSERT_LE((newton_direction(h, g) - newton_direction(h.repaired(), g)).norm(), 1e-9 * (1 + g.norm() * 10));
  }
}

TEST(BuildFitSystem, DesignRows) {
  const std::vector<FitSample<double>> s = {{V2(1, 0), 0.0}, {V2(0, 1), 0.0}, {V2(1, 1), 0.0}};
  const auto sys = build_fit_system<double>(s, V2::Zero(), 0.0);
  Eigen::Matrix3d expect;
  expect << .5, 0, 0, 0, 0, .5, .5, 1, .5;
  EXPECT_EQ(Eigen::Matrix3d(sys.design), expect);
}

TEST(BuildFitSystem, DegenerateSamplesFlagged) {
  const std::vector<FitSample<double>> s(3, {V2::Zero(), 1.0});
  const auto sys = build_fit_system<double>(s, V2::Zero(), 1.0);
  EXPECT_TRUE(sys.design.isZero());
  EXPECT_EQ(sys.min_eig_gram, 0.0);
}

TEST(BuildFitSystem, NeedsThreeSamples) {
  const std::vector<FitSample<double>> s(2, {V2(1, 0), 1.0});
  EXPECT_THROW(build_fit_system<double>(s, V2::Zero(), 0.0), InsufficientData);
}

TEST(BuildFitSystem, TargetsAreQuadraticForms) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const M2 A = random_symmetric(rng);
    const V2 b = V2::Random();
    const double c = 0.7;
    std::vector<FitSample<double>> s;
    std::vector<V2> ts;
    for (int i = 0; i < 4; ++i) {
      ts.push_back(V2::Random());
      s.push_back({ts.back(), 0.5 * ts.back().dot(A * ts.back()) + b.dot(ts.back()) + c});
    }
    const auto sys = build_fit_system<double>(s, b, c);
    for (int i = 0; i < 4; ++i) ASSERT_NEAR(sys.targets[i], 0.5 * ts[static_cast<std::size_t>(i)].dot(A * ts[static_cast<std::size_t>(i)]), 1e-12);
  }
}

TEST(SolveHessian, RecoversSmallExample) {
  const M2 A{{2, 1}, {1, 3}};
  const std::vector<V2> ts = {V2(1, 0), V2(0, 1), V2(1, 1)};
  const auto sys = build_fit_system<double>(samples_from(A, ts), V2::Zero(), 0.0);
  EXPECT_EQ(sys.targets, Eigen::Vector3d(1, 1.5, 3.5));
  const auto fit = solve_hessian(sys);
  ASSERT_TRUE(fit);
  EXPECT_FALSE(fit->regularized);
  // The 3x3 system by hand: h0/2 = 1, h2/2 = 1.5, h0/2 + h1 + h2/2 = 3.5.
  EXPECT_LE((fit->h - Eigen::Vector3d(2, 1, 3)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((fit->A - A).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SolveHessian, ZeroTargetsGiveZero) {
  const std::vector<FitSample<double>> s = {{V2(1, 0), 0.0}, {V2(0, 1), 0.0}, {V2(1, 1), 0.0}};
  const auto fit = solve_hessian(build_fit_system<double>(s, V2::Zero(), 0.0));
  ASSERT_TRUE(fit);
  EXPECT_TRUE(fit->A.isZero());
}

TEST(SolveHessian, RidgeOnlyBelowFloor) {
  const std::vector<FitSample<double>> s = {{V2(1, 0), 0.5}, {V2(2, 0), 2.0}, {V2(3, 0), 4.5}};
  const auto sys = build_fit_system<double>(s, V2::Zero(), 0.0);
  EXPECT_LT(sys.min_eig_gram, 1e-10);
  const auto fit = solve_hessian(sys);
  ASSERT_TRUE(fit);
  EXPECT_TRUE(fit->regularized);
  EXPECT_NEAR(fit->A(0, 0), 1.0, 1e-6);

  const std::vector<FitSample<double>> none(3, {V2::Zero(), 0.0});
  EXPECT_FALSE(solve_hessian(build_fit_system<double>(none, V2::Zero(), 0.0)));
}

TEST(SolveHessian, MatchesDenseLeastSquares) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const M2 A = random_conditioned(rng);
    std::vector<V2> ts;
    const double a0 = angle(rng);
    for (int i = 0; i < 4; ++i) ts.push_back(0.05 * V2(std::cos(a0 + i * M_PI / 4), std::sin(a0 + i * M_PI / 4)));
    const auto sys = build_fit_system<double>(samples_from(A, ts), V2::Zero(), 0.0);
    if (sys.min_eig_gram < 1e-6 * 0.05 * 0.05 * 0.05 * 0.05) continue;
    ++checked;
    const auto fit = solve_hessian(sys);
    ASSERT_TRUE(fit);
    std::vector<double> q;
    for (const auto& t : ts) q.push_back(0.5 * t.dot(A * t));
    const Eigen::Vector3d h = dense_lstsq(ts, q);
    ASSERT_LE((fit->h - h).cwiseAbs().maxCoeff(), 1e-8);
    ASSERT_LE((fit->A - A).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_GT(checked, 900);
}

TEST(SolveHessian, ProbeAwareFitExactWithForwardGradient) {
  // With the forward-difference gradient (biased by eps/2 diag(A)) the
  // probe-aware design still recovers A exactly on quadratics.
  std::mt19937_64 rng(44);
  const double eps = 1e-3;
  for (int trial = 0; trial < 200; ++trial) {
    const M2 A = random_conditioned(rng);
    const V2 g_true = V2::Random();
    const V2 g_hat = g_true + 0.5 * eps * A.diagonal();
    std::vector<FitSample<double>> s;
    for (const V2& t : {V2(0.05, 0.01), V2(-0.02, 0.04), V2(0.03, -0.05), V2(-0.04, -0.03)})
      s.push_back({t, 0.5 * t.dot(A * t) + g_true.dot(t)});
    const auto fit = solve_hessian(build_fit_system<double>(s, g_hat, 0.0, eps));
    ASSERT_TRUE(fit);
    ASSERT_LE((fit->A - A).cwiseAbs().maxCoeff(), 1e-7);
    ASSERT_LE((curvature_corrected_gradient(g_hat, fit->A, eps) - g_true).norm(), 1e-9);
  }
}

TEST(SolveHessian, ReferencedSamplesCancelOffset) {
  // Each sample carries its own unknown constant shift, cancelled by its reference.
  const M2 A{{3, -1}, {-1, 2}};
  const V2 g(0.4, -0.2);
  auto f = [&](const V2& t) { return 0.5 * t.dot(A * t) + g.dot(t); };
  std::vector<FitSample<double>> s;
  const std::vector<std::pair<V2, V2>> pts = {{V2(0.1, 0), V2(0, 0)}, {V2(0.2, 0.1), V2(0.1, 0.1)},
                                              {V2(-0.1, 0.2), V2(-0.1, 0.1)}, {V2(0.05, -0.1), V2(0.05, -0.05)}};
  double shift = 1.0;
  for (const auto& [p, r] : pts) {
    FitSample<double> smp{p, f(p) + shift, true, r, f(r) + shift};
    s.push_back(smp);
    shift *= -3.0;
  }
  const auto fit = solve_hessian(build_fit_system<double>(s, g, 123.0));
  ASSERT_TRUE(fit);
  EXPECT_LE((fit->A - A).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FdSubspaceHessian, ExactOnQuadratic) {
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, -2, 1, 3, 0.5, -2, 0.5, 6;
  auto obj = std::make_shared<QuadraticObjective>(A, Vector{{1, -1, 0.5}}, 2.0);
  CountedOracle f(obj);
  const Vector x{{0.3, 0.1, -0.4}};
  const double fx = f(x);
  const PairProjection p{2, 0};
  const auto grad = estimate_gradient(f, x, p, 1e-3, fx);
  const auto before = f.count();
  const M2 H = fd_subspace_hessian(f, x, p, 1e-3, fx, grad);
  EXPECT_EQ(f.count() - before, 3u);
  EXPECT_LE((H - M2{{6, -2}, {-2, 4}}).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_EQ(H(0, 1), H(1, 0));
}

TEST(FdSubspaceHessian, ZeroOnAffine) {
  CountedOracle f(fn(2, [](const Eigen::Ref<const Vector>& x) { return 2.0 * x[0] - x[1] + 5.0; }));
  const Vector x{{1.0, 2.0}};
  const double fx = f(x);
  const auto grad = estimate_gradient(f, x, {0, 1}, 0.5, fx);
  EXPECT_LE(fd_subspace_hessian(f, x, {0, 1}, 0.5, fx, grad).cwiseAbs().maxCoeff(), 1e-14);
}
