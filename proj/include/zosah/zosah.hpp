#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zosah/cache.hpp"
#include "zosah/estimator.hpp"
#include "zosah/optimizer.hpp"
#include "zosah/subspace.hpp"

namespace zosah {

enum class HessianMode {
  Fit,               // least-squares quadratic fit on cached samples
  Diagonal,          // same fit, off-diagonal entry dropped
  FiniteDifference,  // three extra second-difference queries per pair
};

struct ZosahConfig {
  Index m = 2;            // intermediate subspace dimension, even
  std::int64_t T = 20;    // subspace switching period
  double epsilon = kDefaultEpsilon;
  double kappa = kDefaultKappa;
  double hess_radius = 0.05;
  double gamma_floor = kGammaFloor;
  double ridge_scale = kRidgeScale;
  int max_resamples = 10;
  /// Remove the (eps / 2) diag(A) curvature term from the forward-difference
  /// gradient, using the estimated plane Hessian. Off reproduces the plain
  /// forward-difference estimate, whose fixed point sits O(eps) away from
  /// the minimizer.
  bool curvature_correction = true;
  HessianMode mode = HessianMode::Fit;
  LineSearchConfig line_search;

  void validate(Index dim) const;
};

/// m = min(d, 20) rounded down to even.
Index default_subspace_dim(Index d);

struct PairReport {
  PairProjection pair;
  Vec2<double> g_hat;
  Vec2<double> g_used;           // g_hat, curvature corrected if enabled
  Vec2<double> direction;        // A_bar^{-1} g_hat
  std::uint64_t hessian_queries = 0;
  std::size_t fit_samples = 0;
  bool fallback = false;         // Hessian unavailable, A_bar = kappa I
  bool degraded_conditioning = false;
  bool regularized = false;
};

struct StepReport {
  std::int64_t step = 0;
  bool new_plan = false;
  std::uint64_t queries = 0;
  std::vector<PairReport> pairs;
  LineSearchResult line_search;
};

/// Subspace-based approximate-Hessian zeroth-order optimizer.
///
/// Every T steps a fresh set of m coordinates is drawn and split into m/2
/// disjoint pairs. Each step evaluates f(x) once, then per pair estimates
/// the plane gradient by forward differences and the plane Hessian by a
/// least-squares quadratic fit whose samples come from the evaluation cache
/// (fresh samples are only drawn at the first step of a period). The
/// repaired Newton directions of all pairs are summed into v and an Armijo
/// search along -v decides the step. A rejected search leaves x unchanged.
class ZosahOptimizer final : public Optimizer {
public:
  explicit ZosahOptimizer(ZosahConfig cfg);

  void step(RunState& state) override;
  std::string name() const override;

  const ZosahConfig& config() const { return cfg_; }
  const std::optional<SubspacePlan>& plan() const { return plan_; }
  const EvalCache& cache() const { return cache_; }
  const StepReport& last_report() const { return report_; }

private:
  ZosahConfig cfg_;
  std::optional<SubspacePlan> plan_;
  EvalCache cache_;
  StepReport report_;
};

}  // namespace zosah
