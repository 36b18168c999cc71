#include "zosah/zosah.hpp"

#include <stdexcept>

namespace zosah {

void ZosahConfig::validate(Index dim) const {
  if (m < 2 || m % 2 != 0 || m > dim)
    throw std::invalid_argument("zosah: m must be even with 2 <= m <= d");
  if (T < 1) throw std::invalid_argument("zosah: T must be >= 1");
  if (!(epsilon > 0.0) || !(kappa > 0.0) || !(hess_radius > 0.0))
    throw std::invalid_argument("zosah: epsilon, kappa and hess_radius must be positive");
  if (!(gamma_floor >= 0.0) || !(ridge_scale >= 0.0))
    throw std::invalid_argument("zosah: gamma_floor and ridge_scale must be non-negative");
  line_search.validate();
}

Index default_subspace_dim(Index d) {
  const Index m = std::min<Index>(d, 20);
  return m - m % 2;
}

ZosahOptimizer::ZosahOptimizer(ZosahConfig cfg) : cfg_(std::move(cfg)) {}

std::string ZosahOptimizer::name() const {
  switch (cfg_.mode) {
    case HessianMode::Fit: return "zosah";
    case HessianMode::Diagonal: return "zosah-diag";
    case HessianMode::FiniteDifference: return "zosah-fd";
  }
  return "zosah";
}

void ZosahOptimizer::step(RunState& state) {
  const Index d = state.oracle.dimension();
  cfg_.validate(d);
  const std::int64_t k = state.step;
  const std::uint64_t start_count = state.oracle.count();

  report_ = {};
  report_.step = k;
  if (k % cfg_.T == 0 || !plan_) {
    plan_ = make_plan(d, cfg_.m, k, state.rng);
    cache_.reset(plan_->id(), plan_->pairs.size());
    report_.new_plan = true;
  }

  const double f_x = state.oracle(state.x);
  const FreshSampling sampling{cfg_.hess_radius, cfg_.gamma_floor, cfg_.max_resamples};

  Vector v = Vector::Zero(d);
  for (std::size_t j = 0; j < plan_->pairs.size(); ++j) {
    const PairProjection& p = plan_->pairs[j];
    PairReport pr;
    pr.pair = p;

    const Vec2<double> theta = project(p, state.x);
    const GradientEstimate grad = estimate_gradient(state.oracle, state.x, p, cfg_.epsilon, f_x);
    pr.g_hat = grad.g_hat;

    std::vector<EvalRecord> new_records;
    for (const auto& probe : grad.probes)
      new_records.push_back({k, probe.point, probe.value, SampleKind::Probe});
    new_records.push_back({k, theta, f_x, SampleKind::Center});

    const std::uint64_t before_hessian = state.oracle.count();
    std::optional<Mat2<double>> A;
    if (cfg_.mode == HessianMode::FiniteDifference) {
      A = fd_subspace_hessian(state.oracle, state.x, p, cfg_.epsilon, f_x, grad);
    } else {
      SampleRequest req = gather_samples(cache_, k, cfg_.T, j, theta, state.rng, sampling, plan_->pairs.size() > 1);
      pr.degraded_conditioning = req.degraded_conditioning;
      for (const auto& offset : req.fresh_offsets) {
        const double value = state.oracle(lift(p, offset, state.x));
        req.samples.push_back({offset, value});
        new_records.push_back({k, theta + offset, value, SampleKind::Fresh});
      }
      pr.fit_samples = req.samples.size();
      const double probe_eps = cfg_.curvature_correction ? cfg_.epsilon : 0.0;
      const auto sys = build_fit_system<double>(req.samples, grad.g_hat, f_x, probe_eps);
      if (const auto fit = solve_hessian(sys, cfg_.gamma_floor, cfg_.ridge_scale)) {
        A = fit->A;
        pr.regularized = fit->regularized;
      }
    }
    pr.hessian_queries = state.oracle.count() - before_hessian;

    pr.g_used = grad.g_hat;
    if (A && A->allFinite()) {
      if (cfg_.curvature_correction) pr.g_used = curvature_corrected_gradient(grad.g_hat, *A, cfg_.epsilon);
      if (cfg_.mode == HessianMode::Diagonal) (*A)(0, 1) = (*A)(1, 0) = 0.0;
      pr.direction = newton_direction(repair_hessian(*A, cfg_.kappa), pr.g_used);
    } else {
      pr.fallback = true;
      pr.direction = pr.g_used / cfg_.kappa;
    }
    v = lift(p, pr.direction, v);

    if (cfg_.mode != HessianMode::FiniteDifference) cache_.record(plan_->id(), k, j, new_records);
    report_.pairs.push_back(pr);
  }

  report_.line_search = armijo_search(state.oracle, state.x, v, f_x, cfg_.line_search);
  if (report_.line_search.accepted) {
    state.x -= report_.line_search.step * v;
    state.fx = report_.line_search.f_new;
  } else {
    // Rejected: stay put. f_x is a fresh evaluation of the same point.
    state.fx = f_x;
  }
  ++state.step;
  report_.queries = state.oracle.count() - start_count;
  state.append_trace();
}

}  // namespace zosah
