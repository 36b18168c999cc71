#include "zosah/baselines.hpp"

#include <stdexcept>

namespace zosah {

void BaselineConfig::validate() const {
  if (q < 1) throw std::invalid_argument("baseline: q must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("baseline: epsilon must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("baseline: beta1 and beta2 must lie in (0, 1)");
  if (!(delta > 0.0)) throw std::invalid_argument("baseline: delta must be positive");
  line_search.validate();
}

Eigen::MatrixXd gaussian_directions(Index d, int q, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd U(d, q);
  for (Index c = 0; c < q; ++c)
    for (Index r = 0; r < d; ++r) U(r, c) = normal(rng);
  return U;
}

Vector rge_gradient(CountedOracle& oracle, const Vector& x, double f_x,
                    const Eigen::Ref<const Eigen::MatrixXd>& directions, double epsilon) {
  if (directions.rows() != x.size()) throw DimensionMismatch(x.size(), directions.rows());
  if (directions.cols() < 1) throw std::invalid_argument("rge_gradient: need at least one direction");
  Vector g = Vector::Zero(x.size());
  for (Index i = 0; i < directions.cols(); ++i) {
    const auto u = directions.col(i);
    g += (oracle(x + epsilon * u) - f_x) / epsilon * u;
  }
  return g / static_cast<double>(directions.cols());
}

Vector rge_gradient(CountedOracle& oracle, const Vector& x, double f_x, int q, double epsilon,
                    std::mt19937_64& rng) {
  return rge_gradient(oracle, x, f_x, gaussian_directions(x.size(), q, rng), epsilon);
}

Vector sign_direction(const Vector& g) {
  return g.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Eigen::MatrixXd fd_full_hessian(CountedOracle& oracle, const Vector& x, double f_x,
                                const Eigen::Ref<const Eigen::MatrixXd>& directions, double epsilon,
                                double lambda_reg) {
  const Index d = x.size();
  if (d > kFullHessianMaxDim) throw std::invalid_argument("fd_full_hessian: dimension above 50");
  if (directions.rows() != d) throw DimensionMismatch(d, directions.rows());
  if (directions.cols() < 1) throw std::invalid_argument("fd_full_hessian: need at least one direction");

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (Index i = 0; i < directions.cols(); ++i) {
    const Vector u = directions.col(i);
    const double curvature =
        (oracle(x + epsilon * u) + oracle(x - epsilon * u) - 2.0 * f_x) / (2.0 * epsilon * epsilon);
    H.noalias() += curvature * u * u.transpose();
  }
  H /= static_cast<double>(directions.cols());
  H.diagonal().array() += lambda_reg;
  // Rank-one sums are symmetric up to rounding; make it exact.
  return 0.5 * (H + H.transpose());
}

Eigen::MatrixXd fd_full_hessian(CountedOracle& oracle, const Vector& x, double f_x, int q,
                                double epsilon, double lambda_reg, std::mt19937_64& rng) {
  return fd_full_hessian(oracle, x, f_x, gaussian_directions(x.size(), q, rng), epsilon, lambda_reg);
}

namespace {

void take_step(RunState& state, const Vector& direction, double f_x, const LineSearchConfig& ls) {
  const auto res = armijo_search(state.oracle, state.x, direction, f_x, ls);
  if (res.accepted) {
    state.x -= res.step * direction;
    state.fx = res.f_new;
  } else {
    state.fx = f_x;
  }
  ++state.step;
  state.append_trace();
}

}  // namespace

void RspgOptimizer::step(RunState& state) {
  cfg_.validate();
  const double f_x = state.oracle(state.x);
  const Vector g = rge_gradient(state.oracle, state.x, f_x, cfg_.q, cfg_.epsilon, state.rng);
  take_step(state, g, f_x, cfg_.line_search);
}

void SignSgdOptimizer::step(RunState& state) {
  cfg_.validate();
  const double f_x = state.oracle(state.x);
  const Vector g = rge_gradient(state.oracle, state.x, f_x, cfg_.q, cfg_.epsilon, state.rng);
  take_step(state, sign_direction(g), f_x, cfg_.line_search);
}

Vector AdammOptimizer::update_moments(const Vector& g) {
  if (m_.size() != g.size()) {
    m_ = Vector::Zero(g.size());
    v_ = Vector::Zero(g.size());
    v_hat_ = Vector::Zero(g.size());
  }
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * g;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
  v_hat_ = v_hat_.cwiseMax(v_);
  return m_.cwiseQuotient((v_hat_.cwiseSqrt().array() + cfg_.delta).matrix());
}

void AdammOptimizer::step(RunState& state) {
  cfg_.validate();
  const double f_x = state.oracle(state.x);
  const Vector g = rge_gradient(state.oracle, state.x, f_x, cfg_.q, cfg_.epsilon, state.rng);
  if (state.step == 0) m_.resize(0);  // new run: start from zero moments
  take_step(state, update_moments(g), f_x, cfg_.line_search);
}

}  // namespace zosah
