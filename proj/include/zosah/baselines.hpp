#pragma once

#include <random>
#include <string>

#include <Eigen/Dense>

#include "zosah/optimizer.hpp"

namespace zosah {

struct BaselineConfig {
  int q = 10;  // random directions per gradient estimate
  double epsilon = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.5;
  double delta = 1e-8;
  LineSearchConfig line_search;

  void validate() const;
};

/// (1/q) sum_i (f(x + eps u_i) - f(x)) / eps * u_i over the columns u_i of
/// `directions`. Costs one query per column.
Vector rge_gradient(CountedOracle& oracle, const Vector& x, double f_x,
                    const Eigen::Ref<const Eigen::MatrixXd>& directions, double epsilon);

/// Same with q standard-normal directions drawn from rng.
Vector rge_gradient(CountedOracle& oracle, const Vector& x, double f_x, int q, double epsilon,
                    std::mt19937_64& rng);

Eigen::MatrixXd gaussian_directions(Index d, int q, std::mt19937_64& rng);

/// Componentwise sign, with sign(0) = 0.
Vector sign_direction(const Vector& g);

inline constexpr Index kFullHessianMaxDim = 50;

/// (1/q) sum_i (f(x + eps u_i) + f(x - eps u_i) - 2 f(x)) / (2 eps^2) u_i u_i^T
/// + lambda I. Reference estimator for small d only; 2q queries.
Eigen::MatrixXd fd_full_hessian(CountedOracle& oracle, const Vector& x, double f_x,
                                const Eigen::Ref<const Eigen::MatrixXd>& directions, double epsilon,
                                double lambda_reg);
Eigen::MatrixXd fd_full_hessian(CountedOracle& oracle, const Vector& x, double f_x, int q,
                                double epsilon, double lambda_reg, std::mt19937_64& rng);

/// Randomized gradient descent: step along -rge_gradient.
class RspgOptimizer final : public Optimizer {
public:
  explicit RspgOptimizer(BaselineConfig cfg) : cfg_(std::move(cfg)) {}
  void step(RunState& state) override;
  std::string name() const override { return "rspg"; }

private:
  BaselineConfig cfg_;
};

/// Step along -sign(rge_gradient).
class SignSgdOptimizer final : public Optimizer {
public:
  explicit SignSgdOptimizer(BaselineConfig cfg) : cfg_(std::move(cfg)) {}
  void step(RunState& state) override;
  std::string name() const override { return "signsgd"; }

private:
  BaselineConfig cfg_;
};

/// Adaptive momentum on rge_gradient with a max-stabilized second moment.
/// Moments update every step, whether or not the line search accepts.
class AdammOptimizer final : public Optimizer {
public:
  explicit AdammOptimizer(BaselineConfig cfg) : cfg_(std::move(cfg)) {}
  void step(RunState& state) override;
  std::string name() const override { return "adamm"; }

  /// Direction m / (sqrt(v_hat) + delta) after folding g into the moments.
  Vector update_moments(const Vector& g);

  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }
  const Vector& max_second_moment() const { return v_hat_; }

private:
  BaselineConfig cfg_;
  Vector m_, v_, v_hat_;
};

}  // namespace zosah
