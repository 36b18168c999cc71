#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace zosah {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class DimensionMismatch : public std::invalid_argument {
public:
  DimensionMismatch(Index expected, Index got);
};

/// Black-box objective f: R^d -> R. Implementations must be deterministic
/// and safe to evaluate concurrently.
class Objective {
public:
  virtual ~Objective() = default;
  virtual Index dimension() const = 0;
  virtual double value(const Eigen::Ref<const Vector>& x) const = 0;
};

/// Meters every evaluation of an objective. Not thread-safe: each run owns
/// its own oracle.
class CountedOracle {
public:
  explicit CountedOracle(std::shared_ptr<const Objective> inner);

  /// Throws DimensionMismatch (count untouched) if x has the wrong size.
  double evaluate(const Eigen::Ref<const Vector>& x);
  double operator()(const Eigen::Ref<const Vector>& x) { return evaluate(x); }

  std::uint64_t count() const { return count_; }
  Index dimension() const { return inner_->dimension(); }
  const Objective& objective() const { return *inner_; }

private:
  std::shared_ptr<const Objective> inner_;
  std::uint64_t count_ = 0;
};

template <typename Scalar>
Scalar rosenbrock(Scalar x, Scalar y) {
  const Scalar a = x - Scalar(1);
  const Scalar b = y - x * x;
  return a * a + Scalar(100) * b * b;
}

/// 1/2 t^T A t + b^T t + c. A is assumed symmetric.
template <typename Scalar>
Scalar quadratic_model(const Eigen::Matrix<Scalar, 2, 2>& A,
                       const Eigen::Matrix<Scalar, 2, 1>& b, Scalar c,
                       const Eigen::Matrix<Scalar, 2, 1>& theta) {
  return Scalar(0.5) * theta.dot(A * theta) + b.dot(theta) + c;
}

/// Numerically stable ln(1 + e^t).
inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

class RosenbrockObjective final : public Objective {
public:
  Index dimension() const override { return 2; }
  double value(const Eigen::Ref<const Vector>& x) const override {
    return rosenbrock(x[0], x[1]);
  }
};

/// 1/2 x^T A x + b^T x + c on R^d.
class QuadraticObjective final : public Objective {
public:
  QuadraticObjective(Eigen::MatrixXd A, Vector b, double c = 0.0);
  explicit QuadraticObjective(Eigen::MatrixXd A);

  Index dimension() const override { return A_.rows(); }
  double value(const Eigen::Ref<const Vector>& x) const override;

  const Eigen::MatrixXd& hessian() const { return A_; }
  Vector gradient(const Eigen::Ref<const Vector>& x) const { return A_ * x + b_; }

private:
  Eigen::MatrixXd A_;
  Vector b_;
  double c_;
};

/// Adapts any callable; used mostly by tests.
class FunctionObjective final : public Objective {
public:
  using Fn = std::function<double(const Eigen::Ref<const Vector>&)>;
  FunctionObjective(Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}

  Index dimension() const override { return dim_; }
  double value(const Eigen::Ref<const Vector>& x) const override { return fn_(x); }

private:
  Index dim_;
  Fn fn_;
};

/// Sparse binary-classification data with labels in {-1, +1}.
struct Dataset {
  Eigen::SparseMatrix<double, Eigen::RowMajor> features;  // N x d
  Vector labels;                                          // N

  Index size() const { return features.rows(); }
  Index dimension() const { return features.cols(); }
};

/// Mean logistic loss (1/N) sum ln(1 + exp(-y_i z_i^T x)).
double logistic_loss(const Dataset& data, const Eigen::Ref<const Vector>& x);

class LogisticObjective final : public Objective {
public:
  explicit LogisticObjective(std::shared_ptr<const Dataset> data);

  Index dimension() const override { return data_->dimension(); }
  double value(const Eigen::Ref<const Vector>& x) const override;

  const Dataset& data() const { return *data_; }

private:
  std::shared_ptr<const Dataset> data_;
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// LIBSVM sparse text: `label idx:val ...`, 1-based indices. Labels {0, 1}
/// map to {-1, +1}. The dimension is the largest index seen, or
/// `expected_dim` when that is larger.
Dataset load_libsvm(std::istream& in, std::optional<Index> expected_dim = {},
                    const std::string& source = "<stream>");
Dataset load_libsvm(const std::filesystem::path& path,
                    std::optional<Index> expected_dim = {});

/// a3a-shaped stand-in: 14 categorical attributes one-hot encoded into 123
/// binary features (exactly one active per attribute), Zipf-distributed
/// category frequencies, labels drawn from a planted logistic model.
struct SyntheticSpec {
  Index examples = 3186;
  std::vector<Index> group_sizes = {5, 8, 5, 16, 5, 7, 14, 6, 5, 2, 2, 2, 5, 41};
  double zipf_exponent = 1.2;
  double weight_scale = 1.0;
  std::uint64_t seed = 20250101;

  Index features() const;
};
Dataset make_synthetic_dataset(const SyntheticSpec& spec = {});

/// Q diag(lambda) Q^T with Q Haar-random orthogonal and log-uniform
/// eigenvalues spanning [1, condition].
Eigen::MatrixXd random_spd_matrix(Index d, double condition, std::uint64_t seed);

}  // namespace zosah
