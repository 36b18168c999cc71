#include "zosah/oracle.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>
#include <vector>

namespace zosah {

DimensionMismatch::DimensionMismatch(Index expected, Index got)
    : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                            ", got " + std::to_string(got)) {}

CountedOracle::CountedOracle(std::shared_ptr<const Objective> inner) : inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("CountedOracle: null objective");
}

double CountedOracle::evaluate(const Eigen::Ref<const Vector>& x) {
  if (x.size() != inner_->dimension()) throw DimensionMismatch(inner_->dimension(), x.size());
  ++count_;
  return inner_->value(x);
}

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd A, Vector b, double c)
    : A_(std::move(A)), b_(std::move(b)), c_(c) {
  if (A_.rows() != A_.cols() || b_.size() != A_.rows())
    throw std::invalid_argument("QuadraticObjective: inconsistent shapes");
}

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd A)
    : QuadraticObjective(A, Vector::Zero(A.rows()), 0.0) {}

double QuadraticObjective::value(const Eigen::Ref<const Vector>& x) const {
  return 0.5 * x.dot(A_ * x) + b_.dot(x) + c_;
}

double logistic_loss(const Dataset& data, const Eigen::Ref<const Vector>& x) {
  if (data.size() == 0) throw std::invalid_argument("logistic_loss: empty dataset");
  if (x.size() != data.dimension()) throw DimensionMismatch(data.dimension(), x.size());

  const Vector margins = data.labels.cwiseProduct(data.features * x);
  // Neumaier summation keeps the x = 0 case at exactly ln 2.
  double sum = 0.0;
  double comp = 0.0;
  for (Index i = 0; i < margins.size(); ++i) {
    const double term = softplus(-margins[i]);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(data.size());
}

LogisticObjective::LogisticObjective(std::shared_ptr<const Dataset> data) : data_(std::move(data)) {
  if (!data_ || data_->size() == 0) throw std::invalid_argument("LogisticObjective: empty dataset");
}

double LogisticObjective::value(const Eigen::Ref<const Vector>& x) const {
  return logistic_loss(*data_, x);
}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool parse_double(std::string_view s, double& out) {
  // from_chars rejects a leading '+', which LIBSVM labels commonly carry.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset load_libsvm(std::istream& in, std::optional<Index> expected_dim, const std::string& source) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  std::vector<double> labels;
  Index max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<long long> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;  // blank line

    double label = 0.0;
    if (!parse_double(tok, label)) throw ParseError(source, line_no, "non-numeric label '" + tok + "'");
    if (label == 0.0) {
      label = -1.0;
    } else if (label != 1.0 && label != -1.0) {
      throw ParseError(source, line_no, "label '" + tok + "' outside {0, 1, -1, +1}");
    }

    const auto row = static_cast<Index>(labels.size());
    seen.clear();
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError(source, line_no, "expected idx:val, got '" + tok + "'");
      long long idx = 0;
      double val = 0.0;
      if (!parse_index(std::string_view(tok).substr(0, colon), idx))
        throw ParseError(source, line_no, "non-numeric index in '" + tok + "'");
      if (idx < 1) throw ParseError(source, line_no, "index < 1 in '" + tok + "'");
      if (!parse_double(std::string_view(tok).substr(colon + 1), val))
        throw ParseError(source, line_no, "non-numeric value in '" + tok + "'");
      if (!seen.insert(idx).second)
        throw ParseError(source, line_no, "duplicate index " + std::to_string(idx));
      triplets.emplace_back(row, static_cast<Index>(idx - 1), val);
      max_index = std::max<Index>(max_index, static_cast<Index>(idx));
    }
    labels.push_back(label);
  }

  const Index dim = std::max(max_index, expected_dim.value_or(0));
  Dataset data;
  data.features.resize(static_cast<Index>(labels.size()), dim);
  data.features.setFromTriplets(triplets.begin(), triplets.end());
  data.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  return data;
}

Dataset load_libsvm(const std::filesystem::path& path, std::optional<Index> expected_dim) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return load_libsvm(in, expected_dim, path.string());
}

Index SyntheticSpec::features() const {
  return std::accumulate(group_sizes.begin(), group_sizes.end(), Index{0});
}

Dataset make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.examples < 1 || spec.group_sizes.empty() ||
      std::any_of(spec.group_sizes.begin(), spec.group_sizes.end(), [](Index g) { return g < 1; }))
    throw std::invalid_argument("make_synthetic_dataset: bad shape");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;

  const Index d = spec.features();
  Vector planted(d);
  for (Index j = 0; j < d; ++j) planted[j] = spec.weight_scale * normal(rng);

  std::vector<std::discrete_distribution<Index>> categories;
  for (const Index g : spec.group_sizes) {
    std::vector<double> w(static_cast<std::size_t>(g));
    for (Index r = 0; r < g; ++r) w[static_cast<std::size_t>(r)] = std::pow(r + 1.0, -spec.zipf_exponent);
    std::shuffle(w.begin(), w.end(), rng);
    categories.emplace_back(w.begin(), w.end());
  }

  std::vector<Eigen::Triplet<double>> triplets;
  Vector labels(spec.examples);
  for (Index i = 0; i < spec.examples; ++i) {
    Index offset = 0;
    double score = 0.0;
    for (std::size_t g = 0; g < categories.size(); ++g) {
      const Index col = offset + categories[g](rng);
      triplets.emplace_back(i, col, 1.0);
      score += planted[col];
      offset += spec.group_sizes[g];
    }
    labels[i] = unit(rng) < 1.0 / (1.0 + std::exp(-score)) ? 1.0 : -1.0;
  }

  Dataset data;
  data.features.resize(spec.examples, d);
  data.features.setFromTriplets(triplets.begin(), triplets.end());
  data.labels = std::move(labels);
  return data;
}

Eigen::MatrixXd random_spd_matrix(Index d, double condition, std::uint64_t seed) {
  if (d < 1 || !(condition >= 1.0)) throw std::invalid_argument("random_spd_matrix: bad arguments");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd G(d, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) G(r, c) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  // Sign-fix against R's diagonal so Q is Haar distributed.
  const Vector r_diag = qr.matrixQR().diagonal();
  for (Index c = 0; c < d; ++c)
    if (r_diag[c] < 0.0) Q.col(c) = -Q.col(c);

  Vector lambda(d);
  for (Index i = 0; i < d; ++i)
    lambda[i] = d == 1 ? 1.0 : std::pow(condition, static_cast<double>(i) / static_cast<double>(d - 1));
  Eigen::MatrixXd A = Q * lambda.asDiagonal() * Q.transpose();
  return 0.5 * (A + A.transpose());
}

}  // namespace zosah
