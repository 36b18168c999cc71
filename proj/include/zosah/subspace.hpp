#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace zosah {

/// Two coordinates of R^d. The implied projection P has rows e_first^T and
/// e_second^T, so P P^T = I.
struct PairProjection {
  Eigen::Index first = 0;
  Eigen::Index second = 0;

  friend bool operator==(const PairProjection&, const PairProjection&) = default;
};

/// Intermediate coordinate subspace V and its partition into disjoint pairs.
/// Immutable once built.
struct SubspacePlan {
  Eigen::Index dim_full = 0;
  std::vector<Eigen::Index> indices;
  std::vector<PairProjection> pairs;
  std::int64_t created_at_step = 0;

  Eigen::Index dim_intermediate() const { return static_cast<Eigen::Index>(indices.size()); }
  /// Plans are created at most once per step, so the step identifies them.
  std::int64_t id() const { return created_at_step; }
};

/// m distinct coordinates of [0, d), uniformly without replacement.
template <typename Rng>
std::vector<Eigen::Index> select_intermediate(Eigen::Index d, Eigen::Index m, Rng& rng) {
  if (m < 2 || m > d || m % 2 != 0)
    throw std::invalid_argument("select_intermediate: need even m with 2 <= m <= d (m=" +
                                std::to_string(m) + ", d=" + std::to_string(d) + ")");
  std::vector<Eigen::Index> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  for (Eigen::Index a = 0; a < m; ++a) {
    std::uniform_int_distribution<Eigen::Index> pick(a, d - 1);
    std::swap(all[a], all[pick(rng)]);
  }
  all.resize(static_cast<std::size_t>(m));
  return all;
}

/// Consumes a random permutation of `indices` two at a time.
template <typename Rng>
std::vector<PairProjection> pair_subspaces(std::vector<Eigen::Index> indices, Rng& rng) {
  if (indices.size() % 2 != 0) throw std::invalid_argument("pair_subspaces: odd number of indices");
  for (std::size_t a = 0; a + 1 < indices.size(); ++a) {
    std::uniform_int_distribution<std::size_t> pick(a, indices.size() - 1);
    std::swap(indices[a], indices[pick(rng)]);
  }
  std::vector<PairProjection> pairs;
  pairs.reserve(indices.size() / 2);
  for (std::size_t a = 0; a < indices.size(); a += 2) pairs.push_back({indices[a], indices[a + 1]});
  return pairs;
}

template <typename Rng>
SubspacePlan make_plan(Eigen::Index d, Eigen::Index m, std::int64_t step, Rng& rng) {
  SubspacePlan plan;
  plan.dim_full = d;
  plan.indices = select_intermediate(d, m, rng);
  plan.pairs = pair_subspaces(plan.indices, rng);
  plan.created_at_step = step;
  return plan;
}

namespace detail {
inline void check_pair(const PairProjection& p, Eigen::Index size) {
  if (p.first < 0 || p.second < 0 || p.first >= size || p.second >= size)
    throw std::out_of_range("pair index outside vector of size " + std::to_string(size));
}
}  // namespace detail

/// theta = P x.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> project(const PairProjection& p,
                                                      const Eigen::MatrixBase<Derived>& x) {
  detail::check_pair(p, x.size());
  return {x[p.first], x[p.second]};
}

/// base + P^T delta: adds a subspace displacement onto the pair's coordinates.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lift(const PairProjection& p,
                                              const Eigen::Matrix<Scalar, 2, 1>& delta,
                                              const Eigen::MatrixBase<Derived>& base) {
  detail::check_pair(p, base.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = base;
  out[p.first] += delta[0];
  out[p.second] += delta[1];
  return out;
}

}  // namespace zosah
