#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "zosah/estimator.hpp"

namespace zosah {

enum class SampleKind { Probe, Fresh, Center };

/// A function value at a point of a pair's plane (absolute plane coordinates).
struct EvalRecord {
  std::int64_t step = 0;
  Vec2<double> subspace_point;
  double value = 0.0;
  SampleKind kind = SampleKind::Probe;
};

class PlanMismatch : public std::logic_error {
  using std::logic_error::logic_error;
};

/// Per-pair evaluation store for the current subspace plan. Holds records of
/// the two most recent steps only and is emptied whenever the plan changes.
class EvalCache {
public:
  void reset(std::int64_t plan_id, std::size_t num_pairs);

  /// Appends records for step k and evicts anything older than k - 2.
  void record(std::int64_t plan_id, std::int64_t k, std::size_t pair,
              std::span<const EvalRecord> records);

  /// Records of `pair` taken at step k with the given kind.
  std::vector<EvalRecord> records(std::size_t pair, std::int64_t k, SampleKind kind) const;
  std::size_t size(std::size_t pair) const;
  std::size_t num_pairs() const { return pairs_.size(); }
  std::int64_t plan_id() const { return plan_id_; }

private:
  std::int64_t plan_id_ = -1;
  std::vector<std::vector<EvalRecord>> pairs_;
};

struct SampleRequest {
  std::vector<FitSample<double>> samples;  // cached, recentred on theta_current
  std::vector<Vec2<double>> fresh_offsets;  // still need evaluating
  bool degraded_conditioning = false;
};

struct FreshSampling {
  double radius = 0.05;
  double gamma_floor = kGammaFloor;
  int max_attempts = 10;
};

/// Three offsets uniform on the circle of the given radius, redrawn until
/// the implied Phi^T Phi clears gamma_floor. Keeps the best draw otherwise.
template <typename Rng>
std::vector<Vec2<double>> sample_circle_offsets(Rng& rng, const FreshSampling& cfg, bool& degraded) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
  std::vector<Vec2<double>> best;
  double best_gamma = -1.0;
  for (int attempt = 0; attempt < std::max(1, cfg.max_attempts); ++attempt) {
    std::vector<Vec2<double>> draw(3);
    for (auto& t : draw) {
      const double a = angle(rng);
      t << cfg.radius * std::cos(a), cfg.radius * std::sin(a);
    }
    const double gamma = design_conditioning<double>(draw);
    if (gamma > best_gamma) {
      best_gamma = gamma;
      best = std::move(draw);
    }
    if (best_gamma >= cfg.gamma_floor) break;
  }
  degraded = !(best_gamma >= cfg.gamma_floor);
  return best;
}

/// Assembles the Hessian-fit sample set for `pair` at step k:
///   k mod T == 0: three fresh offsets, nothing cached;
///   k mod T == 1: the two probes and three fresh samples of step k-1;
///   otherwise   : the gradient probes of steps k-1 and k-2.
/// Falls back to fresh sampling if the cache cannot supply three samples.
///
/// With `reference_centers`, every cached sample is paired with the centre
/// f(x) of the step that produced it. Differencing against that centre
/// cancels the unknown shift from coordinates outside the pair that moved
/// since; it is needed whenever a plan has more than one pair.
template <typename Rng>
SampleRequest gather_samples(const EvalCache& cache, std::int64_t k, std::int64_t T, std::size_t pair,
                             const Vec2<double>& theta_current, Rng& rng, const FreshSampling& cfg,
                             bool reference_centers = false) {
  if (T < 1) throw std::invalid_argument("gather_samples: T must be >= 1");
  SampleRequest req;
  const std::int64_t phase = k % T;

  auto take = [&](std::int64_t step, SampleKind kind) {
    const auto centers = cache.records(pair, step, SampleKind::Center);
    for (const auto& r : cache.records(pair, step, kind)) {
      FitSample<double> s{r.subspace_point - theta_current, r.value};
      if (reference_centers && !centers.empty()) {
        s.has_reference = true;
        s.ref_offset = centers.front().subspace_point - theta_current;
        s.ref_value = centers.front().value;
      }
      req.samples.push_back(s);
    }
  };
  if (phase == 1) {
    take(k - 1, SampleKind::Probe);
    take(k - 1, SampleKind::Fresh);
  } else if (phase != 0) {
    take(k - 2, SampleKind::Probe);
    take(k - 1, SampleKind::Probe);
  }

  if (req.samples.size() < 3) {
    req.samples.clear();
    req.fresh_offsets = sample_circle_offsets(rng, cfg, req.degraded_conditioning);
  }
  return req;
}

}  // namespace zosah
