#include "zosah/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace zosah {

void LineSearchConfig::validate() const {
  if (!(initial_step > 0.0)) throw std::invalid_argument("line search: initial step must be positive");
  if (!(c1 > 0.0 && c1 < 1.0)) throw std::invalid_argument("line search: c1 must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("line search: shrink must lie in (0, 1)");
  if (!(min_step > 0.0)) throw std::invalid_argument("line search: min step must be positive");
}

LineSearchResult armijo_search(CountedOracle& oracle, const Vector& x, const Vector& v, double f_x,
                               const LineSearchConfig& cfg) {
  LineSearchResult res;
  res.f_new = f_x;
  const double v_norm2 = v.squaredNorm();
  if (!(v_norm2 > 0.0) || !std::isfinite(v_norm2)) return res;

  double rho = cfg.initial_step;
  for (;;) {
    const double trial = oracle(x - rho * v);
    ++res.trials;
    res.step = rho;
    if (std::isfinite(trial) && trial <= f_x - cfg.c1 * rho * v_norm2) {
      res.accepted = true;
      res.f_new = trial;
      return res;
    }
    if (rho < cfg.min_step) return res;
    rho *= cfg.shrink;
  }
}

RunState::RunState(std::shared_ptr<const Objective> objective, Vector x0, std::uint64_t seed_)
    : x(std::move(x0)), oracle(std::move(objective)), rng(seed_), seed(seed_) {
  if (x.size() != oracle.dimension()) throw DimensionMismatch(oracle.dimension(), x.size());
}

void run(Optimizer& opt, RunState& state, std::uint64_t max_evals) {
  if (state.trace.empty()) {
    state.fx = state.oracle(state.x);
    state.append_trace();
  }
  while (state.oracle.count() < max_evals) opt.step(state);
}

Trace run(Optimizer& opt, std::shared_ptr<const Objective> objective, const Vector& x0,
          std::uint64_t max_evals, std::uint64_t seed) {
  RunState state(std::move(objective), x0, seed);
  run(opt, state, max_evals);
  return std::move(state.trace);
}

}  // namespace zosah
