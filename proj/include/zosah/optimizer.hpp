#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "zosah/oracle.hpp"

namespace zosah {

/// One accepted state of a run.
struct TraceRow {
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::uint64_t cum_evals = 0;
  double f_value = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

using Trace = std::vector<TraceRow>;

struct LineSearchConfig {
  double initial_step = 1.0;
  double c1 = 1e-4;
  double shrink = 0.5;
  double min_step = 1e-6;

  void validate() const;
};

struct LineSearchResult {
  double step = 0.0;
  bool accepted = false;
  double f_new = 0.0;
  int trials = 0;
};

/// Backtracks rho = initial, initial*shrink, ... on f(x - rho v) until
/// f(x - rho v) <= f_x - c1 rho |v|^2. The first trial below min_step is
/// still tried; after that the search gives up. Non-finite trial values
/// count as failures. v == 0 costs nothing and is never accepted.
LineSearchResult armijo_search(CountedOracle& oracle, const Vector& x, const Vector& v, double f_x,
                               const LineSearchConfig& cfg);

/// Everything a single seeded run owns.
struct RunState {
  RunState(std::shared_ptr<const Objective> objective, Vector x0, std::uint64_t seed);

  Vector x;
  double fx = 0.0;  // f at x, as last accepted
  std::int64_t step = 0;
  CountedOracle oracle;
  std::mt19937_64 rng;
  std::uint64_t seed;
  Trace trace;

  void append_trace() { trace.push_back({seed, step, oracle.count(), fx}); }
};

class Optimizer {
public:
  virtual ~Optimizer() = default;
  /// One outer iteration. Advances state.step and appends one trace row.
  virtual void step(RunState& state) = 0;
  virtual std::string name() const = 0;
};

/// Evaluates f(x0) for the initial trace row, then steps until the query
/// count reaches max_evals. A step is never cut short, so the final count can
/// overshoot the budget by at most one step's worth of queries.
Trace run(Optimizer& opt, std::shared_ptr<const Objective> objective, const Vector& x0,
          std::uint64_t max_evals, std::uint64_t seed);

/// Same, but leaves the final state accessible.
void run(Optimizer& opt, RunState& state, std::uint64_t max_evals);

}  // namespace zosah
