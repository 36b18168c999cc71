#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zosah/baselines.hpp"
#include "zosah/optimizer.hpp"
#include "zosah/zosah.hpp"

namespace zosah {

/// Bad ids, malformed flags, invalid settings. Maps to exit code 2.
class UsageError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or malformed input data. Maps to exit code 3.
class DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Environment variable naming the directory that relative dataset paths
/// are resolved against.
inline constexpr const char* kDataDirEnv = "ZOSAH_DATA_DIR";

struct ExperimentConfig {
  std::string algorithm = "zosah";  // zosah | zosah-diag | zosah-fd | rspg | signsgd | adamm
  // rosenbrock | logistic:<path> | logistic:synthetic | quadratic-rotated
  // | quadratic:<d>:<cond>:<seed>
  std::string objective = "rosenbrock";
  // zeros | standard-rosenbrock | comma separated values | empty for the
  // objective's usual start: (-1.2, 1) on rosenbrock, zeros elsewhere.
  std::string x0;
  std::uint64_t max_evals = 2000;
  std::vector<std::uint64_t> seeds{0};

  std::optional<Index> m;  // default min(d, 20), rounded down to even
  std::int64_t T = 20;
  double epsilon = kDefaultEpsilon;
  double kappa = kDefaultKappa;
  double hess_radius = 0.05;
  bool curvature_correction = true;
  int q = 10;
  std::optional<Index> features;  // pad a LIBSVM file to this many columns

  std::filesystem::path out_dir = "traces";
  std::filesystem::path data_dir;  // empty: taken from ZOSAH_DATA_DIR

  void validate() const;
};

/// Applies one `key = value` setting; keys match the long CLI flag names
/// (alg, obj, x0, evals, seeds, m, T, eps, kappa, hess-radius, q, out, ...).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat `key = value` file; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// "0,1,2", "0-9" and mixtures like "0-4,7".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

std::shared_ptr<const Objective> make_objective(const ExperimentConfig& cfg);
Vector make_start(const ExperimentConfig& cfg, Index dim);
std::unique_ptr<Optimizer> make_optimizer(const ExperimentConfig& cfg, Index dim);

/// One trace per seed, in the order of cfg.seeds. Seeds run concurrently,
/// each with its own oracle and generator, so the result does not depend on
/// scheduling.
std::vector<Trace> run_seeds(const ExperimentConfig& cfg, std::shared_ptr<const Objective> objective);

/// run_seeds, then seed_<s>.csv per seed plus combined.csv under out_dir.
/// Returns the files written, combined last.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg);

void write_trace_csv(std::ostream& out, const Trace& trace, bool header = true);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(std::istream& in, const std::string& source = "<stream>");
Trace read_trace_csv(const std::filesystem::path& path);

/// Per-seed traces found in dir: seed_*.csv, or combined.csv split by seed.
std::vector<Trace> read_trace_dir(const std::filesystem::path& dir);

struct SummaryRow {
  std::uint64_t evals = 0;
  std::size_t seeds = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single seed
  double min = 0.0;
  double max = 0.0;
};

/// Checkpoints at grid, 2 grid, ... up to the largest cum_evals seen (or
/// max_evals if given). Each seed contributes its last value with
/// cum_evals <= checkpoint; checkpoints that precede any seed's first row
/// are skipped.
std::vector<SummaryRow> summarize(const std::vector<Trace>& traces, std::uint64_t grid,
                                  std::optional<std::uint64_t> max_evals = {});
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Value of a trace at a given budget (step-function), if any row qualifies.
std::optional<double> value_at(const Trace& trace, std::uint64_t evals);

/// First cum_evals at which f_value < target, if reached.
std::optional<std::uint64_t> evals_to_target(const Trace& trace, double target);

}  // namespace zosah
