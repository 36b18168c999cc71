// zosah: run zeroth-order optimizers over seeds and summarize the traces.
//
//   zosah run --alg zosah --obj rosenbrock --evals 2000 --seeds 0-9 --out traces/ros
//   zosah summarize --in traces/ros --grid 100 --out ros_summary.csv
//
// Exit codes: 0 ok, 2 usage error, 3 data error.

#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "zosah/harness.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order optimization benchmark runner"};
  app.require_subcommand(1);

  // Flags are kept as strings so a config file can supply defaults and the
  // command line overrides only what it actually names.
  auto* run = app.add_subcommand("run", "Run one algorithm on one objective for a list of seeds");
  std::string config_path;
  run->add_option("--config", config_path, "Flat key = value file; flags override it");
  const std::vector<std::pair<std::string, std::string>> run_flags = {
      {"alg", "zosah | zosah-diag | zosah-fd | rspg | signsgd | adamm"},
      {"obj", "rosenbrock | logistic:<path> | logistic:synthetic | quadratic-rotated | quadratic:<d>:<cond>:<seed>"},
      {"x0", "zeros | standard-rosenbrock | comma list (default depends on objective)"},
      {"evals", "Query budget per seed"},
      {"seeds", "e.g. 0-9 or 1,5,7"},
      {"m", "Intermediate subspace dimension (even)"},
      {"T", "Subspace switching period"},
      {"eps", "Finite-difference step"},
      {"kappa", "Eigenvalue floor for the Hessian repair"},
      {"hess-radius", "Radius of fresh Hessian samples"},
      {"curvature-correction", "on | off"},
      {"q", "Random directions per baseline gradient estimate"},
      {"features", "Pad a LIBSVM dataset to this many features"},
      {"data-dir", "Root for relative dataset paths (else $ZOSAH_DATA_DIR)"},
      {"out", "Output directory"},
  };
  std::vector<std::pair<std::string, std::string>> run_values(run_flags.size());
  std::vector<CLI::Option*> run_opts;
  for (std::size_t i = 0; i < run_flags.size(); ++i) {
    run_values[i].first = run_flags[i].first;
    run_opts.push_back(run->add_option("--" + run_flags[i].first, run_values[i].second, run_flags[i].second));
  }

  auto* summ = app.add_subcommand("summarize", "Mean/std/min/max of traces on an evaluation grid");
  std::string in_dir, out_path;
  std::uint64_t grid = 100;
  summ->add_option("--in", in_dir, "Directory holding seed_*.csv or combined.csv")->required();
  summ->add_option("--grid", grid, "Checkpoint spacing in evaluations")->capture_default_str();
  summ->add_option("--out", out_path, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) {
      zosah::ExperimentConfig cfg;
      if (!config_path.empty())
        for (const auto& [k, v] : zosah::read_config_file(config_path)) zosah::apply_setting(cfg, k, v);
      for (std::size_t i = 0; i < run_opts.size(); ++i)
        if (run_opts[i]->count() > 0) zosah::apply_setting(cfg, run_values[i].first, run_values[i].second);

      const auto files = zosah::run_experiment(cfg);
      for (const auto& f : files) std::cout << f.string() << '\n';
    } else {
      const auto traces = zosah::read_trace_dir(in_dir);
      const auto rows = zosah::summarize(traces, grid);
      if (out_path.empty()) {
        zosah::write_summary_csv(std::cout, rows);
      } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw zosah::DataError("cannot write " + out_path);
        zosah::write_summary_csv(out, rows);
      }
    }
  } catch (const zosah::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
