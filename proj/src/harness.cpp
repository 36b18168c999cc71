#include "zosah/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

namespace zosah {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw UsageError("invalid value '" + text + "' for " + key);
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw UsageError("invalid value '" + text + "' for " + key);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_rosenbrock(const std::string& id) { return id == "rosenbrock"; }

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> algorithms = {"zosah", "zosah-diag", "zosah-fd", "rspg", "signsgd", "adamm"};
  if (std::find(algorithms.begin(), algorithms.end(), algorithm) == algorithms.end())
    throw UsageError("unknown algorithm '" + algorithm + "'");
  if (seeds.empty()) throw UsageError("seeds must be non-empty");
  if (max_evals == 0) throw UsageError("evals must be positive");
  if (m && (*m < 2 || *m % 2 != 0)) throw UsageError("m must be even and >= 2");
  if (T < 1) throw UsageError("T must be >= 1");
  if (!(epsilon > 0.0) || !(kappa > 0.0) || !(hess_radius > 0.0))
    throw UsageError("eps, kappa and hess-radius must be positive");
  if (q < 1) throw UsageError("q must be >= 1");
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  if (key == "alg" || key == "algorithm") cfg.algorithm = trim(value);
  else if (key == "obj" || key == "objective") cfg.objective = trim(value);
  else if (key == "x0") cfg.x0 = trim(value);
  else if (key == "evals" || key == "max_evals") cfg.max_evals = parse_number<std::uint64_t>(key, value);
  else if (key == "seeds") cfg.seeds = parse_seed_list(value);
  else if (key == "m") cfg.m = parse_number<Index>(key, value);
  else if (key == "T") cfg.T = parse_number<std::int64_t>(key, value);
  else if (key == "eps" || key == "epsilon") cfg.epsilon = parse_number<double>(key, value);
  else if (key == "kappa") cfg.kappa = parse_number<double>(key, value);
  else if (key == "hess-radius" || key == "hess_radius") cfg.hess_radius = parse_number<double>(key, value);
  else if (key == "curvature-correction" || key == "curvature_correction") cfg.curvature_correction = parse_bool(key, value);
  else if (key == "q") cfg.q = parse_number<int>(key, value);
  else if (key == "features") cfg.features = parse_number<Index>(key, value);
  else if (key == "out") cfg.out_dir = trim(value);
  else if (key == "data-dir" || key == "data_dir") cfg.data_dir = trim(value);
  else throw UsageError("unknown setting '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw UsageError("empty entry in seed list '" + text + "'");
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_number<std::uint64_t>("seeds", item));
      continue;
    }
    const auto lo = parse_number<std::uint64_t>("seeds", item.substr(0, dash));
    const auto hi = parse_number<std::uint64_t>("seeds", item.substr(dash + 1));
    if (hi < lo) throw UsageError("descending seed range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw UsageError("seeds must be non-empty");
  return seeds;
}

std::shared_ptr<const Objective> make_objective(const ExperimentConfig& cfg) {
  const std::string& id = cfg.objective;
  if (is_rosenbrock(id)) return std::make_shared<RosenbrockObjective>();
  if (id == "quadratic-rotated") {
    Eigen::MatrixXd A(2, 2);
    A << 5.5, 4.5, 4.5, 5.5;
    return std::make_shared<QuadraticObjective>(A);
  }
  if (id.rfind("quadratic:", 0) == 0) {
    const auto parts = split(id.substr(10), ':');
    if (parts.size() != 3) throw UsageError("expected quadratic:<d>:<cond>:<seed>, got '" + id + "'");
    const auto d = parse_number<Index>("quadratic d", parts[0]);
    const auto cond = parse_number<double>("quadratic cond", parts[1]);
    const auto seed = parse_number<std::uint64_t>("quadratic seed", parts[2]);
    if (d < 1 || !(cond >= 1.0)) throw UsageError("quadratic needs d >= 1 and cond >= 1");
    return std::make_shared<QuadraticObjective>(random_spd_matrix(d, cond, seed));
  }
  if (id.rfind("logistic:", 0) == 0) {
    const std::string where = id.substr(9);
    if (where.empty()) throw UsageError("logistic objective needs a path");
    if (where == "synthetic")
      return std::make_shared<LogisticObjective>(std::make_shared<const Dataset>(make_synthetic_dataset()));
    std::filesystem::path path(where);
    if (path.is_relative()) {
      std::filesystem::path root = cfg.data_dir;
      if (root.empty())
        if (const char* env = std::getenv(kDataDirEnv)) root = env;
      if (!root.empty()) path = root / path;
    }
    try {
      auto data = std::make_shared<const Dataset>(load_libsvm(path, cfg.features));
      if (data->size() == 0) throw DataError(path.string() + ": no examples");
      return std::make_shared<LogisticObjective>(std::move(data));
    } catch (const ParseError& e) {
      throw DataError(e.what());
    }
  }
  throw UsageError("unknown objective '" + id + "'");
}

Vector make_start(const ExperimentConfig& cfg, Index dim) {
  const std::string& policy = cfg.x0;
  if (policy.empty()) {
    if (is_rosenbrock(cfg.objective)) return Vector{{-1.2, 1.0}};
    return Vector::Zero(dim);
  }
  if (policy == "zeros") return Vector::Zero(dim);
  if (policy == "standard-rosenbrock") {
    if (dim != 2) throw UsageError("standard-rosenbrock start needs d = 2");
    return Vector{{-1.2, 1.0}};
  }
  const auto items = split(policy, ',');
  if (static_cast<Index>(items.size()) != dim)
    throw UsageError("x0 has " + std::to_string(items.size()) + " entries, objective has d = " + std::to_string(dim));
  Vector x(dim);
  for (Index i = 0; i < dim; ++i) x[i] = parse_number<double>("x0", items[static_cast<std::size_t>(i)]);
  return x;
}

std::unique_ptr<Optimizer> make_optimizer(const ExperimentConfig& cfg, Index dim) {
  if (cfg.algorithm.rfind("zosah", 0) == 0) {
    ZosahConfig z;
    z.m = cfg.m.value_or(default_subspace_dim(dim));
    z.T = cfg.T;
    z.epsilon = cfg.epsilon;
    z.kappa = cfg.kappa;
    z.hess_radius = cfg.hess_radius;
    z.curvature_correction = cfg.curvature_correction;
    if (cfg.algorithm == "zosah-diag") z.mode = HessianMode::Diagonal;
    else if (cfg.algorithm == "zosah-fd") z.mode = HessianMode::FiniteDifference;
    else if (cfg.algorithm != "zosah") throw UsageError("unknown algorithm '" + cfg.algorithm + "'");
    try {
      z.validate(dim);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return std::make_unique<ZosahOptimizer>(z);
  }
  BaselineConfig b;
  b.q = cfg.q;
  b.epsilon = cfg.epsilon;
  if (cfg.algorithm == "rspg") return std::make_unique<RspgOptimizer>(b);
  if (cfg.algorithm == "signsgd") return std::make_unique<SignSgdOptimizer>(b);
  if (cfg.algorithm == "adamm") return std::make_unique<AdammOptimizer>(b);
  throw UsageError("unknown algorithm '" + cfg.algorithm + "'");
}

std::vector<Trace> run_seeds(const ExperimentConfig& cfg, std::shared_ptr<const Objective> objective) {
  cfg.validate();
  const Index d = objective->dimension();
  const Vector x0 = make_start(cfg, d);
  make_optimizer(cfg, d);  // surface config errors before spawning anything

  std::vector<std::future<Trace>> jobs;
  for (const auto seed : cfg.seeds) {
    jobs.push_back(std::async(std::launch::async, [&cfg, objective, x0, d, seed] {
      auto opt = make_optimizer(cfg, d);
      return run(*opt, objective, x0, cfg.max_evals, seed);
    }));
  }
  std::vector<Trace> traces;
  for (auto& j : jobs) traces.push_back(j.get());
  return traces;
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto traces = run_seeds(cfg, make_objective(cfg));

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw DataError("cannot create " + cfg.out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  Trace combined;
  for (const auto& t : traces) {
    const auto path = cfg.out_dir / ("seed_" + std::to_string(t.front().seed) + ".csv");
    write_trace_csv(path, t);
    written.push_back(path);
    combined.insert(combined.end(), t.begin(), t.end());
  }
  const auto path = cfg.out_dir / "combined.csv";
  write_trace_csv(path, combined);
  written.push_back(path);
  return written;
}

void write_trace_csv(std::ostream& out, const Trace& trace, bool header) {
  if (header) out << "seed,step,cum_evals,f_value\n";
  for (const auto& r : trace)
    out << r.seed << ',' << r.step << ',' << r.cum_evals << ',' << format_double(r.f_value) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_trace_csv(out, trace);
  if (!out) throw DataError("write failed: " + path.string());
}

Trace read_trace_csv(std::istream& in, const std::string& source) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "seed,step,cum_evals,f_value") throw DataError(source + ":1: unexpected header");
      continue;
    }
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 4) throw DataError(source + ":" + std::to_string(line_no) + ": expected 4 columns");
    try {
      TraceRow r;
      r.seed = parse_number<std::uint64_t>("seed", cells[0]);
      r.step = parse_number<std::int64_t>("step", cells[1]);
      r.cum_evals = parse_number<std::uint64_t>("cum_evals", cells[2]);
      r.f_value = std::stod(cells[3]);
      trace.push_back(r);
    } catch (const std::exception&) {
      throw DataError(source + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  if (line_no == 0) throw DataError(source + ": empty file");
  return trace;
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_trace_csv(in, path.string());
}

std::vector<Trace> read_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("seed_", 0) == 0 && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  }
  if (files.empty() && std::filesystem::exists(dir / "combined.csv")) files.push_back(dir / "combined.csv");
  if (files.empty()) throw DataError("no trace files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::map<std::uint64_t, Trace> by_seed;
  for (const auto& f : files)
    for (const auto& r : read_trace_csv(f)) by_seed[r.seed].push_back(r);
  std::vector<Trace> traces;
  for (auto& [seed, t] : by_seed) traces.push_back(std::move(t));
  return traces;
}

std::optional<double> value_at(const Trace& trace, std::uint64_t evals) {
  // Rows are in cum_evals order; take the last one not past the checkpoint.
  const auto it = std::upper_bound(trace.begin(), trace.end(), evals,
                                   [](std::uint64_t e, const TraceRow& r) { return e < r.cum_evals; });
  if (it == trace.begin()) return std::nullopt;
  return std::prev(it)->f_value;
}

std::optional<std::uint64_t> evals_to_target(const Trace& trace, double target) {
  for (const auto& r : trace)
    if (r.f_value < target) return r.cum_evals;
  return std::nullopt;
}

std::vector<SummaryRow> summarize(const std::vector<Trace>& traces, std::uint64_t grid,
                                  std::optional<std::uint64_t> max_evals) {
  if (traces.empty()) throw DataError("summarize: no traces");
  if (grid == 0) throw UsageError("grid must be positive");
  std::uint64_t last = 0;
  for (const auto& t : traces)
    if (!t.empty()) last = std::max(last, t.back().cum_evals);
  last = max_evals.value_or(last);

  std::vector<SummaryRow> rows;
  for (std::uint64_t c = grid; c <= last; c += grid) {
    std::vector<double> vals;
    for (const auto& t : traces) {
      const auto v = value_at(t, c);
      if (!v) break;
      vals.push_back(*v);
    }
    if (vals.size() != traces.size()) continue;

    SummaryRow row;
    row.evals = c;
    row.seeds = vals.size();
    double sum = 0.0;
    for (double v : vals) sum += v;
    row.mean = sum / static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - row.mean) * (v - row.mean);
    row.std = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
    row.min = *std::min_element(vals.begin(), vals.end());
    row.max = *std::max_element(vals.begin(), vals.end());
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "evals,seeds,mean,std,min,max\n";
  for (const auto& r : rows)
    out << r.evals << ',' << r.seeds << ',' << format_double(r.mean) << ',' << format_double(r.std) << ','
        << format_double(r.min) << ',' << format_double(r.max) << '\n';
}

}  // namespace zosah
