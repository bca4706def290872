#pragma once

// Experiment runner: builds seeded LED problems, runs trials (optionally in
// parallel), aggregates them into the evaluations-per-success-rate statistic
// and reads/writes the CSV files consumed by the plotting script.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ledcma/error.hpp"
#include "ledcma/objective.hpp"
#include "ledcma/restart.hpp"
#include "ledcma/rng.hpp"

namespace ledcma {

inline std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Cmaes: return "cmaes";
    case Variant::Led: return "led";
    case Variant::HyperparameterOnly: return "hp-only";
    case Variant::NormOnly: return "norm-only";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "cmaes") return Variant::Cmaes;
  if (s == "led" || s == "cmaes-led") return Variant::Led;
  if (s == "hp-only") return Variant::HyperparameterOnly;
  if (s == "norm-only") return Variant::NormOnly;
  throw ConfigError("unknown algorithm '" + std::string(s) + "' (expected cmaes|led|hp-only|norm-only)");
}

inline std::string_view step_size_name(StepSizeMode m) { return m == StepSizeMode::Csa ? "csa" : "tpa"; }

inline StepSizeMode parse_step_size(std::string_view s) {
  if (s == "csa") return StepSizeMode::Csa;
  if (s == "tpa") return StepSizeMode::Tpa;
  throw ConfigError("unknown step-size adaptation '" + std::string(s) + "' (expected csa|tpa)");
}

struct ExperimentConfig {
  Variant algo = Variant::Cmaes;
  StepSizeMode stepsize = StepSizeMode::Csa;
  bool ipop = false;
  int fn = 1;
  int dim = 8;
  int eff_dim = 8;
  int trials = 20;
  std::uint64_t seed = 1;
  double budget_multiplier = 1e5;
  int lambda = 0;  // 0 selects 4 + floor(3 ln N)
  std::string out_dir = "out";
  bool no_rotation = false;
  bool trace_led = false;
  int jobs = 1;
  bool maxiter_as_evals = false;

  long budget() const { return static_cast<long>(std::llround(dim * budget_multiplier)); }

  void validate() const {
    make_intrinsic(fn, eff_dim);
    if (dim < eff_dim) {
      throw ConfigError("dim (" + std::to_string(dim) + ") must be at least eff-dim (" + std::to_string(eff_dim) + ")");
    }
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (!(budget_multiplier > 0.0)) throw ConfigError("budget multiplier must be positive");
    if (lambda != 0 && lambda < 4) throw ConfigError("lambda must be at least 4");
  }
};

/// Applies one `key=value` setting. Keys use the CLI flag spelling without the
/// leading dashes (`eff-dim`, `no-rotation`, ...); underscores are accepted too.
inline void apply_setting(ExperimentConfig& cfg, std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '_', '-');
  auto as_bool = [&]() {
    if (value.empty() || value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + value + "'");
  };
  auto as_int = [&]() {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("invalid integer for " + key + ": '" + value + "'");
    }
  };

  if (key == "algo") cfg.algo = parse_variant(value);
  else if (key == "stepsize") cfg.stepsize = parse_step_size(value);
  else if (key == "restart") {
    if (value == "ipop") cfg.ipop = true;
    else if (value == "none") cfg.ipop = false;
    else throw ConfigError("unknown restart strategy '" + value + "' (expected ipop|none)");
  }
  else if (key == "fn") cfg.fn = static_cast<int>(as_int());
  else if (key == "dim") cfg.dim = static_cast<int>(as_int());
  else if (key == "eff-dim") cfg.eff_dim = static_cast<int>(as_int());
  else if (key == "trials") cfg.trials = static_cast<int>(as_int());
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
  else if (key == "budget-mult") {
    try {
      cfg.budget_multiplier = std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("invalid number for budget-mult: '" + value + "'");
    }
  }
  else if (key == "lambda") cfg.lambda = static_cast<int>(as_int());
  else if (key == "out") cfg.out_dir = value;
  else if (key == "no-rotation") cfg.no_rotation = as_bool();
  else if (key == "trace-led") cfg.trace_led = as_bool();
  else if (key == "jobs") cfg.jobs = static_cast<int>(as_int());
  else if (key == "maxiter-as-evals") cfg.maxiter_as_evals = as_bool();
  else throw ConfigError("unknown configuration key '" + key + "'");
}

/// Reads `key=value` lines; blank lines and `#` comments are ignored.
inline void apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      // bare flag, e.g. "no-rotation"
      apply_setting(cfg, line, "");
      continue;
    }
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

struct TraceRow {
  long iteration = 0;
  long evals = 0;
  double best_f = 0.0;
  double sigma = 0.0;
  double neff_hat = 0.0;
  int segment = 0;
};

struct LedTraceRow {
  long iteration = 0;
  int segment = 0;
  int coord = 0;
  double v_snr = 0.0;
  double v = 0.0;
  double alignment = 0.0;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  long evaluations = 0;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<TraceRow> rows;
  std::vector<SegmentRecord> segments;
  std::vector<LedTraceRow> led_rows;  // only with trace_led
};

/// Test hooks forwarded to the run (see RunConfig).
struct TrialHooks {
  std::function<double(double)> value_transform;
  std::function<Vector(const Vector&)> initial_mean_map;
  std::optional<Matrix> noise_rotation;
};

inline std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
}

/// The rotation a trial with this seed uses (identity with no_rotation).
inline Matrix trial_rotation(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.no_rotation) return Matrix::Identity(cfg.dim, cfg.dim);
  RngStream rng(derive_seed(seed, streams::kRotation));
  return random_rotation(cfg.dim, rng);
}

inline RunConfig run_config_for(const ExperimentConfig& cfg) {
  RunConfig rc;
  rc.variant = cfg.algo;
  rc.step_size = cfg.stepsize;
  rc.ipop = cfg.ipop;
  rc.base_lambda = cfg.lambda;
  rc.stop.maxiter_as_evals = cfg.maxiter_as_evals;
  return rc;
}

/// A trial is a pure function of (cfg, seed): same inputs, identical record.
inline TrialRecord run_trial(const ExperimentConfig& cfg, int trial, std::uint64_t seed, const TrialHooks& hooks = {}) {
  cfg.validate();
  LedProblem problem(make_intrinsic(cfg.fn, cfg.eff_dim), trial_rotation(cfg, seed), cfg.budget());

  RunConfig rc = run_config_for(cfg);
  rc.value_transform = hooks.value_transform;
  rc.initial_mean_map = hooks.initial_mean_map;
  rc.noise_rotation = hooks.noise_rotation;

  RngStream init_rng(derive_seed(seed, streams::kInitialMean));
  RngStream sampling(derive_seed(seed, streams::kSampling));
  RngStream tpa(derive_seed(seed, streams::kTpa));

  TrialRecord rec;
  rec.trial = trial;
  rec.seed = seed;
  auto observer = [&](const Optimizer& opt, int segment, long iteration, const IterationReport&) {
    rec.rows.push_back(TraceRow{iteration, problem.eval_count(), problem.best_f(), opt.state().sigma,
                                opt.led().n_eff_hat, segment});
    if (cfg.trace_led) {
      const Vector align = effective_alignment_norms(problem, opt.state().eigen.basis);
      for (Index i = 0; i < opt.dim(); ++i) {
        rec.led_rows.push_back(LedTraceRow{iteration, segment, static_cast<int>(i), opt.led().v_snr(i),
                                           opt.led().v(i), align(i)});
      }
    }
  };
  const RunOutcome outcome = ipop_run(problem, rc, init_rng, sampling, tpa, observer);
  rec.success = outcome.success;
  rec.evaluations = outcome.evaluations;
  rec.best_f = outcome.best_f;
  rec.segments = outcome.segments;
  return rec;
}

/// All trials of a configuration, run on up to cfg.jobs threads. The result is
/// ordered by trial index regardless of scheduling.
inline std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(records.size());
  auto worker = [&]() {
    for (int i = next++; i < cfg.trials; i = next++) {
      try {
        records[static_cast<std::size_t>(i)] = run_trial(cfg, i, trial_seed(cfg, i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int workers = std::min(cfg.jobs, cfg.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

/// Median with the mean-of-central-pair convention.
inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Quantile by linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct Summary {
  Variant algo = Variant::Cmaes;
  StepSizeMode stepsize = StepSizeMode::Csa;
  bool ipop = false;
  int fn = 1;
  int dim = 0;
  int eff_dim = 0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  // Over successful trials only; absent when no trial succeeded.
  std::optional<double> median_evals;
  std::optional<double> q1_evals;
  std::optional<double> q3_evals;
  std::optional<double> evals_per_success_rate;  // median_evals / success_rate
};

inline Summary summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  Summary s;
  s.algo = cfg.algo;
  s.stepsize = cfg.stepsize;
  s.ipop = cfg.ipop;
  s.fn = cfg.fn;
  s.dim = cfg.dim;
  s.eff_dim = cfg.eff_dim;
  s.trials = static_cast<int>(records.size());
  std::vector<double> evals;
  for (const auto& r : records) {
    if (r.success) evals.push_back(static_cast<double>(r.evaluations));
  }
  s.successes = static_cast<int>(evals.size());
  s.success_rate = s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
  if (!evals.empty()) {
    s.median_evals = median(evals);
    s.q1_evals = quantile(evals, 0.25);
    s.q3_evals = quantile(evals, 0.75);
    s.evals_per_success_rate = *s.median_evals / s.success_rate;
  }
  return s;
}

namespace detail {
inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

inline void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
}
}  // namespace detail

inline constexpr std::string_view kTraceHeader = "trial,seed,iteration,evals,best_f,sigma,neff_hat,segment";
inline constexpr std::string_view kSummaryHeader =
    "algo,stepsize,restart,fn,dim,eff_dim,n_red,trials,successes,success_rate,median_evals,q1_evals,q3_evals,"
    "evals_per_success_rate";
inline constexpr std::string_view kLedTraceHeader = "trial,iteration,segment,coord,v_snr,v,alignment";
inline constexpr std::string_view kSegmentHeader = "trial,segment,lambda,iterations,evals_at_end,stop_reason";

inline void write_trace_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    for (const auto& row : r.rows) {
      out << r.trial << ',' << r.seed << ',' << row.iteration << ',' << row.evals << ',' << row.best_f << ','
          << row.sigma << ',' << row.neff_hat << ',' << row.segment << '\n';
    }
  }
  detail::check_written(out, path);
}

inline void write_led_trace_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << kLedTraceHeader << '\n';
  for (const auto& r : records) {
    for (const auto& row : r.led_rows) {
      out << r.trial << ',' << row.iteration << ',' << row.segment << ',' << row.coord << ',' << row.v_snr << ','
          << row.v << ',' << row.alignment << '\n';
    }
  }
  detail::check_written(out, path);
}

/// One row per restart segment with the criterion that ended it ("none" when
/// the segment ended on success or budget exhaustion).
inline void write_segments_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << kSegmentHeader << '\n';
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.segments.size(); ++i) {
      const auto& seg = r.segments[i];
      out << r.trial << ',' << i << ',' << seg.lambda << ',' << seg.iterations << ',' << seg.evaluations_at_end << ','
          << to_string(seg.reason) << '\n';
    }
  }
  detail::check_written(out, path);
}

inline void write_summary_csv(const std::vector<Summary>& summaries, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << kSummaryHeader << '\n';
  auto opt = [](const std::optional<double>& v) {
    std::ostringstream s;
    s << std::setprecision(17);
    if (v) s << *v;
    return s.str();
  };
  for (const auto& s : summaries) {
    out << variant_name(s.algo) << ',' << step_size_name(s.stepsize) << ',' << (s.ipop ? "ipop" : "none") << ','
        << s.fn << ',' << s.dim << ',' << s.eff_dim << ',' << (s.dim - s.eff_dim) << ',' << s.trials << ','
        << s.successes << ',' << s.success_rate << ',' << opt(s.median_evals) << ',' << opt(s.q1_evals) << ','
        << opt(s.q3_evals) << ',' << opt(s.evals_per_success_rate) << '\n';
  }
  detail::check_written(out, path);
}

/// One parsed row of trace.csv.
struct TraceCsvRow {
  int trial = 0;
  std::uint64_t seed = 0;
  TraceRow row;
};

inline std::vector<TraceCsvRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error("'" + path.string() + "' does not start with the trace header");
  }
  std::vector<TraceCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw std::runtime_error("malformed trace row: " + line);
    TraceCsvRow r;
    r.trial = std::stoi(cells[0]);
    r.seed = std::stoull(cells[1]);
    r.row.iteration = std::stol(cells[2]);
    r.row.evals = std::stol(cells[3]);
    r.row.best_f = std::strtod(cells[4].c_str(), nullptr);
    r.row.sigma = std::strtod(cells[5].c_str(), nullptr);
    r.row.neff_hat = std::strtod(cells[6].c_str(), nullptr);
    r.row.segment = std::stoi(cells[7]);
    rows.push_back(r);
  }
  return rows;
}

struct ExperimentResult {
  std::vector<TrialRecord> records;
  Summary summary;
};

/// Runs every trial of `cfg` and, when `write_files` is set, writes trace.csv,
/// summary.csv, segments.csv (and led_trace.csv with trace_led) into cfg.out_dir.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true) {
  ExperimentResult result;
  result.records = run_trials(cfg);
  result.summary = summarize(cfg, result.records);
  if (write_files) {
    const std::filesystem::path dir(cfg.out_dir);
    write_trace_csv(result.records, dir / "trace.csv");
    write_summary_csv({result.summary}, dir / "summary.csv");
    write_segments_csv(result.records, dir / "segments.csv");
    if (cfg.trace_led) write_led_trace_csv(result.records, dir / "led_trace.csv");
  }
  return result;
}

}  // namespace ledcma
