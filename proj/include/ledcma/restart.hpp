#pragma once

// Stopping criteria and the IPOP restart driver: run until a criterion fires,
// double lambda, start over from a fresh distribution, until the target is
// reached or the evaluation budget runs out.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "ledcma/error.hpp"
#include "ledcma/objective.hpp"
#include "ledcma/optimizer.hpp"

namespace ledcma {

enum class StopReason { None, MaxIter, TolHistFun, Stagnation, TolX, ConditionCov };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "none";
    case StopReason::MaxIter: return "MaxIter";
    case StopReason::TolHistFun: return "TolHistFun";
    case StopReason::Stagnation: return "Stagnation";
    case StopReason::TolX: return "TolX";
    case StopReason::ConditionCov: return "ConditionCov";
  }
  return "?";
}

struct StopConfig {
  double tol_hist_fun = 1e-12;
  double tol_x_factor = 1e-12;
  double cond_limit = 1e20;
  double stagnation_cap = 20000.0;
  // Read the MaxIter bound as a count of evaluations in the current segment
  // instead of iterations.
  bool maxiter_as_evals = false;
};

/// Per-iteration best and median values of the current segment, newest last.
/// Keeps at most `capacity` entries.
class RunHistory {
 public:
  explicit RunHistory(std::size_t capacity = 20000) : capacity_(std::max<std::size_t>(capacity, 20000)) {}

  void push(double best, double median) {
    best_.push_back(best);
    median_.push_back(median);
    if (best_.size() > capacity_) {
      best_.pop_front();
      median_.pop_front();
    }
  }
  void clear() {
    best_.clear();
    median_.clear();
  }

  std::size_t size() const { return best_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<double>& best() const { return best_; }
  const std::deque<double>& median() const { return median_; }

 private:
  std::size_t capacity_;
  std::deque<double> best_;
  std::deque<double> median_;
};

inline double max_iterations(int n, int lambda) {
  return 100.0 + 50.0 * (n + 3.0) * (n + 3.0) / std::sqrt(static_cast<double>(lambda));
}

inline std::size_t tol_hist_fun_window(int n, int lambda) {
  return 10 + static_cast<std::size_t>(std::ceil(30.0 * n / lambda));
}

inline double stagnation_horizon(long t, int n, int lambda, double cap = 20000.0) {
  return std::max(std::min(0.2 * static_cast<double>(t), cap), 120.0 + 30.0 * n / lambda);
}

namespace detail {
// Median of values[first, first + count); even counts average the middle pair.
inline double window_median(const std::deque<double>& values, std::size_t first, std::size_t count) {
  std::vector<double> w(values.begin() + static_cast<std::ptrdiff_t>(first),
                        values.begin() + static_cast<std::ptrdiff_t>(first + count));
  std::sort(w.begin(), w.end());
  return count % 2 == 1 ? w[count / 2] : 0.5 * (w[count / 2 - 1] + w[count / 2]);
}

inline bool stagnated(const std::deque<double>& values, std::size_t horizon, std::size_t k) {
  const std::size_t start = values.size() - horizon;
  const double oldest = window_median(values, start, k);
  const double newest = window_median(values, values.size() - k, k);
  return newest >= oldest;
}
}  // namespace detail

/// First criterion that fires, in the order MaxIter, TolHistFun, Stagnation,
/// TolX, ConditionCov. `t` counts completed iterations of the current segment,
/// `segment_evals` its evaluations.
inline StopReason check_stop(const DistributionState& state, const StrategyParams& params, const RunHistory& history,
                             long t, double sigma0, const StopConfig& cfg = {}, long segment_evals = 0) {
  const int n = static_cast<int>(state.dim());
  const int lambda = params.lambda;

  const double max_iter = max_iterations(n, lambda);
  const double progress = cfg.maxiter_as_evals ? static_cast<double>(segment_evals) : static_cast<double>(t);
  if (progress > max_iter) return StopReason::MaxIter;

  const std::size_t window = tol_hist_fun_window(n, lambda);
  if (history.size() >= window) {
    const auto first = history.best().end() - static_cast<std::ptrdiff_t>(window);
    const auto [lo, hi] = std::minmax_element(first, history.best().end());
    if (*hi - *lo < cfg.tol_hist_fun) return StopReason::TolHistFun;
  }

  const double horizon = stagnation_horizon(t, n, lambda, cfg.stagnation_cap);
  const auto span = static_cast<std::size_t>(std::ceil(horizon));
  const auto k = static_cast<std::size_t>(std::floor(0.3 * horizon));
  if (k > 0 && history.size() >= span) {
    if (detail::stagnated(history.best(), span, k) && detail::stagnated(history.median(), span, k)) {
      return StopReason::Stagnation;
    }
  }

  const double tol_x = cfg.tol_x_factor * sigma0;
  bool small = true;
  for (Index i = 0; i < n && small; ++i) {
    if (!(state.sigma * std::sqrt(state.cov(i, i)) < tol_x)) small = false;
    if (!(std::abs(state.sigma * state.p_c(i)) < tol_x)) small = false;
  }
  if (small) return StopReason::TolX;

  if (state.eigen.condition > cfg.cond_limit) return StopReason::ConditionCov;
  return StopReason::None;
}

struct RunConfig {
  Variant variant = Variant::Cmaes;
  StepSizeMode step_size = StepSizeMode::Csa;
  bool ipop = true;
  int base_lambda = 0;  // 0 selects 4 + floor(3 ln N)
  double sigma0 = 2.0;
  double init_low = -5.0;
  double init_high = 5.0;
  double target = 1e-8;
  StopConfig stop;
  bool warm_eigen = true;
  LedConstants led;
  // Applied to every objective value before the optimizer sees it. Success is
  // still judged on the untransformed value.
  std::function<double(double)> value_transform;
  // Maps each segment's freshly drawn initial mean, and rotates the sampling
  // noise (see OptimizerOptions::noise_rotation).
  std::function<Vector(const Vector&)> initial_mean_map;
  std::optional<Matrix> noise_rotation;
};

struct SegmentRecord {
  int lambda = 0;
  long iterations = 0;
  long evaluations_at_end = 0;
  StopReason reason = StopReason::None;
};

struct RunOutcome {
  bool success = false;
  long evaluations = 0;  // at the first target hit when successful, else all used
  double best_f = std::numeric_limits<double>::infinity();
  long iterations = 0;
  std::vector<SegmentRecord> segments;
};

/// Called after every completed iteration with (optimizer, segment index,
/// global iteration count, report).
using IterationObserver = std::function<void(const Optimizer&, int, long, const IterationReport&)>;

/// Runs segments until success or budget exhaustion. Without IPOP a fired stop
/// criterion ends the run. The problem's evaluation counter spans all segments.
inline RunOutcome ipop_run(LedProblem& problem, const RunConfig& cfg, RngStream& init_rng, RngStream& sampling,
                           RngStream& tpa, const IterationObserver& observer = {}) {
  const int n = problem.n_total();
  problem.set_target(cfg.target);
  RunOutcome out;
  int lambda = cfg.base_lambda > 0 ? cfg.base_lambda : default_lambda(n);

  // Raw values of the current iteration; the stop criteria look at these so
  // that a value transform cannot change when a segment ends.
  std::vector<double> raw_values;
  auto objective = [&](const Vector& x) {
    const double fx = problem.evaluate(x);
    raw_values.push_back(fx);
    return cfg.value_transform ? cfg.value_transform(fx) : fx;
  };
  auto finish = [&](bool success) {
    out.success = success;
    out.best_f = problem.best_f();
    out.evaluations = success ? *problem.target_hit_at() : problem.eval_count();
    return out;
  };

  for (int segment = 0;; ++segment) {
    Vector m0 = init_rng.uniform_vector(n, cfg.init_low, cfg.init_high);
    if (cfg.initial_mean_map) m0 = cfg.initial_mean_map(m0);

    OptimizerOptions opts;
    opts.variant = cfg.variant;
    opts.step_size = cfg.step_size;
    opts.lambda = lambda;
    opts.sigma0 = cfg.sigma0;
    opts.warm_eigen = cfg.warm_eigen;
    opts.led = cfg.led;
    opts.noise_rotation = cfg.noise_rotation;
    Optimizer opt(std::move(m0), opts, sampling, tpa);

    RunHistory history(static_cast<std::size_t>(std::ceil(stagnation_horizon(0, n, lambda))));
    SegmentRecord seg;
    seg.lambda = lambda;
    const long evals_at_start = problem.eval_count();

    for (;;) {
      IterationReport report;
      raw_values.clear();
      try {
        report = opt.step(objective);
      } catch (const BudgetExhausted&) {
        seg.evaluations_at_end = problem.eval_count();
        out.segments.push_back(seg);
        return finish(problem.target_hit_at().has_value());
      }
      ++seg.iterations;
      ++out.iterations;
      if (observer) observer(opt, segment, out.iterations, report);

      if (problem.target_hit_at()) {
        seg.evaluations_at_end = problem.eval_count();
        out.segments.push_back(seg);
        return finish(true);
      }
      history.push(*std::min_element(raw_values.begin(), raw_values.end()),
                   detail::median_of(Eigen::Map<const Vector>(raw_values.data(), static_cast<Index>(raw_values.size()))));
      seg.reason = check_stop(opt.state(), opt.params(), history, seg.iterations, cfg.sigma0, cfg.stop,
                              problem.eval_count() - evals_at_start);
      if (seg.reason != StopReason::None) break;
    }

    seg.evaluations_at_end = problem.eval_count();
    out.segments.push_back(seg);
    if (!cfg.ipop) return finish(false);
    lambda *= 2;
  }
}

}  // namespace ledcma
