#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ledcma/restart.hpp"

namespace ledcma {
namespace {

constexpr int kN = 8;
constexpr int kLambda = 10;

DistributionState fresh_state() { return DistributionState::initial(Vector::Zero(kN), 2.0); }
StrategyParams params() { return default_params(kN, kLambda, StepSizeMode::Csa); }

// Alternating values never satisfy TolHistFun (range 1) and never improve.
RunHistory flat_noisy_history(std::size_t count) {
  RunHistory h;
  for (std::size_t i = 0; i < count; ++i) h.push(1.0 + static_cast<double>(i % 2), 5.0 + static_cast<double>(i % 2));
  return h;
}

TEST(StopFormulas, HandValues) {
  EXPECT_NEAR(max_iterations(kN, kLambda), 100.0 + 50.0 * 121.0 / std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(max_iterations(kN, kLambda), 2013.2, 0.05);
  EXPECT_EQ(tol_hist_fun_window(kN, kLambda), 34u);
  EXPECT_DOUBLE_EQ(stagnation_horizon(1000, kN, kLambda), 200.0);
  EXPECT_DOUBLE_EQ(stagnation_horizon(1, kN, kLambda), 144.0);
  EXPECT_DOUBLE_EQ(stagnation_horizon(1000000, kN, kLambda), 20000.0);
}

TEST(CheckStop, FreshRunDoesNotStop) {
  EXPECT_EQ(check_stop(fresh_state(), params(), RunHistory{}, 1, 2.0), StopReason::None);
}

TEST(CheckStop, MaxIterFiresAfterTheBound) {
  const RunHistory h;
  EXPECT_EQ(check_stop(fresh_state(), params(), h, 2013, 2.0), StopReason::None);
  EXPECT_EQ(check_stop(fresh_state(), params(), h, 2014, 2.0), StopReason::MaxIter);
}

TEST(CheckStop, MaxIterCanCountEvaluations) {
  StopConfig cfg;
  cfg.maxiter_as_evals = true;
  const RunHistory h;
  EXPECT_EQ(check_stop(fresh_state(), params(), h, 5000, 2.0, cfg, 2013), StopReason::None);
  EXPECT_EQ(check_stop(fresh_state(), params(), h, 10, 2.0, cfg, 2014), StopReason::MaxIter);
}

TEST(CheckStop, TolHistFunNeedsAFullWindow) {
  RunHistory h;
  h.push(100.0, 100.0);  // outside the window once it is full
  for (int i = 0; i < 33; ++i) h.push(1.0, 1.0);
  EXPECT_EQ(check_stop(fresh_state(), params(), h, 34, 2.0), StopReason::None);
  h.push(1.0, 1.0);
  EXPECT_EQ(check_stop(fresh_state(), params(), h, 35, 2.0), StopReason::TolHistFun);
}

TEST(CheckStop, StagnationComparesOldestAndNewestWindows) {
  // t = 1000 gives a horizon of 200 and windows of 60 iterations.
  EXPECT_EQ(check_stop(fresh_state(), params(), flat_noisy_history(199), 1000, 2.0), StopReason::None);
  EXPECT_EQ(check_stop(fresh_state(), params(), flat_noisy_history(200), 1000, 2.0), StopReason::Stagnation);

  RunHistory improving;
  for (int i = 0; i < 200; ++i) improving.push(1000.0 - i, 2000.0 - i);
  EXPECT_EQ(check_stop(fresh_state(), params(), improving, 1000, 2.0), StopReason::None);

  // Both the best and the median series have to stall.
  RunHistory median_improves;
  for (int i = 0; i < 200; ++i) median_improves.push(1.0 + (i % 2), 2000.0 - i);
  EXPECT_EQ(check_stop(fresh_state(), params(), median_improves, 1000, 2.0), StopReason::None);
}

TEST(CheckStop, TolXAndConditionCov) {
  DistributionState s = fresh_state();
  s.sigma = 1e-13;
  EXPECT_EQ(check_stop(s, params(), RunHistory{}, 5, 2.0), StopReason::TolX);
  s.p_c(3) = 1e3;  // a long evolution path keeps the run alive
  EXPECT_EQ(check_stop(s, params(), RunHistory{}, 5, 2.0), StopReason::None);

  DistributionState c = fresh_state();
  c.eigen.condition = 1e21;
  EXPECT_EQ(check_stop(c, params(), RunHistory{}, 5, 2.0), StopReason::ConditionCov);
}

TEST(CheckStop, OrderOfPrecedence) {
  DistributionState s = fresh_state();
  s.sigma = 1e-13;
  s.eigen.condition = 1e21;
  RunHistory h;
  for (int i = 0; i < 40; ++i) h.push(1.0, 1.0);
  EXPECT_EQ(check_stop(s, params(), h, 2014, 2.0), StopReason::MaxIter);
  EXPECT_EQ(check_stop(s, params(), h, 40, 2.0), StopReason::TolHistFun);
  EXPECT_EQ(check_stop(s, params(), RunHistory{}, 40, 2.0), StopReason::TolX);
}

TEST(RunHistory, KeepsAtMostItsCapacity) {
  RunHistory h(10);
  EXPECT_EQ(h.capacity(), 20000u);
  for (int i = 0; i < 20005; ++i) h.push(i, i);
  EXPECT_EQ(h.size(), 20000u);
  EXPECT_EQ(h.best().front(), 5.0);
}

struct Streams {
  RngStream init{11};
  RngStream sampling{12};
  RngStream tpa{13};
};

LedProblem sphere_problem(int n, long budget) {
  return LedProblem(make_intrinsic(1, n), Matrix::Identity(n, n), budget);
}

TEST(IpopRun, SuccessUsesOneSegment) {
  Streams r;
  LedProblem p = sphere_problem(kN, 100000);
  RunConfig cfg;
  const RunOutcome out = ipop_run(p, cfg, r.init, r.sampling, r.tpa);
  ASSERT_TRUE(out.success);
  ASSERT_EQ(out.segments.size(), 1u);
  EXPECT_EQ(out.segments[0].lambda, kLambda);
  EXPECT_EQ(out.segments[0].reason, StopReason::None);
  EXPECT_LT(out.best_f, 1e-8);
  EXPECT_EQ(out.evaluations, *p.target_hit_at());
  EXPECT_LE(out.evaluations, p.eval_count());
}

TEST(IpopRun, LambdaDoublesAndTheBudgetHolds) {
  Streams r;
  const long budget = 40000;
  LedProblem p = sphere_problem(kN, budget);
  RunConfig cfg;
  cfg.target = -1.0;  // unreachable: every segment ends on a stop criterion
  const RunOutcome out = ipop_run(p, cfg, r.init, r.sampling, r.tpa);
  EXPECT_FALSE(out.success);
  EXPECT_EQ(out.evaluations, budget);
  EXPECT_EQ(p.eval_count(), budget);
  ASSERT_GE(out.segments.size(), 3u);
  int expected = kLambda;
  for (std::size_t i = 0; i < out.segments.size(); ++i) {
    EXPECT_EQ(out.segments[i].lambda, expected);
    expected *= 2;
  }
  for (std::size_t i = 0; i + 1 < out.segments.size(); ++i) {
    EXPECT_NE(out.segments[i].reason, StopReason::None);
    EXPECT_LT(out.segments[i].evaluations_at_end, out.segments[i + 1].evaluations_at_end);
  }
  EXPECT_EQ(out.segments.back().evaluations_at_end, budget);
}

TEST(IpopRun, WithoutRestartAFiredCriterionEndsTheRun) {
  Streams r;
  LedProblem p = sphere_problem(kN, 1000000);
  RunConfig cfg;
  cfg.ipop = false;
  cfg.target = -1.0;
  const RunOutcome out = ipop_run(p, cfg, r.init, r.sampling, r.tpa);
  EXPECT_FALSE(out.success);
  ASSERT_EQ(out.segments.size(), 1u);
  EXPECT_NE(out.segments[0].reason, StopReason::None);
  EXPECT_EQ(out.evaluations, p.eval_count());
  EXPECT_LT(p.eval_count(), 1000000);
}

TEST(IpopRun, ObserverSeesEveryIteration) {
  Streams r;
  LedProblem p = sphere_problem(4, 100000);
  RunConfig cfg;
  long calls = 0;
  long last = 0;
  const RunOutcome out = ipop_run(p, cfg, r.init, r.sampling, r.tpa,
                                  [&](const Optimizer&, int segment, long iteration, const IterationReport&) {
                                    ++calls;
                                    EXPECT_EQ(segment, 0);
                                    EXPECT_EQ(iteration, last + 1);
                                    last = iteration;
                                  });
  EXPECT_EQ(calls, out.iterations);
}

}  // namespace
}  // namespace ledcma
