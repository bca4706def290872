#pragma once

#include <optional>
#include <utility>

#include "ledcma/led.hpp"
#include "ledcma/linalg.hpp"
#include "ledcma/rng.hpp"
#include "ledcma/stepsize.hpp"
#include "ledcma/strategy.hpp"

namespace ledcma {

/// Which LED countermeasures are active. The estimator itself always runs so
/// that n_eff_hat can be traced for the plain CMA-ES as well.
enum class Variant {
  Cmaes,               // original CMA-ES
  Led,                 // hyperparameter adaptation + effectiveness-weighted step-size
  HyperparameterOnly,  // ablation: only the hyperparameter adaptation
  NormOnly,            // ablation: only the weighted step-size norms
};

inline bool adapts_hyperparameters(Variant v) { return v == Variant::Led || v == Variant::HyperparameterOnly; }
inline bool weights_norms(Variant v) { return v == Variant::Led || v == Variant::NormOnly; }

struct OptimizerOptions {
  Variant variant = Variant::Cmaes;
  StepSizeMode step_size = StepSizeMode::Csa;
  int lambda = 0;  // 0 selects 4 + floor(3 ln N)
  double sigma0 = 2.0;
  bool warm_eigen = true;
  LedConstants led;
  // Test hook: every standard-normal draw z is replaced by Q z, and Q is taken
  // as the initial eigenbasis of C = I (any orthonormal basis is one). Running
  // on x -> f(Q^T x) with m0 -> Q m0 and this hook reproduces the unrotated run,
  // including the eigenbasis-relative LED state.
  std::optional<Matrix> noise_rotation;
};

struct IterationReport {
  double best_f = 0.0;    // best value among this iteration's samples
  double median_f = 0.0;  // median of this iteration's samples
  bool injected = false;  // TPA points were part of the population
  StepSizeUpdate step;
};

namespace detail {
inline double median_of(Vector values) {
  std::sort(values.data(), values.data() + values.size());
  const Index n = values.size();
  return n % 2 == 1 ? values(n / 2) : 0.5 * (values(n / 2 - 1) + values(n / 2));
}
}  // namespace detail

/// CMA-ES / CMA-ES-LED with CSA or TPA. Holds references to two random
/// streams owned by the caller (sampling noise and TPA length draws), which
/// must outlive the optimizer.
class Optimizer {
 public:
  Optimizer(Vector m0, OptimizerOptions opts, RngStream& sampling, RngStream& tpa)
      : opts_(std::move(opts)), sampling_(&sampling), tpa_rng_(&tpa) {
    const Index n = m0.size();
    if (n < 1) throw ConfigError("initial mean must be non-empty");
    const int lambda = opts_.lambda > 0 ? opts_.lambda : default_lambda(static_cast<int>(n));
    base_params_ = default_params(static_cast<double>(n), lambda, opts_.step_size);
    params_ = base_params_;
    state_ = DistributionState::initial(std::move(m0), opts_.sigma0);
    csa_ = CsaState(n);
    led_ = LedState(n, lambda, opts_.led);
    if (opts_.noise_rotation) {
      if (opts_.noise_rotation->rows() != n || opts_.noise_rotation->cols() != n) {
        throw ConfigError("noise rotation has the wrong dimension");
      }
      state_.eigen.basis = *opts_.noise_rotation;
    }
  }

  /// One generation. `objective` maps a candidate (const Vector&) to a double.
  /// If it throws (e.g. BudgetExhausted) the optimizer state is left unchanged.
  template <class Objective>
  IterationReport step(Objective&& objective) {
    const int lambda = params_.lambda;
    const long t = state_.iteration;

    Population pop = sample_population(state_, lambda, *sampling_);
    if (opts_.noise_rotation) {
      pop.z = *opts_.noise_rotation * pop.z;
      pop.y = state_.sqrt_cov * pop.z;
      pop.x = (state_.sigma * pop.y).colwise() + state_.mean;
    }

    std::optional<TpaPair> pair;
    if (opts_.step_size == StepSizeMode::Tpa) {
      pair = weights_norms(opts_.variant) ? led_tpa_inject(tpa_, state_, led_.v, *tpa_rng_)
                                          : tpa_inject(tpa_, state_, *tpa_rng_);
      if (pair) {
        replace_sample(pop, lambda - 2, pair->plus, state_);
        replace_sample(pop, lambda - 1, pair->minus, state_);
      }
    }

    for (Index k = 0; k < lambda; ++k) {
      const Vector xk = pop.x.col(k);
      pop.f(k) = objective(xk);
    }
    pop.order = rank(pop.f);

    const MeanDirection dir = mean_direction(pop, params_, state_.sigma);
    const Matrix d_mu = rank_mu_direction(pop, params_, state_.cov);
    const RotatedDirections rotated = rotate_directions(dir.delta_m, d_mu, state_.eigen);

    StepSizeUpdate upd;
    if (opts_.step_size == StepSizeMode::Csa) {
      upd = weights_norms(opts_.variant) ? led_csa_update(csa_, dir.z_avg, led_.v, state_.eigen.basis, params_,
                                                        led_.n_eff_hat, t)
                                         : csa_update(csa_, dir.z_avg, params_, t);
    } else {
      std::optional<TpaRanks> ranks;
      if (pair) {
        TpaRanks r;
        for (int i = 0; i < lambda; ++i) {
          if (pop.order[static_cast<std::size_t>(i)] == lambda - 2) r.plus = i + 1;
          if (pop.order[static_cast<std::size_t>(i)] == lambda - 1) r.minus = i + 1;
        }
        ranks = r;
      }
      upd = tpa_update(tpa_, ranks, params_, lambda);
    }

    state_.p_c = update_pc(state_.p_c, dir.delta_m, state_.sigma, upd.h_sigma, params_);
    const Matrix d_one = rank_one_direction(state_.p_c, state_.cov);
    state_.mean = update_mean(state_.mean, dir.delta_m, params_.c_m);
    update_covariance(state_, d_mu, d_one, upd.h_sigma, params_, opts_.warm_eigen);
    state_.sigma = clamp_sigma(state_.sigma * upd.sigma_mult);
    if (opts_.step_size == StepSizeMode::Tpa) tpa_.prev_delta_m = params_.c_m * dir.delta_m;

    led_step(led_, rotated);
    if (adapts_hyperparameters(opts_.variant)) {
      params_ = adapt_hyperparameters(led_.n_eff_hat, base_params_, opts_.step_size);
    }
    ++state_.iteration;

    IterationReport report;
    report.best_f = pop.f(pop.order.front());
    report.median_f = detail::median_of(pop.f);
    report.injected = pair.has_value();
    report.step = upd;
    return report;
  }

  const DistributionState& state() const { return state_; }
  const StrategyParams& params() const { return params_; }
  const StrategyParams& base_params() const { return base_params_; }
  const LedState& led() const { return led_; }
  const CsaState& csa() const { return csa_; }
  const TpaState& tpa() const { return tpa_; }
  const OptimizerOptions& options() const { return opts_; }
  int lambda() const { return params_.lambda; }
  Index dim() const { return state_.dim(); }

 private:
  OptimizerOptions opts_;
  RngStream* sampling_;
  RngStream* tpa_rng_;
  StrategyParams base_params_;
  StrategyParams params_;
  DistributionState state_;
  CsaState csa_;
  TpaState tpa_;
  LedState led_;
};

}  // namespace ledcma
