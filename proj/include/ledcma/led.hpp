#pragma once

// Estimator of effective dimensions. Update directions of the mean and of the
// rank-mu covariance step are rotated into the covariance eigenbasis; the sign
// of each rotated coordinate is smoothed over time, and the ratio s^2 / gamma of
// the smoothed sign to its smoothed square estimates a per-coordinate
// signal-to-noise ratio v_snr. A sigmoid with adaptive threshold and gain maps
// v_snr to an effectiveness v in [0, 1], and sum(v) replaces N in the default
// hyperparameter formulas.

#include <algorithm>
#include <cmath>

#include "ledcma/linalg.hpp"
#include "ledcma/strategy.hpp"

namespace ledcma {

struct LedConstants {
  double beta = 0.01;  // smoothing factor of the accumulators
  // threshold regression (a1 + a2 ln N)(a3 + a4 / sqrt(lambda))
  double a1 = 0.106;
  double a2 = 0.0776;
  double a3 = 0.0665;
  double a4 = 0.947;
  // log10 of the sigmoid gain spans [g_min, g_max] as max(v_snr) spans [0, 1]
  double g_min = -2.0;
  double g_max = 3.0;
};

struct LedState {
  Vector s_m, gamma_m;
  Vector s_c, gamma_c;
  Vector v_snr;
  Vector v;
  double n_eff_hat = 0.0;
  double xi_thresh = 0.0;
  double xi_gain = 0.0;
  LedConstants constants;

  LedState() = default;
  LedState(Index n, int lambda, LedConstants c = {});
};

struct RotatedDirections {
  Vector delta_m_bar;  // B^T delta_m
  Vector delta_c_bar;  // diag(B^T dC_mu B)
};

/// `eigen` must be the eigenpair used for sampling in this iteration.
inline RotatedDirections rotate_directions(const Vector& delta_m, const Matrix& delta_mu_c, const EigenPair& eigen) {
  const Matrix& b = eigen.basis;
  RotatedDirections out;
  out.delta_m_bar = b.transpose() * delta_m;
  out.delta_c_bar = (delta_mu_c * b).cwiseProduct(b).colwise().sum().transpose();
  return out;
}

namespace detail {
inline double sign_or_zero(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

/// Accumulates sign(delta) into s and the constant 1 into gamma.
inline void update_accumulators(LedState& st, const RotatedDirections& dirs) {
  const double beta = st.constants.beta;
  const double keep = 1.0 - beta;
  const double gain = beta * (2.0 - beta);
  const double root_gain = std::sqrt(gain);
  for (Index i = 0; i < st.s_m.size(); ++i) {
    st.s_m(i) = keep * st.s_m(i) + root_gain * detail::sign_or_zero(dirs.delta_m_bar(i));
    st.gamma_m(i) = keep * keep * st.gamma_m(i) + gain;
    st.s_c(i) = keep * st.s_c(i) + root_gain * detail::sign_or_zero(dirs.delta_c_bar(i));
    st.gamma_c(i) = keep * keep * st.gamma_c(i) + gain;
  }
}

/// (beta / (2 - beta)) * max(s_m^2 / gamma_m, s_C^2 / gamma_C), elementwise.
/// Requires at least one accumulator update.
inline Vector snr_estimate(const LedState& st) {
  const double beta = st.constants.beta;
  const double scale = beta / (2.0 - beta);
  const Vector from_mean = st.s_m.cwiseProduct(st.s_m).cwiseQuotient(st.gamma_m);
  const Vector from_cov = st.s_c.cwiseProduct(st.s_c).cwiseQuotient(st.gamma_c);
  return scale * from_mean.cwiseMax(from_cov);
}

inline double xi_thresh(int n, int lambda, const LedConstants& c = {}) {
  return (c.a1 + c.a2 * std::log(static_cast<double>(n))) * (c.a3 + c.a4 / std::sqrt(static_cast<double>(lambda)));
}

inline double xi_gain(double max_v_snr, const LedConstants& c = {}) {
  return std::pow(10.0, (c.g_max - c.g_min) * max_v_snr + c.g_min);
}

struct Effectiveness {
  Vector v;
  double n_eff_hat = 1.0;
};

/// v_i = sigmoid(v_snr_i - thresh) / sigmoid(1) with sigmoid gain `gain`;
/// n_eff_hat = sum(v), never below 1.
inline Effectiveness effectiveness(const Vector& v_snr, double thresh, double gain) {
  auto sigmoid = [gain](double x) { return 1.0 / (1.0 + std::exp(-gain * x)); };
  const double top = sigmoid(1.0);
  Effectiveness out;
  out.v.resize(v_snr.size());
  for (Index i = 0; i < v_snr.size(); ++i) out.v(i) = std::min(sigmoid(v_snr(i) - thresh) / top, 1.0);
  out.n_eff_hat = std::max(out.v.sum(), 1.0);
  return out;
}

/// Default learning rates and step-size constants recomputed for dimension
/// n_eff_hat. lambda, the weights, mu and mu_eff are kept from `base`.
inline StrategyParams adapt_hyperparameters(double n_eff_hat, const StrategyParams& base, StepSizeMode mode) {
  const StrategyParams fresh = default_params(n_eff_hat, base.lambda, mode);
  StrategyParams out = base;
  out.c_c = fresh.c_c;
  out.c_1 = fresh.c_1;
  out.c_mu = fresh.c_mu;
  out.c_sigma = fresh.c_sigma;
  out.d_sigma = fresh.d_sigma;
  return out;
}

inline LedState::LedState(Index n, int lambda, LedConstants c)
    : s_m(Vector::Zero(n)),
      gamma_m(Vector::Zero(n)),
      s_c(Vector::Zero(n)),
      gamma_c(Vector::Zero(n)),
      v_snr(Vector::Zero(n)),
      v(Vector::Ones(n)),
      n_eff_hat(static_cast<double>(n)),
      xi_thresh(ledcma::xi_thresh(static_cast<int>(n), lambda, c)),
      xi_gain(0.0),
      constants(c) {}

/// One full estimator step: accumulate, estimate SNR, refresh gain, v and n_eff_hat.
inline void led_step(LedState& st, const RotatedDirections& dirs) {
  update_accumulators(st, dirs);
  st.v_snr = snr_estimate(st);
  st.xi_gain = xi_gain(st.v_snr.maxCoeff(), st.constants);
  Effectiveness e = effectiveness(st.v_snr, st.xi_thresh, st.xi_gain);
  st.v = std::move(e.v);
  st.n_eff_hat = e.n_eff_hat;
}

}  // namespace ledcma
