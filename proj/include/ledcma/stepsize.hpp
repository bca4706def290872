#pragma once

// Step-size adaptation: cumulative (CSA) and two-point (TPA), each in the
// original form and in the form that weights every rotated coordinate by its
// estimated effectiveness v.

#include <algorithm>
#include <cmath>
#include <optional>

#include "ledcma/linalg.hpp"
#include "ledcma/rng.hpp"
#include "ledcma/strategy.hpp"

namespace ledcma {

inline constexpr double kSigmaMin = 1e-32;
inline constexpr double kSigmaMax = 1e32;

inline double clamp_sigma(double sigma) { return std::clamp(sigma, kSigmaMin, kSigmaMax); }

/// Approximation of E||N(0, I_n)||.
inline double expected_norm(double n) { return std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n)); }

/// What a step-size strategy hands back each iteration.
struct StepSizeUpdate {
  double sigma_mult = 1.0;
  bool h_sigma = true;
};

struct CsaState {
  Vector p_sigma;
  Vector p_v;  // only used by the effectiveness-weighted variant

  explicit CsaState(Index n = 0) : p_sigma(Vector::Zero(n)), p_v(Vector::Zero(n)) {}
};

/// Original CSA. `t` is the 0-based index of the iteration being completed.
inline StepSizeUpdate csa_update(CsaState& st, const Vector& z_avg, const StrategyParams& params, long t) {
  const double cs = params.c_sigma;
  const double n = static_cast<double>(z_avg.size());
  st.p_sigma = (1.0 - cs) * st.p_sigma + std::sqrt(cs * (2.0 - cs) * params.mu_eff) * z_avg;

  const double chi = expected_norm(n);
  const double norm = st.p_sigma.norm();
  StepSizeUpdate out;
  out.sigma_mult = std::exp((cs / params.d_sigma) * (norm / chi - 1.0));
  const double correction = std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(t + 1)));
  out.h_sigma = norm / correction < (1.4 + 2.0 / (n + 1.0)) * chi;
  return out;
}

/// CSA that measures the path only along effective coordinates. `v` is the
/// effectiveness from the previous LED update (all ones before the first),
/// indexed like the columns of `basis`, the current covariance eigenbasis: the
/// whitened step is weighted by sqrt(v) in that basis, B (sqrt(v) o B^T z_avg),
/// which keeps the update rotation-equivariant. Compares ||p_sigma||^2 with its
/// null-model expectation p_v,sum.
inline StepSizeUpdate led_csa_update(CsaState& st, const Vector& z_avg, const Vector& v, const Matrix& basis,
                                     const StrategyParams& params, double n_eff_hat, long t) {
  const double cs = params.c_sigma;
  const double gain = cs * (2.0 - cs);
  const Vector weighted = basis * v.cwiseSqrt().cwiseProduct(basis.transpose() * z_avg);
  st.p_sigma = (1.0 - cs) * st.p_sigma + std::sqrt(gain * params.mu_eff) * weighted;
  st.p_v = (1.0 - cs) * (1.0 - cs) * st.p_v + gain * v;

  const double pv_sum = st.p_v.sum();
  StepSizeUpdate out;
  if (!(pv_sum > 0.0)) return out;  // nothing accumulated yet

  const double sq = st.p_sigma.squaredNorm();
  out.sigma_mult = std::exp((cs / params.d_sigma) * (sq / pv_sum - 1.0));
  const double correction = 1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(t + 1));
  const double bound = 1.4 + 2.0 / (n_eff_hat + 1.0);
  out.h_sigma = sq / correction < bound * bound * pv_sum;
  return out;
}

struct TpaState {
  double s = 0.0;
  std::optional<Vector> prev_delta_m;  // mean shift of the previous iteration
};

struct TpaPair {
  Vector plus;
  Vector minus;
};

/// Two points symmetric about the mean along the previous mean shift, scaled to
/// Mahalanobis length ||n|| for a fresh n ~ N(0, I). No injection on the first
/// iteration or when the previous shift is zero; the rng is then not touched.
inline std::optional<TpaPair> tpa_inject(const TpaState& st, const DistributionState& state, RngStream& rng) {
  if (!st.prev_delta_m || st.prev_delta_m->squaredNorm() == 0.0) return std::nullopt;
  const Vector& dm = *st.prev_delta_m;
  const Vector whitened = state.inv_sqrt_cov * dm;
  const double mahalanobis = whitened.norm();
  if (!(mahalanobis > 0.0)) return std::nullopt;

  const double length = rng.normal_vector(state.dim()).norm();
  const Vector step = (state.sigma * length / mahalanobis) * dm;
  return TpaPair{state.mean + step, state.mean - step};
}

/// TPA injection where the random length and the normalizing quadratic form
/// both see only the effective coordinates of the eigenbasis.
inline std::optional<TpaPair> led_tpa_inject(const TpaState& st, const DistributionState& state, const Vector& v,
                                             RngStream& rng) {
  if (!st.prev_delta_m || st.prev_delta_m->squaredNorm() == 0.0) return std::nullopt;
  const Vector& dm = *st.prev_delta_m;
  const Vector masked = v.cwiseProduct(state.eigen.basis.transpose() * dm);
  const double quad = masked.cwiseProduct(masked).cwiseQuotient(state.eigen.values).sum();
  if (!(quad > 0.0)) return std::nullopt;

  const double length = rng.normal_vector(state.dim()).cwiseProduct(v).norm();
  const Vector step = (state.sigma * length / std::sqrt(quad)) * dm;
  return TpaPair{state.mean + step, state.mean - step};
}

/// 1-based ranks of x+ and x- among all lambda evaluated samples.
struct TpaRanks {
  int plus = 0;
  int minus = 0;
};

/// Accumulates the rank difference (or just decays when nothing was injected)
/// and turns it into a step-size factor.
inline StepSizeUpdate tpa_update(TpaState& st, std::optional<TpaRanks> ranks, const StrategyParams& params,
                                 int lambda) {
  const double cs = params.c_sigma;
  st.s *= (1.0 - cs);
  if (ranks) st.s += cs * static_cast<double>(ranks->minus - ranks->plus) / static_cast<double>(lambda - 1);
  return StepSizeUpdate{std::exp(st.s / params.d_sigma), st.s < 0.5};
}

}  // namespace ledcma
