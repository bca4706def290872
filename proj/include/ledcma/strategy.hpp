#pragma once

// Core CMA-ES pieces: default strategy parameters, the distribution state,
// sampling, ranking, recombination and the rank-mu / rank-one covariance
// updates. Each piece is a free function so it can be checked in isolation;
// Optimizer (optimizer.hpp) wires them together.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ledcma/error.hpp"
#include "ledcma/linalg.hpp"
#include "ledcma/rng.hpp"

namespace ledcma {

enum class StepSizeMode { Csa, Tpa };

struct StrategyParams {
  int lambda = 0;
  int mu = 0;
  Vector weights;  // w_1 > ... > w_mu > 0, sum 1
  double mu_eff = 0.0;
  double c_m = 1.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
};

/// 4 + floor(3 ln N).
inline int default_lambda(int n) {
  if (n < 1) throw ConfigError("dimension must be positive");
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

/// Learning rates and step-size constants for dimension `n`. `n` is real so the
/// same formulas serve the estimated effective dimension. Weights do not depend
/// on `n`.
inline StrategyParams default_params(double n, int lambda, StepSizeMode mode) {
  if (lambda < 4) throw ConfigError("lambda must be at least 4, got " + std::to_string(lambda));
  if (!(n > 0.0)) throw ConfigError("dimension must be positive");

  StrategyParams p;
  p.lambda = lambda;

  std::vector<double> raw;
  const double log_half = std::log((lambda + 1) / 2.0);
  for (int i = 1; i <= lambda; ++i) {
    const double w = std::max(log_half - std::log(static_cast<double>(i)), 0.0);
    if (w > 0.0) raw.push_back(w);
  }
  p.mu = static_cast<int>(raw.size());
  p.weights = Eigen::Map<const Vector>(raw.data(), p.mu);
  p.weights /= p.weights.sum();
  p.mu_eff = 1.0 / p.weights.squaredNorm();

  const double me = p.mu_eff;
  p.c_m = 1.0;
  p.c_c = (4.0 + me / n) / (n + 4.0 + 2.0 * me / n);
  p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + me);
  p.c_mu = std::min(1.0 - p.c_1, 2.0 * (me - 2.0 + 1.0 / me) / ((n + 2.0) * (n + 2.0) + me));

  if (mode == StepSizeMode::Csa) {
    p.c_sigma = (me + 2.0) / (n + me + 5.0);
    p.d_sigma = 1.0 + p.c_sigma + 2.0 * std::max(0.0, std::sqrt((me - 1.0) / (n + 1.0)) - 1.0);
  } else {
    p.c_sigma = 0.3;
    p.d_sigma = std::sqrt(n);
  }
  return p;
}

/// Mean, covariance (with its eigenpair and both symmetric roots cached),
/// step-size and rank-one evolution path.
struct DistributionState {
  Vector mean;
  Matrix cov;
  EigenPair eigen;
  Matrix sqrt_cov;
  Matrix inv_sqrt_cov;
  double sigma = 1.0;
  Vector p_c;
  long iteration = 0;

  Index dim() const { return mean.size(); }

  static DistributionState initial(Vector m0, double sigma0) {
    const Index n = m0.size();
    return initial(std::move(m0), sigma0, Matrix::Identity(n, n));
  }

  static DistributionState initial(Vector m0, double sigma0, Matrix c0) {
    if (!(sigma0 > 0.0)) throw ConfigError("initial step-size must be positive");
    DistributionState s;
    s.mean = std::move(m0);
    s.cov = std::move(c0);
    s.sigma = sigma0;
    s.p_c = Vector::Zero(s.mean.size());
    s.refresh_eigen(false);
    return s;
  }

  /// Recomputes eigen and the cached roots from cov.
  void refresh_eigen(bool warm_start) {
    eigen = warm_start && eigen.basis.rows() == cov.rows() ? sym_eigendecompose(cov, eigen.basis)
                                                           : sym_eigendecompose(cov);
    sqrt_cov = sqrt_from_eigen(eigen);
    inv_sqrt_cov = inv_sqrt_from_eigen(eigen).matrix;
  }
};

/// Samples stored column-wise: x.col(k) = mean + sigma * y.col(k), y = sqrt(C) z.
struct Population {
  Matrix z;
  Matrix y;
  Matrix x;
  Vector f;
  std::vector<int> order;  // order[i] = index of the (i+1)-th best sample

  int size() const { return static_cast<int>(x.cols()); }
};

/// Draws lambda * N standard normals, sample-major (all N draws of sample 1,
/// then sample 2, ...).
inline Population sample_population(const DistributionState& state, int lambda, RngStream& rng) {
  const Index n = state.dim();
  Population pop;
  pop.z.resize(n, lambda);
  for (Index k = 0; k < lambda; ++k) {
    for (Index i = 0; i < n; ++i) pop.z(i, k) = rng.normal();
  }
  pop.y = state.sqrt_cov * pop.z;
  pop.x = (state.sigma * pop.y).colwise() + state.mean;
  pop.f = Vector::Constant(lambda, std::numeric_limits<double>::quiet_NaN());
  return pop;
}

/// Replaces sample k by an externally chosen point, keeping z and y consistent.
inline void replace_sample(Population& pop, Index k, const Vector& x, const DistributionState& state) {
  pop.x.col(k) = x;
  pop.y.col(k) = (x - state.mean) / state.sigma;
  pop.z.col(k) = state.inv_sqrt_cov * pop.y.col(k);
}

/// Stable ascending sort of sample indices by fitness.
inline std::vector<int> rank(const Vector& f) {
  for (Index i = 0; i < f.size(); ++i) {
    if (std::isnan(f(i))) throw NumericError("non-finite fitness");
  }
  std::vector<int> order(static_cast<std::size_t>(f.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&f](int a, int b) { return f(a) < f(b); });
  return order;
}

struct MeanDirection {
  Vector delta_m;  // sigma * sum_i w_i y_{i:lambda}
  Vector z_avg;    // C^{-1/2} delta_m / sigma
};

/// Weighted recombination of the best mu samples. z_avg is sum_i w_i z_{i:lambda},
/// which equals C^{-1/2} delta_m / sigma because every y is sqrt(C) z.
inline MeanDirection mean_direction(const Population& pop, const StrategyParams& params, double sigma) {
  const Index n = pop.y.rows();
  MeanDirection out{Vector::Zero(n), Vector::Zero(n)};
  for (int i = 0; i < params.mu; ++i) {
    const int k = pop.order[static_cast<std::size_t>(i)];
    out.delta_m += params.weights(i) * pop.y.col(k);
    out.z_avg += params.weights(i) * pop.z.col(k);
  }
  out.delta_m *= sigma;
  return out;
}

inline Vector update_mean(const Vector& mean, const Vector& delta_m, double c_m) { return mean + c_m * delta_m; }

/// sum_i w_i (y_{i:lambda} y_{i:lambda}^T - C).
inline Matrix rank_mu_direction(const Population& pop, const StrategyParams& params, const Matrix& cov) {
  const Index n = pop.y.rows();
  Matrix selected(n, params.mu);
  for (int i = 0; i < params.mu; ++i) {
    selected.col(i) = std::sqrt(params.weights(i)) * pop.y.col(pop.order[static_cast<std::size_t>(i)]);
  }
  Matrix out = selected * selected.transpose() - params.weights.sum() * cov;
  symmetrize(out);
  return out;
}

inline Vector update_pc(const Vector& p_c, const Vector& delta_m, double sigma, bool h_sigma,
                        const StrategyParams& params) {
  const double cc = params.c_c;
  Vector out = (1.0 - cc) * p_c;
  if (h_sigma) out += std::sqrt(cc * (2.0 - cc) * params.mu_eff) * (delta_m / sigma);
  return out;
}

inline Matrix rank_one_direction(const Vector& p_c, const Matrix& cov) { return p_c * p_c.transpose() - cov; }

/// C <- (1 + (1 - h) c1 cc (2 - cc)) C + c_mu dC_mu + c1 dC_1, then the eigenpair
/// and roots are refreshed.
inline void update_covariance(DistributionState& state, const Matrix& delta_mu_c, const Matrix& delta_one_c,
                              bool h_sigma, const StrategyParams& params, bool warm_eigen = true) {
  const double stall = h_sigma ? 0.0 : params.c_1 * params.c_c * (2.0 - params.c_c);
  Matrix next = (1.0 + stall) * state.cov + params.c_mu * delta_mu_c + params.c_1 * delta_one_c;
  symmetrize(next);
  if (!next.allFinite()) {
    throw NumericError("non-finite covariance at iteration " + std::to_string(state.iteration));
  }
  state.cov = std::move(next);
  state.refresh_eigen(warm_eigen);
}

}  // namespace ledcma
