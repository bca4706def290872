#pragma once

// Benchmark functions with low effective dimensionality: an intrinsic function
// on N_eff coordinates composed with a hidden rotation of R^N,
//   f(x) = f~( first N_eff entries of R x ).

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "ledcma/error.hpp"
#include "ledcma/linalg.hpp"
#include "ledcma/rng.hpp"

namespace ledcma {

enum class FunctionId : int {
  Sphere = 1,
  Ellipsoid = 2,
  DifferentPowers = 3,
  Ackley = 4,
  Rosenbrock = 5,
  AttractiveSector = 6,
  SharpRidge = 7,
  Bohachevsky = 8,
  Rastrigin = 9,
};

inline std::string_view function_name(FunctionId id) {
  static constexpr std::array<std::string_view, 9> names = {
      "sphere",     "ellipsoid",         "different-powers", "ackley",    "rosenbrock",
      "attractive-sector", "sharp-ridge", "bohachevsky",      "rastrigin"};
  return names[static_cast<std::size_t>(static_cast<int>(id) - 1)];
}

/// Smallest N_eff for which the function's formula is defined and non-trivial.
inline int min_effective_dim(FunctionId id) {
  switch (id) {
    case FunctionId::Sphere:
    case FunctionId::Ackley:
    case FunctionId::Rastrigin:
      return 1;
    default:
      return 2;
  }
}

/// One of the nine benchmark functions, evaluated on an N_eff-vector.
/// All have global minimum value 0.
class IntrinsicFunction {
 public:
  IntrinsicFunction(FunctionId id, int n_eff) : id_(id), n_eff_(n_eff) {}

  FunctionId id() const { return id_; }
  int n_eff() const { return n_eff_; }

  double operator()(const Eigen::Ref<const Vector>& x) const {
    const Index n = n_eff_;
    // (i-1)/(N_eff-1) with 0-based i.
    auto frac = [n](Index i) { return static_cast<double>(i) / static_cast<double>(n - 1); };
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double sum = 0.0;

    switch (id_) {
      case FunctionId::Sphere:
        return x.squaredNorm();

      case FunctionId::Ellipsoid:
        for (Index i = 0; i < n; ++i) sum += std::pow(10.0, 6.0 * frac(i)) * x(i) * x(i);
        return sum;

      case FunctionId::DifferentPowers:
        for (Index i = 0; i < n; ++i) sum += std::pow(std::abs(x(i)), 2.0 + 4.0 * frac(i));
        return std::sqrt(sum);

      case FunctionId::Ackley: {
        double cos_sum = 0.0;
        for (Index i = 0; i < n; ++i) {
          sum += x(i) * x(i);
          cos_sum += std::cos(two_pi * x(i));
        }
        const double dn = static_cast<double>(n);
        return 20.0 - 20.0 * std::exp(-0.2 * std::sqrt(sum / dn)) + std::exp(1.0) - std::exp(cos_sum / dn);
      }

      case FunctionId::Rosenbrock:
        for (Index i = 0; i + 1 < n; ++i) {
          const double a = x(i) * x(i) - x(i + 1);
          const double b = x(i) - 1.0;
          sum += 100.0 * a * a + b * b;
        }
        return sum;

      case FunctionId::AttractiveSector:
        for (Index i = 0; i < n; ++i) {
          const double z = std::pow(10.0, 0.5 * frac(i)) * x(i);
          const double s = z > 0.0 ? 100.0 : 1.0;
          sum += (s * z) * (s * z);
        }
        return sum;

      case FunctionId::SharpRidge:
        for (Index i = 1; i < n; ++i) sum += x(i) * x(i);
        return x(0) * x(0) + 100.0 * std::sqrt(sum);

      case FunctionId::Bohachevsky:
        for (Index i = 0; i + 1 < n; ++i) {
          sum += x(i) * x(i) + 2.0 * x(i + 1) * x(i + 1) - 0.3 * std::cos(3.0 * std::numbers::pi * x(i)) -
                 0.4 * std::cos(4.0 * std::numbers::pi * x(i + 1)) + 0.7;
        }
        return sum;

      case FunctionId::Rastrigin:
        for (Index i = 0; i < n; ++i) sum += x(i) * x(i) + 10.0 * (1.0 - std::cos(two_pi * x(i)));
        return sum;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

 private:
  FunctionId id_;
  int n_eff_;
};

inline IntrinsicFunction make_intrinsic(int id, int n_eff) {
  if (id < 1 || id > 9) throw ConfigError("function id must be in 1..9, got " + std::to_string(id));
  const auto fid = static_cast<FunctionId>(id);
  if (n_eff < min_effective_dim(fid)) {
    throw ConfigError(std::string(function_name(fid)) + " needs an effective dimension of at least " +
                      std::to_string(min_effective_dim(fid)) + ", got " + std::to_string(n_eff));
  }
  return IntrinsicFunction(fid, n_eff);
}

/// Haar-distributed proper rotation (det = +1): QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q, then the last column negated if needed.
inline Matrix random_rotation(int n, RngStream& rng) {
  if (n < 1) throw ConfigError("rotation dimension must be positive");
  if (n == 1) return Matrix::Identity(1, 1);
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(n - 1) = -q.col(n - 1);
  return q;
}

/// f(x) = f~(psi(R x)) with an evaluation counter, a hard budget and a
/// running best value.
class LedProblem {
 public:
  LedProblem(IntrinsicFunction intrinsic, Matrix rotation, long budget)
      : intrinsic_(intrinsic), rotation_(std::move(rotation)), budget_(budget) {
    if (rotation_.rows() != rotation_.cols()) throw ConfigError("rotation must be square");
    if (rotation_.rows() < intrinsic_.n_eff()) {
      throw ConfigError("total dimension " + std::to_string(rotation_.rows()) +
                        " is smaller than the effective dimension " + std::to_string(intrinsic_.n_eff()));
    }
    if (budget_ <= 0) throw ConfigError("evaluation budget must be positive");
  }

  /// f(x) without touching the counter.
  double value(const Vector& x) const {
    if (x.size() != rotation_.cols()) throw ConfigError("point has the wrong dimension");
    const Vector effective = rotation_.topRows(intrinsic_.n_eff()) * x;
    return intrinsic_(effective);
  }

  /// Counted evaluation. Throws BudgetExhausted instead of exceeding the budget.
  double evaluate(const Vector& x) {
    if (eval_count_ >= budget_) throw BudgetExhausted(budget_);
    const double fx = value(x);
    ++eval_count_;
    if (fx < best_f_) best_f_ = fx;
    if (!target_hit_at_ && best_f_ < target_) target_hit_at_ = eval_count_;
    return fx;
  }

  /// The evaluation count at which best_f first dropped below `target`.
  void set_target(double target) { target_ = target; }
  std::optional<long> target_hit_at() const { return target_hit_at_; }

  const IntrinsicFunction& intrinsic() const { return intrinsic_; }
  const Matrix& rotation() const { return rotation_; }
  int n_total() const { return static_cast<int>(rotation_.rows()); }
  int n_eff() const { return intrinsic_.n_eff(); }
  long eval_count() const { return eval_count_; }
  long budget() const { return budget_; }
  double best_f() const { return best_f_; }

 private:
  IntrinsicFunction intrinsic_;
  Matrix rotation_;
  long budget_;
  long eval_count_ = 0;
  double best_f_ = std::numeric_limits<double>::infinity();
  double target_ = -std::numeric_limits<double>::infinity();
  std::optional<long> target_hit_at_;
};

/// Builds an LED problem of total dimension `n_total`. The rotation is drawn
/// from `rng` unless `identity_rotation` is set, in which case `rng` is untouched.
inline LedProblem led_wrap(const IntrinsicFunction& intrinsic, int n_total, RngStream& rng, long budget,
                           bool identity_rotation = false) {
  if (n_total < intrinsic.n_eff()) {
    throw ConfigError("total dimension " + std::to_string(n_total) + " is smaller than the effective dimension " +
                      std::to_string(intrinsic.n_eff()));
  }
  Matrix rotation = identity_rotation ? Matrix::Identity(n_total, n_total) : random_rotation(n_total, rng);
  return LedProblem(intrinsic, std::move(rotation), budget);
}

/// Entry i is the length of the first N_eff components of R b_i, where b_i is
/// the i-th column of `basis`. Near 1 for eigenvectors spanning the effective
/// subspace, near 0 for redundant ones.
inline Vector effective_alignment_norms(const LedProblem& p, const Matrix& basis) {
  if (basis.rows() != p.n_total() || basis.cols() != p.n_total()) {
    throw ConfigError("basis dimension does not match the problem");
  }
  const Matrix projected = p.rotation().topRows(p.n_eff()) * basis;
  return projected.colwise().norm().transpose();
}

}  // namespace ledcma
