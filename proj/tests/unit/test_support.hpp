#pragma once

#include "ledcma/linalg.hpp"
#include "ledcma/objective.hpp"
#include "ledcma/rng.hpp"

namespace ledcma::testing {

/// Q diag(values) Q^T for a random rotation Q.
inline Matrix random_spd(const Vector& values, RngStream& rng) {
  const Matrix q = random_rotation(static_cast<int>(values.size()), rng);
  Matrix m = q * values.asDiagonal() * q.transpose();
  symmetrize(m);
  return m;
}

/// Random SPD matrix with log-uniform eigenvalues spanning `condition`.
inline Matrix random_spd(int n, double condition, RngStream& rng) {
  Vector values(n);
  for (int i = 0; i < n; ++i) values(i) = std::pow(condition, rng.uniform(0.0, 1.0));
  values(0) = 1.0;
  if (n > 1) values(n - 1) = condition;
  return random_spd(values, rng);
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace ledcma::testing
