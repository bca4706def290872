#pragma once

// Dense symmetric linear algebra used by the optimizer: a deterministic cyclic
// Jacobi eigensolver and the matrix square roots built from its eigenpairs.
// Storage and products come from Eigen; the eigensolver is our own so that
// column order and sign are fixed by a documented convention.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ledcma/error.hpp"

namespace ledcma {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Eigenvalues below this value are clamped before any inverse or root is taken.
inline constexpr double kEigenFloor = 1e-30;

/// Result of a symmetric eigendecomposition, M = basis * diag(values) * basis^T.
///
/// `values` is sorted descending and floored at kEigenFloor. Each column of
/// `basis` has its largest-magnitude entry positive (first such entry on ties).
/// `degenerate` is set when any eigenvalue had to be floored. `condition` is
/// max/min of the eigenvalues before flooring (+inf when the minimum is <= 0).
struct EigenPair {
  Matrix basis;
  Vector values;
  bool degenerate = false;
  double condition = 1.0;

  Index dim() const { return values.size(); }
};

/// B Λ^{-1/2} B^T together with whether any floored eigenvalue entered it.
struct InverseRoot {
  Matrix matrix;
  bool degenerate = false;
};

inline void symmetrize(Matrix& m) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = avg;
      m(j, i) = avg;
    }
  }
}

inline Matrix symmetrized(Matrix m) {
  symmetrize(m);
  return m;
}

/// Max absolute entry of Q^T Q - I.
inline double orthonormality_error(const Matrix& q) {
  const Matrix gram = q.transpose() * q;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

inline double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  const Index n = a.rows();
  for (Index q = 1; q < n; ++q) {
    for (Index p = 0; p < q; ++p) sum += a(p, q) * a(p, q);
  }
  return std::sqrt(2.0 * sum);
}

// Cyclic (row-by-row) Jacobi. `a` is reduced in place toward diagonal form and
// every plane rotation is also applied to the columns of `v`. Returns the number
// of sweeps performed.
inline int jacobi_sweeps(Matrix& a, Matrix& v) {
  const Index n = a.rows();
  const double scale = a.norm();
  if (scale == 0.0 || n < 2) return 0;

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= kJacobiTolerance * scale) return sweep;

    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // After a few sweeps an element that cannot change either diagonal
        // entry in floating point is simply dropped.
        if (sweep > 3 && std::abs(app) + 100.0 * std::abs(apq) == std::abs(app) &&
            std::abs(aqq) + 100.0 * std::abs(apq) == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }

        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double new_kp = c * akp - s * akq;
          const double new_kq = s * akp + c * akq;
          a(k, p) = new_kp;
          a(p, k) = new_kp;
          a(k, q) = new_kq;
          a(q, k) = new_kq;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  return kJacobiMaxSweeps;
}

inline void gram_schmidt_columns(Matrix& v) {
  const Index n = v.cols();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) v.col(j) -= v.col(i).dot(v.col(j)) * v.col(i);
    v.col(j).normalize();
  }
}

// Sorts eigenpairs descending (stable on ties), fixes column signs, floors.
// Without `reference` the largest-magnitude entry of each column is made
// positive. With it, each column keeps the orientation of the reference column
// it was rotated from (non-negative inner product); unlike the entry rule this
// commutes with rotating the whole problem.
inline EigenPair finalize(const Matrix& reduced, const Matrix& vectors, const Matrix* reference = nullptr,
                          std::vector<Index>* source_order = nullptr) {
  const Index n = reduced.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return reduced(i, i) > reduced(j, j); });

  EigenPair out;
  out.basis.resize(n, n);
  out.values.resize(n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = reduced(src, src);
    out.basis.col(k) = vectors.col(src);

    if (reference != nullptr) {
      if (out.basis.col(k).dot(reference->col(src)) < 0.0) out.basis.col(k) = -out.basis.col(k);
      continue;
    }
    Index lead = 0;
    double lead_abs = -1.0;
    for (Index r = 0; r < n; ++r) {
      if (std::abs(out.basis(r, k)) > lead_abs) {
        lead_abs = std::abs(out.basis(r, k));
        lead = r;
      }
    }
    if (out.basis(lead, k) < 0.0) out.basis.col(k) = -out.basis.col(k);
  }

  if (source_order != nullptr) *source_order = order;

  const double max_raw = out.values.maxCoeff();
  const double min_raw = out.values.minCoeff();
  out.condition = min_raw > 0.0 ? max_raw / min_raw : std::numeric_limits<double>::infinity();
  for (Index k = 0; k < n; ++k) {
    if (out.values(k) < kEigenFloor) {
      out.values(k) = kEigenFloor;
      out.degenerate = true;
    }
  }
  return out;
}

// Eigenvalues closer than this (relative to the largest) count as one
// degenerate cluster; the solver does not resolve eigenvectors below it.
inline constexpr double kClusterTolerance = 1e-11;

// Inside a degenerate eigenspace any orthonormal basis is valid, and the one
// Jacobi lands on is decided by round-off. Replace it by the orthonormal basis
// of the same subspace closest to the reference columns it came from (polar
// factor of V^T W). This depends only on the subspace and the reference, so it
// is reproducible and commutes with rotating the problem.
inline void align_degenerate_clusters(EigenPair& e, const Matrix& reference, const std::vector<Index>& source_order) {
  const Index n = e.dim();
  const double tol = kClusterTolerance * std::abs(e.values(0));
  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && e.values(end - 1) - e.values(end) <= tol) ++end;
    const Index size = end - start;
    if (size > 1) {
      std::vector<Index> sources(source_order.begin() + start, source_order.begin() + end);
      std::sort(sources.begin(), sources.end());
      Matrix w(n, size);
      for (Index j = 0; j < size; ++j) w.col(j) = reference.col(sources[static_cast<std::size_t>(j)]);
      const Matrix v = e.basis.middleCols(start, size);
      Eigen::JacobiSVD<Matrix> svd(v.transpose() * w, Eigen::ComputeFullU | Eigen::ComputeFullV);
      e.basis.middleCols(start, size) = v * (svd.matrixU() * svd.matrixV().transpose());
    }
    start = end;
  }
}

inline void require_symmetric_input(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw NumericError("matrix must be square and non-empty");
  if (!m.allFinite()) throw NumericError("non-finite matrix");
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Deterministic: the same input always produces bit-identical output.
inline EigenPair sym_eigendecompose(const Matrix& m) {
  detail::require_symmetric_input(m);
  Matrix a = symmetrized(m);
  Matrix v = Matrix::Identity(m.rows(), m.cols());
  detail::jacobi_sweeps(a, v);
  return detail::finalize(a, v);
}

/// Same contract as sym_eigendecompose(m) except for the column signs, but
/// starts the rotations from `warm_basis` (typically the previous iteration's
/// eigenvectors). When the basis already nearly diagonalizes `m` this needs one
/// or two sweeps. Column signs follow `warm_basis` instead of the entry rule, so
/// eigenvectors keep their orientation from one call to the next, and within a
/// degenerate eigenspace the basis closest to `warm_basis` is returned.
inline EigenPair sym_eigendecompose(const Matrix& m, const Matrix& warm_basis) {
  detail::require_symmetric_input(m);
  if (warm_basis.rows() != m.rows() || warm_basis.cols() != m.cols()) {
    throw NumericError("warm-start basis has the wrong shape");
  }
  Matrix a = warm_basis.transpose() * m * warm_basis;
  symmetrize(a);
  Matrix v = warm_basis;
  detail::jacobi_sweeps(a, v);
  // Products of many rotations drift from orthonormality over long runs.
  detail::gram_schmidt_columns(v);
  std::vector<Index> order;
  EigenPair out = detail::finalize(a, v, &warm_basis, &order);
  detail::align_degenerate_clusters(out, warm_basis, order);
  return out;
}

/// B Λ^{1/2} B^T. Eigenvalues in [-1e-12, 0] are treated as 0.
inline Matrix sqrt_from_eigen(const EigenPair& e) {
  const Index n = e.dim();
  Vector roots(n);
  for (Index k = 0; k < n; ++k) {
    const double lam = e.values(k);
    if (!(lam >= -1e-12)) throw NumericError("not PSD");
    roots(k) = std::sqrt(std::max(lam, 0.0));
  }
  Matrix out = e.basis * roots.asDiagonal() * e.basis.transpose();
  symmetrize(out);
  return out;
}

/// B Λ^{-1/2} B^T with eigenvalues floored at kEigenFloor.
inline InverseRoot inv_sqrt_from_eigen(const EigenPair& e) {
  const Index n = e.dim();
  InverseRoot out;
  out.degenerate = e.degenerate;
  Vector inv_roots(n);
  for (Index k = 0; k < n; ++k) {
    const double lam = e.values(k);
    if (!(lam >= -1e-12)) throw NumericError("not PSD");
    if (lam <= kEigenFloor) out.degenerate = true;
    inv_roots(k) = 1.0 / std::sqrt(std::max(lam, kEigenFloor));
  }
  out.matrix = e.basis * inv_roots.asDiagonal() * e.basis.transpose();
  symmetrize(out.matrix);
  return out;
}

}  // namespace ledcma
