// Copyright 2026 The dtherm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense linear algebra shared by the bound calculator and the Fock-space
// oracle: cyclic Jacobi eigensolver, PSD square root, trace norm, Hermitian
// spectra through the real embedding, and a scaled-and-squared Taylor
// exponential.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dtherm/errors.hpp"

namespace dtherm {

using cplx = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kJacobiThreshold = 1e-14;
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kPsdTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Hermitian / real decompositions of complex matrices.

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return (m + m.adjoint()) / 2.0;
}

inline ComplexMatrix antihermitian_part(const ComplexMatrix& m) {
  return (m - m.adjoint()) / 2.0;
}

inline RealMatrix real_part(const ComplexMatrix& m) { return m.real(); }
inline RealMatrix imag_part(const ComplexMatrix& m) { return m.imag(); }

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : static_cast<double>(m.cwiseAbs().maxCoeff());
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

inline bool is_symmetric(const RealMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.transpose()) <= tol;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi for real symmetric matrices.

struct SymmetricEigen {
  RealVector values;   // ascending
  RealMatrix vectors;  // columns, matching `values`
  int sweeps = 0;
};

/// Cyclic-by-row Jacobi rotations until the off-diagonal Frobenius norm drops
/// below kJacobiThreshold relative to the full norm.
inline SymmetricEigen jacobi_eigen(const RealMatrix& input, bool want_vectors = true) {
  if (input.rows() != input.cols()) {
    throw DomainError("jacobi_eigen: matrix is not square");
  }
  const Index n = input.rows();
  RealMatrix a = (input + input.transpose()) / 2.0;
  RealMatrix v = want_vectors ? RealMatrix::Identity(n, n) : RealMatrix();

  const double scale = a.norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  if (scale > 0.0) {
    while (off_norm() > kJacobiThreshold * scale) {
      if (sweep == kJacobiMaxSweeps) {
        throw NumericalError("jacobi_eigen: no convergence after " +
                             std::to_string(kJacobiMaxSweeps) + " sweeps (off-norm " +
                             std::to_string(off_norm() / scale) + " relative)");
      }
      ++sweep;
      for (Index p = 0; p < n; ++p) {
        for (Index q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = std::copysign(1.0, theta) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (Index k = 0; k < n; ++k) {
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (Index k = 0; k < n; ++k) {
            const double apk = a(p, k);
            const double aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
          if (want_vectors) {
            for (Index k = 0; k < n; ++k) {
              const double vkp = v(k, p);
              const double vkq = v(k, q);
              v(k, p) = c * vkp - s * vkq;
              v(k, q) = s * vkp + c * vkq;
            }
          }
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src);
    if (want_vectors) out.vectors.col(i) = v.col(src);
  }
  return out;
}

inline RealVector symmetric_eigenvalues(const RealMatrix& m) {
  return jacobi_eigen(m, false).values;
}

/// Eigenvalues of a Hermitian matrix H = A + iB from the real symmetric
/// embedding [[A, -B], [B, A]], whose spectrum is that of H with every
/// eigenvalue doubled.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw DomainError("hermitian_eigenvalues: matrix is not square");
  const Index n = h.rows();
  const ComplexMatrix herm = hermitian_part(h);
  RealMatrix embed(2 * n, 2 * n);
  embed.topLeftCorner(n, n) = herm.real();
  embed.topRightCorner(n, n) = -herm.imag();
  embed.bottomLeftCorner(n, n) = herm.imag();
  embed.bottomRightCorner(n, n) = herm.real();
  const RealVector doubled = symmetric_eigenvalues(embed);
  RealVector values(n);
  for (Index i = 0; i < n; ++i) values(i) = 0.5 * (doubled(2 * i) + doubled(2 * i + 1));
  return values;
}

// ---------------------------------------------------------------------------
// Functions of PSD matrices.

inline void require_psd(const RealVector& eigenvalues, const char* what) {
  if (eigenvalues.size() > 0 && eigenvalues.minCoeff() < -kPsdTolerance) {
    throw DomainError(std::string(what) + ": matrix is not positive semidefinite (min eigenvalue " +
                      std::to_string(eigenvalues.minCoeff()) + ")");
  }
}

/// Symmetric PSD square root. Eigenvalues in [-1e-12, 0) are clamped to zero.
inline RealMatrix sqrt_psd(const RealMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("sqrt_psd: matrix is not square");
  if (!is_symmetric(m, kPsdTolerance * std::max(1.0, max_abs(m)))) {
    throw DomainError("sqrt_psd: matrix is not symmetric");
  }
  const SymmetricEigen eig = jacobi_eigen(m);
  require_psd(eig.values, "sqrt_psd");
  const RealVector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  RealMatrix r = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  return (r + r.transpose()) / 2.0;
}

/// Sum of singular values, from the eigenvalues of m^T m.
inline double trace_norm(const RealMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("trace_norm: matrix is not square");
  const RealVector sq = symmetric_eigenvalues(m.transpose() * m);
  return sq.cwiseMax(0.0).cwiseSqrt().sum();
}

inline double trace_norm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("trace_norm: matrix is not square");
  const RealVector sq = hermitian_eigenvalues(m.adjoint() * m);
  return sq.cwiseMax(0.0).cwiseSqrt().sum();
}

/// Half the sum of |eigenvalues| of the Hermitian difference.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError("trace_distance: shape mismatch");
  }
  return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Matrix exponential.

inline double inf_norm(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// exp(A) by scaling to ||A/2^s|| <= 1/2, Taylor-summing until the next term
/// (which bounds the remaining tail) is below 1e-17, and squaring s times.
inline ComplexMatrix expm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DomainError("expm: matrix is not square");
  const Index n = a.rows();
  const double norm = inf_norm(a);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const ComplexMatrix b = a / std::ldexp(1.0, squarings);

  ComplexMatrix sum = ComplexMatrix::Identity(n, n);
  ComplexMatrix term = ComplexMatrix::Identity(n, n);
  constexpr int kMaxTerms = 60;
  bool converged = false;
  for (int k = 1; k <= kMaxTerms; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
    if (inf_norm(term) < 1e-17) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("expm: Taylor series did not reach 1e-17 in 60 terms");
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace dtherm
