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

// RLD Cramer-Rao type bounds for the displaced thermal family.
//
// Parameters are theta = (theta1, theta2[, N]) with zeta = (theta1 + i theta2)/sqrt(2).
// For a weight G and the inverse RLD Fisher matrix J^-1 the bound is
//
//   C^R(G) = Tr G Re J^-1 + Tr |sqrt(G) Im J^-1 sqrt(G)|.
//
// The closed forms below specialise it to the 2x2 weight
// [[g1+g2, g3], [g3, g1-g2]] and the 3x3 block weight diag(that, g0).

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "dtherm/errors.hpp"
#include "dtherm/linalg.hpp"

namespace dtherm {

inline void require_positive_n_mean(double n_mean, const char* where) {
  if (!(n_mean > 0.0) || !std::isfinite(n_mean)) {
    std::ostringstream os;
    os << where << ": expected photon number must be positive and finite, got " << n_mean;
    throw DomainError(os.str());
  }
}

/// Point of the family: quadratures (theta1, theta2) and thermal photon number N.
class ThetaPoint {
 public:
  ThetaPoint(double theta1, double theta2, double n_mean)
      : theta1_(theta1), theta2_(theta2), n_mean_(n_mean) {
    require_positive_n_mean(n_mean, "ThetaPoint");
  }

  static ThetaPoint from_zeta(cplx zeta, double n_mean) {
    return {std::sqrt(2.0) * zeta.real(), std::sqrt(2.0) * zeta.imag(), n_mean};
  }

  double theta1() const { return theta1_; }
  double theta2() const { return theta2_; }
  double n_mean() const { return n_mean_; }
  cplx zeta() const { return cplx(theta1_, theta2_) / std::sqrt(2.0); }

 private:
  double theta1_;
  double theta2_;
  double n_mean_;
};

/// Symmetric PSD weight matrix of dimension 2 or 3.
class WeightMatrix {
 public:
  /// (g0, g1, g2, g3) of the block form; g0 is zero for d = 2.
  struct BlockParams {
    double g0 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double g3 = 0.0;
  };

  explicit WeightMatrix(const RealMatrix& entries) {
    if (entries.rows() != entries.cols() || (entries.rows() != 2 && entries.rows() != 3)) {
      throw DomainError("WeightMatrix: dimension must be 2x2 or 3x3");
    }
    if (!entries.allFinite()) throw DomainError("WeightMatrix: non-finite entry");
    const double tol = kPsdTolerance * std::max(1.0, max_abs(entries));
    if (!is_symmetric(entries, tol)) throw DomainError("WeightMatrix: matrix is not symmetric");
    entries_ = (entries + entries.transpose()) / 2.0;
    require_psd(symmetric_eigenvalues(entries_), "WeightMatrix");
  }

  static WeightMatrix identity(int dim) { return WeightMatrix(RealMatrix::Identity(dim, dim)); }

  static WeightMatrix two_param(double g1, double g2, double g3) {
    RealMatrix m(2, 2);
    m << g1 + g2, g3, g3, g1 - g2;
    return WeightMatrix(m);
  }

  static WeightMatrix block(double g0, double g1, double g2, double g3) {
    RealMatrix m = RealMatrix::Zero(3, 3);
    m(0, 0) = g1 + g2;
    m(0, 1) = m(1, 0) = g3;
    m(1, 1) = g1 - g2;
    m(2, 2) = g0;
    return WeightMatrix(m);
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const RealMatrix& matrix() const { return entries_; }

  /// Decomposition into (g0, g1, g2, g3). Empty for a 3x3 weight with nonzero
  /// entries coupling N to the quadratures.
  std::optional<BlockParams> block_params() const {
    if (dim() == 3 && (entries_(0, 2) != 0.0 || entries_(1, 2) != 0.0)) return std::nullopt;
    BlockParams p;
    p.g1 = 0.5 * (entries_(0, 0) + entries_(1, 1));
    p.g2 = 0.5 * (entries_(0, 0) - entries_(1, 1));
    p.g3 = entries_(0, 1);
    if (dim() == 3) p.g0 = entries_(2, 2);
    return p;
  }

 private:
  RealMatrix entries_;
};

enum class BoundKind { RldCr, Closed2Param, Closed3Param, GaussianOpt };

inline std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::RldCr:
      return "rld_cr";
    case BoundKind::Closed2Param:
      return "closed_2param";
    case BoundKind::Closed3Param:
      return "closed_3param";
    case BoundKind::GaussianOpt:
      return "gaussian_opt";
  }
  return "unknown";
}

/// A bound value together with how it was obtained. The bounds here depend on
/// theta only through N, so N (when known) is what is recorded.
struct BoundValue {
  BoundKind kind;
  double value;
  std::optional<double> n_mean;
  std::optional<WeightMatrix> weight;
};

// ---------------------------------------------------------------------------
// Inverse RLD Fisher information.

inline ComplexMatrix rld_inverse_2param(double n_mean) {
  require_positive_n_mean(n_mean, "rld_inverse_2param");
  ComplexMatrix m(2, 2);
  m << cplx(n_mean + 0.5, 0.0), cplx(0.0, 0.5), cplx(0.0, -0.5), cplx(n_mean + 0.5, 0.0);
  return m;
}

inline ComplexMatrix rld_inverse_3param(double n_mean) {
  require_positive_n_mean(n_mean, "rld_inverse_3param");
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m.topLeftCorner(2, 2) = rld_inverse_2param(n_mean);
  m(2, 2) = n_mean * (n_mean + 1.0);
  return m;
}

// ---------------------------------------------------------------------------
// C^R(G).

inline BoundValue c_r_general(const WeightMatrix& weight, const ComplexMatrix& j_inv) {
  if (j_inv.rows() != weight.dim() || j_inv.cols() != weight.dim()) {
    throw DomainError("c_r_general: weight is " + std::to_string(weight.dim()) +
                      "-dimensional but inverse Fisher matrix is " + std::to_string(j_inv.rows()) +
                      "x" + std::to_string(j_inv.cols()));
  }
  if (!is_hermitian(j_inv, 1e-10 * std::max(1.0, max_abs(j_inv)))) {
    throw DomainError("c_r_general: inverse Fisher matrix is not Hermitian");
  }
  const RealMatrix& g = weight.matrix();
  const RealMatrix root = sqrt_psd(g);
  const double value = (g * j_inv.real()).trace() + trace_norm(RealMatrix(root * j_inv.imag() * root));
  return {BoundKind::RldCr, value, std::nullopt, weight};
}

namespace detail {

inline double admissible_root(double g1, double g2, double g3, const char* where) {
  const double disc = g1 * g1 - g2 * g2 - g3 * g3;
  const double tol = kPsdTolerance * std::max(1.0, g1 * g1);
  if (g1 < 0.0 || disc < -tol) {
    std::ostringstream os;
    os << where << ": (g1, g2, g3) = (" << g1 << ", " << g2 << ", " << g3
       << ") is not positive semidefinite (need g1 >= sqrt(g2^2 + g3^2))";
    throw DomainError(os.str());
  }
  return std::sqrt(std::max(0.0, disc));
}

}  // namespace detail

inline BoundValue c_r_closed_2param(double g1, double g2, double g3, double n_mean) {
  require_positive_n_mean(n_mean, "c_r_closed_2param");
  const double root = detail::admissible_root(g1, g2, g3, "c_r_closed_2param");
  return {BoundKind::Closed2Param, 2.0 * (n_mean + 0.5) * g1 + root, n_mean, std::nullopt};
}

inline BoundValue c_r_closed_3param(double g0, double g1, double g2, double g3, double n_mean) {
  require_positive_n_mean(n_mean, "c_r_closed_3param");
  if (g0 < 0.0) throw DomainError("c_r_closed_3param: g0 must be non-negative");
  const double root = detail::admissible_root(g1, g2, g3, "c_r_closed_3param");
  const double value = g0 * n_mean * (n_mean + 1.0) + 2.0 * (n_mean + 0.5) * g1 + root;
  return {BoundKind::Closed3Param, value, n_mean, std::nullopt};
}

/// C^R(G) for the family, through the general formula.
inline BoundValue c_r_for(const WeightMatrix& weight, double n_mean) {
  BoundValue b = c_r_general(weight, weight.dim() == 2 ? rld_inverse_2param(n_mean)
                                                       : rld_inverse_3param(n_mean));
  b.n_mean = n_mean;
  return b;
}

// ---------------------------------------------------------------------------
// Squeezed heterodyne.
//
// Heterodyne with a squeezed-vacuum ancilla yields Gaussian outcomes with
// covariance (in theta coordinates) Sigma_rho + Sigma_m, where
// Sigma_rho = (N + 1/2) I and Sigma_m = 1/2 R(phi) diag(e^{2r}, e^{-2r}) R(phi)^T.

/// Tr G (Sigma_rho + Sigma_m) for a 2x2 weight.
inline double gaussian_measurement_cost(const RealMatrix& g, double n_mean, double squeeze_r,
                                        double squeeze_angle) {
  const double c = std::cos(squeeze_angle);
  const double s = std::sin(squeeze_angle);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  const Eigen::Matrix2d squeeze =
      Eigen::Vector2d(std::exp(2.0 * squeeze_r), std::exp(-2.0 * squeeze_r)).asDiagonal();
  const Eigen::Matrix2d sigma_m = 0.5 * rot * squeeze * rot.transpose();
  const Eigen::Matrix2d sigma = (n_mean + 0.5) * Eigen::Matrix2d::Identity() + sigma_m;
  return (g.topLeftCorner(2, 2) * sigma).trace();
}

struct GaussianTradeoff {
  double squeeze_r;
  double squeeze_angle;
  double achieved;
  int iterations;
};

/// Minimises the squeezed-heterodyne cost. The angle aligns the anti-squeezed
/// axis with the eigenvector of G's larger eigenvalue; r is found by
/// golden-section search on [-20, 20] (the cost is convex in r).
inline GaussianTradeoff optimal_gaussian_tradeoff(double g1, double g2, double g3, double n_mean) {
  require_positive_n_mean(n_mean, "optimal_gaussian_tradeoff");
  detail::admissible_root(g1, g2, g3, "optimal_gaussian_tradeoff");
  if (!(g1 > 0.0)) throw DomainError("optimal_gaussian_tradeoff: g1 must be positive");

  const RealMatrix g = WeightMatrix::two_param(g1, g2, g3).matrix();
  const double angle = 0.5 * std::atan2(g3, g2);
  auto cost = [&](double r) { return gaussian_measurement_cost(g, n_mean, r, angle); };

  constexpr double kInvPhi = 0.6180339887498949;
  constexpr int kMaxIterations = 200;
  constexpr double kWidthTolerance = 1e-10;
  double lo = -20.0;
  double hi = 20.0;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = cost(x1);
  double f2 = cost(x2);
  int it = 0;
  while (hi - lo > kWidthTolerance) {
    if (it == kMaxIterations) {
      std::ostringstream os;
      os << "optimal_gaussian_tradeoff: golden-section search did not converge after "
         << kMaxIterations << " iterations; bracket [" << lo << ", " << hi << "], cost "
         << std::min(f1, f2);
      throw NumericalError(os.str());
    }
    ++it;
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = cost(x2);
    }
  }
  const double r = 0.5 * (lo + hi);
  return {r, angle, cost(r), it};
}

}  // namespace dtherm
