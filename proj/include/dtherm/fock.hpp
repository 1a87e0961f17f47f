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

// Truncated Fock-space oracle.
//
// Single-mode operators live on span{|0>, ..., |D-1>}. Two-mode operators use
// the product basis |m>|n> at flat index m * D + n (first mode major).
// Densities are principal D x D blocks of the exact infinite matrices, so
// their trace falls short of one by the population above the cutoff; that
// deficit is carried as `tail_bound`.

#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dtherm/bounds.hpp"
#include "dtherm/errors.hpp"
#include "dtherm/linalg.hpp"
#include "dtherm/states.hpp"

namespace dtherm::fock {

struct FockOperator {
  ComplexMatrix matrix;
  double tail_bound = 0.0;

  Index cutoff() const { return matrix.rows(); }
};

struct TwoModeOperator {
  Index cutoff = 0;
  ComplexMatrix matrix;

  static Index index(Index m, Index n, Index cutoff) { return m * cutoff + n; }
};

// ---------------------------------------------------------------------------
// Cutoff selection.

/// Smallest D with (N/(N+1))^D < tol.
inline Index thermal_cutoff(double n_mean, double tol) {
  require_positive_n_mean(n_mean, "thermal_cutoff");
  const double ratio = n_mean / (n_mean + 1.0);
  Index d = 1;
  double tail = ratio;
  while (tail >= tol) {
    tail *= ratio;
    ++d;
  }
  return d;
}

/// Smallest D with P(K >= D) < tol for K ~ Poisson(lambda), using
/// P(K >= D) <= p_D / (1 - lambda/(D+1)) once D + 1 > 2 lambda.
inline Index poisson_cutoff(double lambda, double tol) {
  if (lambda <= 0.0) return 1;
  double pmf = std::exp(-lambda);
  for (Index d = 0;; ++d) {
    if (d > 0) pmf *= lambda / static_cast<double>(d);
    const double shrink = lambda / static_cast<double>(d + 1);
    if (shrink < 0.5 && pmf / (1.0 - shrink) < tol) return std::max<Index>(d, 1);
  }
}


// ---------------------------------------------------------------------------
// Elementary operators.

inline FockOperator annihilation(Index cutoff) {
  if (cutoff < 2) throw DomainError("annihilation: cutoff must be at least 2");
  ComplexMatrix a = ComplexMatrix::Zero(cutoff, cutoff);
  for (Index n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {a, 0.0};
}

inline FockOperator number_operator(Index cutoff) {
  ComplexMatrix n = ComplexMatrix::Zero(cutoff, cutoff);
  for (Index k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
  return {n, 0.0};
}

inline FockOperator thermal_density(double n_mean, Index cutoff) {
  require_positive_n_mean(n_mean, "thermal_density");
  if (cutoff < 1) throw DomainError("thermal_density: cutoff must be positive");
  ComplexMatrix rho = ComplexMatrix::Zero(cutoff, cutoff);
  const double ratio = n_mean / (n_mean + 1.0);
  double p = 1.0 / (n_mean + 1.0);
  for (Index k = 0; k < cutoff; ++k) {
    rho(k, k) = p;
    p *= ratio;
  }
  return {rho, std::pow(ratio, static_cast<double>(cutoff))};
}

/// Truncated coherent state e^{-|alpha|^2/2} sum_k alpha^k / sqrt(k!) |k>.
inline ComplexVector coherent_vector(cplx alpha, Index cutoff) {
  ComplexVector v(cutoff);
  if (cutoff == 0) return v;
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (Index k = 1; k < cutoff; ++k) v(k) = v(k - 1) * alpha / std::sqrt(static_cast<double>(k));
  return v;
}

/// Generalised Laguerre polynomial L_k^{(a)}(x) by forward recurrence.
inline double laguerre(std::int64_t k, double a, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + a - x;
  for (std::int64_t j = 1; j < k; ++j) {
    const double jd = static_cast<double>(j);
    const double next = ((2.0 * jd + 1.0 + a - x) * cur - (jd + a) * prev) / (jd + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// <m|D(zeta)|n> for the infinite-dimensional displacement operator:
///   m >= n: sqrt(n!/m!) zeta^{m-n} e^{-|zeta|^2/2} L_n^{(m-n)}(|zeta|^2)
///   m <  n: sqrt(m!/n!) (-zeta*)^{n-m} e^{-|zeta|^2/2} L_m^{(n-m)}(|zeta|^2)
inline cplx displacement_element(std::int64_t m, std::int64_t n, cplx zeta) {
  const double x = std::norm(zeta);
  const double magnitude = std::abs(zeta);
  const std::int64_t low = std::min(m, n);
  const std::int64_t gap = std::max(m, n) - low;
  if (gap > 0 && magnitude == 0.0) return {0.0, 0.0};
  double log_prefactor =
      0.5 * (std::lgamma(static_cast<double>(low) + 1.0) - std::lgamma(static_cast<double>(low + gap) + 1.0)) -
      0.5 * x;
  if (gap > 0) log_prefactor += static_cast<double>(gap) * std::log(magnitude);
  if (log_prefactor < -745.0) return {0.0, 0.0};
  const double base_angle = m >= n ? std::arg(zeta) : std::numbers::pi - std::arg(zeta);
  const cplx phase = std::polar(1.0, static_cast<double>(gap) * base_angle);
  return std::exp(log_prefactor) * laguerre(low, static_cast<double>(gap), x) * phase;
}

inline ComplexMatrix displacement_block(cplx zeta, Index rows, Index cols) {
  ComplexMatrix d(rows, cols);
  for (Index m = 0; m < rows; ++m)
    for (Index n = 0; n < cols; ++n) d(m, n) = displacement_element(m, n, zeta);
  return d;
}

/// Truncated D(zeta). `tail_bound` is the population of D(zeta)|0> above the
/// cutoff; when it is not small the truncation is no longer close to unitary.
inline FockOperator displacement_operator(cplx zeta, Index cutoff) {
  ComplexMatrix d = displacement_block(zeta, cutoff, cutoff);
  const double leak = std::max(0.0, 1.0 - d.col(0).squaredNorm());
  return {std::move(d), leak};
}

/// rho_{zeta,N} = D(zeta) rho_{0,N} D(zeta)^dagger, with the thermal sum
/// carried far enough past the cutoff that every retained entry is exact to
/// about 1e-17.
inline FockOperator displaced_thermal_density(cplx zeta, double n_mean, Index cutoff) {
  require_positive_n_mean(n_mean, "displaced_thermal_density");
  if (cutoff < 1) throw DomainError("displaced_thermal_density: cutoff must be positive");
  const Index inner = cutoff + thermal_cutoff(n_mean, 1e-17) + poisson_cutoff(std::norm(zeta), 1e-17);
  const ComplexMatrix d = displacement_block(zeta, cutoff, inner);
  RealVector p(inner);
  const double ratio = n_mean / (n_mean + 1.0);
  p(0) = 1.0 / (n_mean + 1.0);
  for (Index k = 1; k < inner; ++k) p(k) = p(k - 1) * ratio;
  ComplexMatrix rho = d * p.asDiagonal() * d.adjoint();
  rho = hermitian_part(rho);
  const double tail = std::max(0.0, 1.0 - rho.trace().real());
  return {std::move(rho), tail};
}

/// Smallest cutoff at which rho_{amplitude,N} leaves less than `tol` of its
/// population above the cutoff. Starts from the sum of the thermal and
/// coherent tail cutoffs and grows until the measured tail is below `tol`.
inline Index required_cutoff(double n_mean, double amplitude, double tol) {
  Index d = std::max<Index>(2, thermal_cutoff(n_mean, tol) + poisson_cutoff(amplitude * amplitude, tol));
  while (displaced_thermal_density(amplitude, n_mean, d).tail_bound >= tol) ++d;
  return d;
}

/// Independent construction of rho_{zeta,N} from its coherent-state integral
///   (1/(pi N)) \int exp(-|zeta - alpha|^2 / N) |alpha><alpha| d^2 alpha
/// on a polar grid centred at zeta: composite 30-point Gauss-Legendre in the
/// radius (out to where the Gaussian weight is below e^-42) and the periodic
/// trapezoid rule in the angle.
inline FockOperator displaced_thermal_by_quadrature(cplx zeta, double n_mean, Index cutoff,
                                                    int radial_panels = 16, int angular_points = 0) {
  require_positive_n_mean(n_mean, "displaced_thermal_by_quadrature");
  using Rule = boost::math::quadrature::gauss<double, 30>;
  if (angular_points <= 0) {
    angular_points = static_cast<int>(4 * cutoff + 64 + 8 * std::ceil(std::abs(zeta)));
  }
  const double radius = std::sqrt(42.0 * n_mean);
  const double panel = radius / radial_panels;
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();

  ComplexMatrix rho = ComplexMatrix::Zero(cutoff, cutoff);
  const double angle_step = 2.0 * std::numbers::pi / angular_points;
  for (int p = 0; p < radial_panels; ++p) {
    const double mid = (p + 0.5) * panel;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (const double sign : {-1.0, 1.0}) {
        const double r = mid + sign * 0.5 * panel * nodes[i];
        const double radial_weight =
            0.5 * panel * weights[i] * r * std::exp(-r * r / n_mean) / (std::numbers::pi * n_mean);
        for (int j = 0; j < angular_points; ++j) {
          const cplx alpha = zeta + std::polar(r, j * angle_step);
          const ComplexVector v = coherent_vector(alpha, cutoff);
          rho.noalias() += (radial_weight * angle_step) * (v * v.adjoint());
        }
      }
    }
  }
  rho = hermitian_part(rho);
  return {rho, std::max(0.0, 1.0 - rho.trace().real())};
}

// ---------------------------------------------------------------------------
// Two-mode operators.

inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline TwoModeOperator tensor(const FockOperator& a, const FockOperator& b) {
  if (a.cutoff() != b.cutoff()) throw DomainError("tensor: cutoffs differ");
  return {a.cutoff(), tensor(a.matrix, b.matrix)};
}

/// The generator phi (a^dagger b - a b^dagger) on the truncated product space,
/// where a acts on the first mode and b on the second.
inline TwoModeOperator beam_splitter_generator(double phi, Index cutoff) {
  const ComplexMatrix a = annihilation(cutoff).matrix;
  const ComplexMatrix ad = a.adjoint();
  return {cutoff, phi * (tensor(ad, a) - tensor(a, ad))};
}

/// exp(phi (a^dagger b - a b^dagger)). The generator conserves m + n, so the
/// exponential is taken block by block over total photon number s; blocks
/// with s >= D are incomplete in the truncated space but still unitary.
/// With this sign the first mode collects amplitude: |alpha>|beta> maps to
/// |alpha cos phi + beta sin phi>|beta cos phi - alpha sin phi>.
inline TwoModeOperator beam_splitter(double phi, Index cutoff) {
  if (cutoff < 2) throw DomainError("beam_splitter: cutoff must be at least 2");
  const Index dim = cutoff * cutoff;
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (Index s = 0; s <= 2 * (cutoff - 1); ++s) {
    const Index m_lo = std::max<Index>(0, s - (cutoff - 1));
    const Index m_hi = std::min<Index>(s, cutoff - 1);
    const Index size = m_hi - m_lo + 1;
    ComplexMatrix gen = ComplexMatrix::Zero(size, size);
    for (Index m = m_lo; m < m_hi; ++m) {
      // a^dagger b : |m, s-m> -> sqrt(m+1) sqrt(s-m) |m+1, s-m-1>
      const double c = phi * std::sqrt(static_cast<double>(m + 1) * static_cast<double>(s - m));
      gen(m + 1 - m_lo, m - m_lo) += c;
      gen(m - m_lo, m + 1 - m_lo) -= c;
    }
    const ComplexMatrix block = expm(gen);
    for (Index i = 0; i < size; ++i)
      for (Index j = 0; j < size; ++j)
        u(TwoModeOperator::index(m_lo + i, s - m_lo - i, cutoff),
          TwoModeOperator::index(m_lo + j, s - m_lo - j, cutoff)) = block(i, j);
  }
  return {cutoff, std::move(u)};
}

/// Beam-splitter angle of the i-th stage of the concentration cascade,
/// arctan(1/sqrt(i)).
inline double concentration_angle(std::int64_t stage) {
  if (stage < 1) throw DomainError("concentration_angle: stage must be at least 1");
  return std::atan(1.0 / std::sqrt(static_cast<double>(stage)));
}

inline TwoModeOperator conjugate(const TwoModeOperator& u, const TwoModeOperator& rho) {
  if (u.cutoff != rho.cutoff) throw DomainError("conjugate: cutoffs differ");
  return {u.cutoff, u.matrix * rho.matrix * u.matrix.adjoint()};
}

enum class Keep { First, Second };

inline FockOperator partial_trace(const TwoModeOperator& op, Keep keep) {
  const Index d = op.cutoff;
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      cplx sum = 0.0;
      for (Index k = 0; k < d; ++k) {
        sum += keep == Keep::First
                   ? op.matrix(TwoModeOperator::index(i, k, d), TwoModeOperator::index(j, k, d))
                   : op.matrix(TwoModeOperator::index(k, i, d), TwoModeOperator::index(k, j, d));
      }
      out(i, j) = sum;
    }
  }
  return {out, 0.0};
}

// ---------------------------------------------------------------------------
// Concentration checks.

struct ConcentrationReport {
  Index cutoff = 0;
  int copies = 2;
  double dist_first = 0.0;   // marginal 1 vs rho_{sqrt(n) zeta, N}
  double dist_second = 0.0;  // worst other marginal vs rho_{0,N}
  /// Hilbert-Schmidt distance between the joint output of the first stage and
  /// the product of its marginals.
  double product_hs_distance = 0.0;
  /// Tr(out^2) - Tr(rho1^2) Tr(rho2^2) for the first stage.
  double purity_gap = 0.0;
};

namespace detail {

inline void require_concentration_cutoff(cplx zeta, double n_mean, Index cutoff, int copies) {
  const double amplitude = std::sqrt(static_cast<double>(copies)) * std::abs(zeta);
  const Index needed = required_cutoff(n_mean, amplitude, 1e-8);
  if (cutoff < needed) {
    std::ostringstream os;
    os << "cutoff D=" << cutoff << " leaves a tail above 1e-8 for N=" << n_mean
       << ", |zeta|=" << std::abs(zeta) << "; need D >= " << needed;
    throw PreconditionError(os.str());
  }
}

}  // namespace detail

/// Applies the phi = pi/4 stage to rho_{zeta,N} (x) rho_{zeta,N} and compares
/// the marginals with rho_{sqrt(2) zeta, N} and rho_{0,N}.
inline ConcentrationReport verify_concentration_n2(cplx zeta, double n_mean, Index cutoff) {
  require_positive_n_mean(n_mean, "verify_concentration_n2");
  detail::require_concentration_cutoff(zeta, n_mean, cutoff, 2);

  const FockOperator rho = displaced_thermal_density(zeta, n_mean, cutoff);
  const TwoModeOperator out = conjugate(beam_splitter(concentration_angle(1), cutoff), tensor(rho, rho));
  const FockOperator first = partial_trace(out, Keep::First);
  const FockOperator second = partial_trace(out, Keep::Second);

  const FockOperator target_first = displaced_thermal_density(std::sqrt(2.0) * zeta, n_mean, cutoff);
  const FockOperator target_rest = displaced_thermal_density(0.0, n_mean, cutoff);

  ConcentrationReport report;
  report.cutoff = cutoff;
  report.copies = 2;
  report.dist_first = trace_distance(first.matrix, target_first.matrix);
  report.dist_second = trace_distance(second.matrix, target_rest.matrix);
  report.product_hs_distance = (out.matrix - tensor(first.matrix, second.matrix)).norm();
  const double purity_joint = (out.matrix * out.matrix).trace().real();
  const double purity_1 = (first.matrix * first.matrix).trace().real();
  const double purity_2 = (second.matrix * second.matrix).trace().real();
  report.purity_gap = purity_joint - purity_1 * purity_2;
  return report;
}

/// Two-stage cascade on three copies: stage 1 (pi/4) on modes 1 and 2, then
/// stage 2 (arctan(1/sqrt 2)) on modes 1 and 3. Mode 3 is untouched by stage
/// 1, so the input to stage 2 is exactly (marginal of mode 1) (x) rho_{zeta,N}
/// and only two-mode matrices are needed.
inline ConcentrationReport verify_concentration_n3(cplx zeta, double n_mean, Index cutoff) {
  require_positive_n_mean(n_mean, "verify_concentration_n3");
  detail::require_concentration_cutoff(zeta, n_mean, cutoff, 3);

  const FockOperator rho = displaced_thermal_density(zeta, n_mean, cutoff);
  const TwoModeOperator stage1 = conjugate(beam_splitter(concentration_angle(1), cutoff), tensor(rho, rho));
  const FockOperator mode1 = partial_trace(stage1, Keep::First);
  const FockOperator mode2 = partial_trace(stage1, Keep::Second);
  const TwoModeOperator stage2 = conjugate(beam_splitter(concentration_angle(2), cutoff), tensor(mode1, rho));
  const FockOperator final1 = partial_trace(stage2, Keep::First);
  const FockOperator final3 = partial_trace(stage2, Keep::Second);

  const FockOperator target_first = displaced_thermal_density(std::sqrt(3.0) * zeta, n_mean, cutoff);
  const FockOperator target_rest = displaced_thermal_density(0.0, n_mean, cutoff);

  ConcentrationReport report;
  report.cutoff = cutoff;
  report.copies = 3;
  report.dist_first = trace_distance(final1.matrix, target_first.matrix);
  report.dist_second = std::max(trace_distance(mode2.matrix, target_rest.matrix),
                                trace_distance(final3.matrix, target_rest.matrix));
  report.product_hs_distance = (stage2.matrix - tensor(final1.matrix, final3.matrix)).norm();
  const double purity_joint = (stage2.matrix * stage2.matrix).trace().real();
  report.purity_gap = purity_joint - (final1.matrix * final1.matrix).trace().real() *
                                         (final3.matrix * final3.matrix).trace().real();
  return report;
}

// ---------------------------------------------------------------------------
// RLD Fisher information by finite differences.

enum class Family { TwoParam, ThreeParam };

inline int family_dim(Family family) { return family == Family::TwoParam ? 2 : 3; }

inline constexpr double kMaxConditionNumber = 1e12;

/// RLD Fisher matrix with rho L_i = d rho / d theta^i, the derivatives taken
/// as central differences of the truncated rho_theta. Entries are
/// tr(L_j^dagger rho L_i): this index order reproduces the tabulated inverse
/// [[N + 1/2, i/2], [-i/2, N + 1/2]]. The opposite order gives the complex
/// conjugate, which leaves every C^R value unchanged.
inline ComplexMatrix numeric_rld_fisher(Family family, const ThetaPoint& theta, Index cutoff,
                                        double step = 1e-4) {
  if (!(step >= 1e-5 && step <= 1e-3)) {
    throw DomainError("numeric_rld_fisher: finite-difference step must lie in [1e-5, 1e-3]");
  }
  const int dim = family_dim(family);
  if (family == Family::ThreeParam && theta.n_mean() <= step) {
    throw DomainError("numeric_rld_fisher: N must exceed the finite-difference step");
  }
  auto density_at = [&](double t1, double t2, double n) {
    return displaced_thermal_density(cplx(t1, t2) / std::sqrt(2.0), n, cutoff).matrix;
  };
  const double t1 = theta.theta1();
  const double t2 = theta.theta2();
  const double n = theta.n_mean();
  const ComplexMatrix rho = density_at(t1, t2, n);

  const RealVector spectrum = hermitian_eigenvalues(rho);
  const double lo = spectrum.minCoeff();
  const double hi = spectrum.maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    std::ostringstream os;
    os << "numeric_rld_fisher: truncated density is ill-conditioned (condition number "
       << (lo > 0.0 ? hi / lo : INFINITY) << " at D=" << cutoff
       << "); use a larger N or a smaller cutoff";
    throw NumericalError(os.str());
  }

  std::vector<ComplexMatrix> derivs;
  derivs.push_back((density_at(t1 + step, t2, n) - density_at(t1 - step, t2, n)) / (2.0 * step));
  derivs.push_back((density_at(t1, t2 + step, n) - density_at(t1, t2 - step, n)) / (2.0 * step));
  if (dim == 3) derivs.push_back((density_at(t1, t2, n + step) - density_at(t1, t2, n - step)) / (2.0 * step));

  const Eigen::PartialPivLU<ComplexMatrix> lu(rho);
  std::vector<ComplexMatrix> logs;
  for (const auto& d : derivs) logs.push_back(lu.solve(d));

  ComplexMatrix j(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) j(a, b) = (logs[b].adjoint() * rho * logs[a]).trace();
  return j;
}

// ---------------------------------------------------------------------------
// Measurement probabilities.

struct PhotonOutcome {
  Index k;
};
struct HeterodyneOutcome {
  cplx alpha;
};
using Outcome = std::variant<PhotonOutcome, HeterodyneOutcome>;

/// Photon counting: <k|rho|k>. Heterodyne: the density <alpha|rho|alpha>/pi.
inline double povm_probability(const FockOperator& rho, const Outcome& outcome) {
  return std::visit(
      [&](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PhotonOutcome>) {
          if (o.k < 0 || o.k >= rho.cutoff()) {
            throw DomainError("povm_probability: photon number outside the truncated space");
          }
          return rho.matrix(o.k, o.k).real();
        } else {
          const ComplexVector v = coherent_vector(o.alpha, rho.cutoff());
          return (v.adjoint() * rho.matrix * v)(0, 0).real() / std::numbers::pi;
        }
      },
      outcome);
}

}  // namespace dtherm::fock
