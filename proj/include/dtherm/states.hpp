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

// Outcome laws of heterodyne and photon counting on displaced thermal states,
// their samplers, and the outcome-level effect of the beam-splitter cascade.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>

#include "dtherm/bounds.hpp"
#include "dtherm/errors.hpp"
#include "dtherm/rng.hpp"

namespace dtherm {

struct DisplacedThermalParams {
  cplx zeta;
  double n_mean;
};

struct HeterodyneSample {
  cplx alpha;
};

struct PhotonCount {
  std::uint64_t k;
};

// ---------------------------------------------------------------------------
// Heterodyne: Husimi Q function, a circular Gaussian of variance N + 1.

inline double heterodyne_pdf(const DisplacedThermalParams& params, cplx alpha) {
  require_positive_n_mean(params.n_mean, "heterodyne_pdf");
  const double width = params.n_mean + 1.0;
  return std::exp(-std::norm(alpha - params.zeta) / width) / (std::numbers::pi * width);
}

/// Maps a standard normal pair to a heterodyne outcome.
inline HeterodyneSample heterodyne_from_normals(const DisplacedThermalParams& params, double x,
                                                double y) {
  const double s = std::sqrt((params.n_mean + 1.0) / 2.0);
  return {params.zeta + cplx(s * x, s * y)};
}

inline HeterodyneSample sample_heterodyne(const DisplacedThermalParams& params, RngStream& rng) {
  require_positive_n_mean(params.n_mean, "sample_heterodyne");
  const auto [x, y] = rng.normal_pair();
  return heterodyne_from_normals(params, x, y);
}

// ---------------------------------------------------------------------------
// Photon counting: geometric law P^N(k) = (1/(N+1)) (N/(N+1))^k.

inline double photon_pmf(double n_mean, std::int64_t k) {
  require_positive_n_mean(n_mean, "photon_pmf");
  if (k < 0) throw DomainError("photon_pmf: photon number must be non-negative");
  const double ratio = n_mean / (n_mean + 1.0);
  return std::pow(ratio, static_cast<double>(k)) / (n_mean + 1.0);
}

/// Inverse CDF: k = floor(ln(1 - u) / ln(N/(N+1))) for u in [0, 1).
inline PhotonCount photon_from_uniform(double n_mean, double u) {
  if (!(u > 0.0)) return {0};
  constexpr double kLargestBelowOne = 1.0 - 0x1.0p-53;
  u = std::min(u, kLargestBelowOne);
  const double k = std::floor(std::log1p(-u) / std::log(n_mean / (n_mean + 1.0)));
  constexpr double kCap = 0x1.0p53;
  if (!(k >= 0.0)) return {0};
  return {static_cast<std::uint64_t>(std::min(k, kCap))};
}

inline PhotonCount sample_photon(double n_mean, RngStream& rng) {
  require_positive_n_mean(n_mean, "sample_photon");
  return photon_from_uniform(n_mean, rng.uniform());
}

// ---------------------------------------------------------------------------
// Concentration: n copies of rho_{zeta,N} become rho_{sqrt(n) zeta, N} in the
// first mode and rho_{0,N} in the remaining n - 1.

struct ConcentratedParams {
  DisplacedThermalParams first;
  DisplacedThermalParams rest;
};

inline ConcentratedParams concentrate(const DisplacedThermalParams& params, std::int64_t n) {
  if (n < 1) throw DomainError("concentrate: number of copies must be at least 1");
  require_positive_n_mean(params.n_mean, "concentrate");
  const double scale = std::sqrt(static_cast<double>(n));
  return {{params.zeta * scale, params.n_mean}, {cplx(0.0, 0.0), params.n_mean}};
}

}  // namespace dtherm
