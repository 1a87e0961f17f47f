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

// Monte Carlo estimation of MSE matrices for three measurement protocols on n
// copies of rho_{zeta,N}:
//
//   collective  - concentrate the amplitude into one mode with the
//                 beam-splitter cascade, heterodyne that mode, photon-count
//                 the other n - 1 and take the geometric MLE of N.
//   separable   - heterodyne every copy; sample mean for zeta, unbiased
//                 sample variance minus one for N.
//   known-n     - heterodyne every copy; sample mean for zeta.
//
// The cascade maps the product input exactly to
// rho_{sqrt(n) zeta, N} (x) rho_{0,N}^{(x)(n-1)}, so sampling from those
// marginals reproduces the collective measurement statistics without ever
// building n-mode matrices.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dtherm/bounds.hpp"
#include "dtherm/errors.hpp"
#include "dtherm/rng.hpp"
#include "dtherm/states.hpp"

namespace dtherm {

enum class ProtocolKind { CollectiveConcentration, SeparableHeterodyne, KnownNHeterodyne };

inline std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::CollectiveConcentration:
      return "collective";
    case ProtocolKind::SeparableHeterodyne:
      return "separable";
    case ProtocolKind::KnownNHeterodyne:
      return "known-n";
  }
  return "unknown";
}

inline std::optional<ProtocolKind> parse_protocol(std::string_view name) {
  if (name == "collective") return ProtocolKind::CollectiveConcentration;
  if (name == "separable") return ProtocolKind::SeparableHeterodyne;
  if (name == "known-n") return ProtocolKind::KnownNHeterodyne;
  return std::nullopt;
}

/// Number of estimated parameters: (theta1, theta2) plus N unless N is known.
inline int protocol_dim(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::CollectiveConcentration:
    case ProtocolKind::SeparableHeterodyne:
      return 3;
    case ProtocolKind::KnownNHeterodyne:
      return 2;
  }
  return 0;
}

struct Estimate {
  cplx zeta_hat;
  std::optional<double> n_hat;  // empty when N is known
};

struct ExperimentConfig {
  ProtocolKind protocol;
  ThetaPoint theta;
  std::int64_t n_copies;
  std::int64_t trials;
  std::uint64_t seed;
  WeightMatrix weight;
  bool clip_nonneg = false;  // clamp N-hat at zero before scoring

  void validate() const {
    if (n_copies < 2) throw DomainError("ExperimentConfig: n_copies must be at least 2");
    if (trials < 1) throw DomainError("ExperimentConfig: trials must be at least 1");
    if (weight.dim() != protocol_dim(protocol)) {
      throw DomainError("ExperimentConfig: protocol '" + std::string(to_string(protocol)) +
                        "' estimates " + std::to_string(protocol_dim(protocol)) +
                        " parameters but the weight is " + std::to_string(weight.dim()) + "x" +
                        std::to_string(weight.dim()));
    }
  }

  DisplacedThermalParams state() const { return {theta.zeta(), theta.n_mean()}; }
};

// ---------------------------------------------------------------------------
// Single trials.

/// Maximiser of sum_i log P^N(k_i): the sample mean. An all-zero sample has
/// its supremum at the boundary N -> 0, reported as 0.
inline double mle_geometric(std::span<const PhotonCount> counts) {
  if (counts.empty()) throw DomainError("mle_geometric: no photon counts");
  double sum = 0.0;
  for (const auto& c : counts) sum += static_cast<double>(c.k);
  return sum / static_cast<double>(counts.size());
}

inline Estimate run_collective_trial(const ExperimentConfig& config, RngStream& rng) {
  const std::int64_t n = config.n_copies;
  if (n < 2) throw DomainError("run_collective_trial: needs at least 2 copies");
  const ConcentratedParams modes = concentrate(config.state(), n);
  const HeterodyneSample alpha = sample_heterodyne(modes.first, rng);
  std::vector<PhotonCount> counts(static_cast<std::size_t>(n - 1));
  for (auto& c : counts) c = sample_photon(modes.rest.n_mean, rng);
  return {alpha.alpha / std::sqrt(static_cast<double>(n)), mle_geometric(counts)};
}

inline Estimate run_separable_trial(const ExperimentConfig& config, RngStream& rng) {
  const std::int64_t n = config.n_copies;
  if (n < 2) throw DomainError("run_separable_trial: needs at least 2 copies");
  std::vector<cplx> alphas(static_cast<std::size_t>(n));
  cplx mean = 0.0;
  for (auto& a : alphas) {
    a = sample_heterodyne(config.state(), rng).alpha;
    mean += a;
  }
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& a : alphas) spread += std::norm(a - mean);
  return {mean, spread / static_cast<double>(n - 1) - 1.0};
}

inline Estimate run_known_n_trial(const ExperimentConfig& config, RngStream& rng) {
  const std::int64_t n = config.n_copies;
  if (n < 1) throw DomainError("run_known_n_trial: needs at least 1 copy");
  cplx mean = 0.0;
  for (std::int64_t i = 0; i < n; ++i) mean += sample_heterodyne(config.state(), rng).alpha;
  return {mean / static_cast<double>(n), std::nullopt};
}

inline Estimate run_trial(const ExperimentConfig& config, RngStream& rng) {
  Estimate e;
  switch (config.protocol) {
    case ProtocolKind::CollectiveConcentration:
      e = run_collective_trial(config, rng);
      break;
    case ProtocolKind::SeparableHeterodyne:
      e = run_separable_trial(config, rng);
      break;
    case ProtocolKind::KnownNHeterodyne:
      e = run_known_n_trial(config, rng);
      break;
  }
  if (config.clip_nonneg && e.n_hat) e.n_hat = std::max(0.0, *e.n_hat);
  return e;
}

/// theta-hat - theta in (theta1, theta2[, N]) coordinates.
inline RealVector estimation_error(const Estimate& e, const ThetaPoint& theta, int dim) {
  RealVector err(dim);
  err(0) = std::sqrt(2.0) * e.zeta_hat.real() - theta.theta1();
  err(1) = std::sqrt(2.0) * e.zeta_hat.imag() - theta.theta2();
  if (dim == 3) err(2) = e.n_hat.value_or(theta.n_mean()) - theta.n_mean();
  return err;
}

// ---------------------------------------------------------------------------
// MSE matrices.

struct MseMatrix {
  int dim = 0;
  RealMatrix entries;
  std::int64_t trials = 0;
  std::int64_t n_copies = 0;
  double trace_gv = 0.0;     // Tr G V
  double se_trace_gv = 0.0;  // its standard error; NaN below two trials

  double n_trace_gv() const { return static_cast<double>(n_copies) * trace_gv; }
  double n_se() const { return static_cast<double>(n_copies) * se_trace_gv; }
};

struct TrialRecord {
  std::int64_t trial;
  Estimate estimate;
  RealVector error;
};

struct SimulationResult {
  MseMatrix mse;
  std::vector<TrialRecord> records;  // filled only when requested
};

inline unsigned resolve_threads(int threads) {
  if (threads > 0) return static_cast<unsigned>(threads);
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs every trial with its own stream (seed, trial index), stores the
/// per-trial errors, then reduces them in trial order. The result does not
/// depend on `threads`.
inline SimulationResult simulate(const ExperimentConfig& config, int threads = 1, bool keep_records = false) {
  config.validate();
  const int dim = protocol_dim(config.protocol);
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<Estimate> estimates(trials);

  const unsigned workers = std::min<std::size_t>(resolve_threads(threads), trials);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      RngStream rng(config.seed, t);
      estimates[t] = run_trial(config, rng);
    }
  };
  if (workers <= 1) {
    work(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  SimulationResult result;
  MseMatrix& mse = result.mse;
  mse.dim = dim;
  mse.trials = config.trials;
  mse.n_copies = config.n_copies;
  mse.entries = RealMatrix::Zero(dim, dim);
  const RealMatrix& g = config.weight.matrix();
  std::vector<double> quad(trials);
  double quad_sum = 0.0;
  if (keep_records) result.records.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const RealVector err = estimation_error(estimates[t], config.theta, dim);
    mse.entries.noalias() += err * err.transpose();
    quad[t] = err.dot(g * err);
    quad_sum += quad[t];
    if (keep_records) result.records.push_back({static_cast<std::int64_t>(t), estimates[t], err});
  }
  const double count = static_cast<double>(trials);
  mse.entries /= count;
  mse.trace_gv = quad_sum / count;
  if (trials >= 2) {
    double ss = 0.0;
    for (const double q : quad) ss += (q - mse.trace_gv) * (q - mse.trace_gv);
    mse.se_trace_gv = std::sqrt(ss / (count - 1.0) / count);
  } else {
    mse.se_trace_gv = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

inline MseMatrix monte_carlo_mse(const ExperimentConfig& config, int threads = 1) {
  return simulate(config, threads).mse;
}

// ---------------------------------------------------------------------------
// Comparison with the bounds.

/// Exact n Tr G V at finite n for a block-form weight, from the Gaussian and
/// geometric moments of each protocol (no clipping):
///   zeta part     2 g1 (N + 1)                    (all protocols)
///   N, collective g0 n N (N + 1) / (n - 1)
///   N, separable  g0 n (N + 1)^2 / (n - 1)
inline double exact_n_trace_gv(ProtocolKind kind, const WeightMatrix::BlockParams& g, double n_mean,
                               std::int64_t n_copies) {
  const double n = static_cast<double>(n_copies);
  const double zeta_part = 2.0 * g.g1 * (n_mean + 1.0);
  switch (kind) {
    case ProtocolKind::CollectiveConcentration:
      return zeta_part + g.g0 * n * n_mean * (n_mean + 1.0) / (n - 1.0);
    case ProtocolKind::SeparableHeterodyne:
      return zeta_part + g.g0 * n * (n_mean + 1.0) * (n_mean + 1.0) / (n - 1.0);
    case ProtocolKind::KnownNHeterodyne:
      return zeta_part;
  }
  return 0.0;
}

/// Limit of exact_n_trace_gv as n -> infinity.
inline double asymptotic_n_trace_gv(ProtocolKind kind, const WeightMatrix::BlockParams& g, double n_mean) {
  const double zeta_part = 2.0 * g.g1 * (n_mean + 1.0);
  switch (kind) {
    case ProtocolKind::CollectiveConcentration:
      return zeta_part + g.g0 * n_mean * (n_mean + 1.0);
    case ProtocolKind::SeparableHeterodyne:
      return zeta_part + g.g0 * (n_mean + 1.0) * (n_mean + 1.0);
    case ProtocolKind::KnownNHeterodyne:
      return zeta_part;
  }
  return 0.0;
}

struct BoundComparison {
  double n_trace_gv;
  double se;
  double c_r;
  double ratio;     // n Tr G V / C^R(G)
  double ratio_se;
  std::optional<double> exact_n_trace_gv;  // block-form weight, no clipping
  std::optional<double> z_vs_exact;        // (estimate - exact) / se
  std::optional<double> asymptotic_ratio;  // n -> infinity limit of ratio
};

inline BoundComparison compare_to_bounds(const MseMatrix& mse, const ExperimentConfig& config) {
  const double n_mean = config.theta.n_mean();
  BoundComparison out{};
  out.n_trace_gv = mse.n_trace_gv();
  out.se = mse.n_se();
  out.c_r = c_r_for(config.weight, n_mean).value;
  out.ratio = out.c_r > 0.0 ? out.n_trace_gv / out.c_r : std::numeric_limits<double>::quiet_NaN();
  out.ratio_se = out.c_r > 0.0 ? out.se / out.c_r : std::numeric_limits<double>::quiet_NaN();
  if (const auto g = config.weight.block_params(); g && !config.clip_nonneg) {
    out.exact_n_trace_gv = exact_n_trace_gv(config.protocol, *g, n_mean, config.n_copies);
    if (out.se > 0.0) out.z_vs_exact = (out.n_trace_gv - *out.exact_n_trace_gv) / out.se;
    if (out.c_r > 0.0) out.asymptotic_ratio = asymptotic_n_trace_gv(config.protocol, *g, n_mean) / out.c_r;
  }
  return out;
}

}  // namespace dtherm
