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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance_test <path to dtherm_cli>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "dtherm/bounds.hpp"
#include "dtherm/estimator.hpp"
#include "dtherm/fock.hpp"

using namespace dtherm;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

int failures = 0;

void criterion(int id, const std::string& title, double budget_seconds, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed > budget_seconds) {
    v.pass = false;
    v.detail += "; over the " + fmt(budget_seconds) + " s budget";
  }
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << "  " << id << ". " << title << ": " << v.detail << " [" << fmt(elapsed)
            << " s]" << std::endl;
}

// Random PSD 2x2 block written as (g1, g2, g3) with g1 >= sqrt(g2^2 + g3^2).
WeightMatrix::BlockParams random_block(std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Eigen::Matrix2d b;
  b << normal(gen), normal(gen), normal(gen), normal(gen);
  const Eigen::Matrix2d g = b * b.transpose();
  WeightMatrix::BlockParams p;
  p.g1 = 0.5 * (g(0, 0) + g(1, 1));
  p.g2 = 0.5 * (g(0, 0) - g(1, 1));
  p.g3 = g(0, 1);
  p.g0 = std::abs(normal(gen));
  return p;
}

ExperimentConfig experiment(ProtocolKind kind, std::int64_t trials) {
  return ExperimentConfig{kind,   ThetaPoint::from_zeta(cplx(0.7071, 0.0), 1.0),
                          100,    trials,
                          42,     WeightMatrix::identity(protocol_dim(kind))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_test <path to dtherm_cli>\n";
    return 2;
  }
  const std::string cli = argv[1];

  criterion(1, "closed forms agree with the general C^R formula", 1.0, [] {
    std::mt19937_64 gen(20260101);
    double worst = 0.0;
    int cases = 0;
    for (int i = 0; i < 200; ++i) {
      const auto b = random_block(gen);
      for (double n : {0.5, 1.0, 2.0}) {
        const double g2 = c_r_general(WeightMatrix::two_param(b.g1, b.g2, b.g3), rld_inverse_2param(n)).value;
        worst = std::max(worst, std::abs(g2 - c_r_closed_2param(b.g1, b.g2, b.g3, n).value));
        const double g3 =
            c_r_general(WeightMatrix::block(b.g0, b.g1, b.g2, b.g3), rld_inverse_3param(n)).value;
        worst = std::max(worst, std::abs(g3 - c_r_closed_3param(b.g0, b.g1, b.g2, b.g3, n).value));
        cases += 2;
      }
    }
    return Verdict{worst < 1e-10, std::to_string(cases) + " cases, max |diff| = " + fmt(worst)};
  });

  criterion(2, "numeric RLD Fisher information inverts to the tabulated matrices", 30.0, [] {
    double worst = 0.0;
    for (double n : {0.5, 1.0, 2.0}) {
      for (cplx zeta : {cplx(0.0), cplx(0.3, 0.4)}) {
        const Index d = fock::required_cutoff(n, std::abs(zeta), 1e-8);
        const ThetaPoint theta = ThetaPoint::from_zeta(zeta, n);
        const ComplexMatrix j2 = fock::numeric_rld_fisher(fock::Family::TwoParam, theta, d, 1e-4);
        worst = std::max(worst, max_abs(j2.inverse() - rld_inverse_2param(n)));
        const ComplexMatrix j3 = fock::numeric_rld_fisher(fock::Family::ThreeParam, theta, d, 1e-4);
        worst = std::max(worst, max_abs(j3.inverse() - rld_inverse_3param(n)));
      }
    }
    return Verdict{worst < 1e-3, "max entrywise deviation = " + fmt(worst)};
  });

  criterion(3, "sampling laws match the Fock-space oracle", 10.0, [] {
    double worst_q = 0.0;
    double worst_p = 0.0;
    for (double z : {0.0, 0.5}) {
      for (double n : {0.5, 1.0}) {
        const Index d = std::max(fock::required_cutoff(n, z, 1e-12), fock::required_cutoff(n, 3.0, 1e-12));
        const fock::FockOperator rho = fock::displaced_thermal_density(z, n, d);
        for (int i = 0; i < 5; ++i) {
          for (int k = 0; k < 5; ++k) {
            const cplx alpha(-2.1 + 1.05 * i, -2.1 + 1.05 * k);  // |alpha| <= 2.97
            worst_q = std::max(worst_q, std::abs(fock::povm_probability(rho, fock::HeterodyneOutcome{alpha}) -
                                                 heterodyne_pdf({z, n}, alpha)));
          }
        }
        const fock::FockOperator thermal = fock::thermal_density(n, d);
        for (Index k = 0; k < d; ++k) {
          worst_p = std::max(worst_p, std::abs(thermal.matrix(k, k).real() - photon_pmf(n, k)));
        }
      }
    }
    return Verdict{worst_q < 1e-6 && worst_p < 1e-12,
                   "heterodyne max dev = " + fmt(worst_q) + ", photon max dev = " + fmt(worst_p)};
  });

  criterion(4, "two-copy concentration identity", 20.0, [] {
    const bool exact_angle = fock::concentration_angle(1) == std::numbers::pi / 4.0;
    const Index d = fock::required_cutoff(0.5, std::sqrt(2.0) * 0.5, 1e-8);
    const auto r = fock::verify_concentration_n2(0.5, 0.5, d);
    return Verdict{exact_angle && r.dist_first < 1e-6 && r.dist_second < 1e-6,
                   "D = " + std::to_string(d) + ", trace distances " + fmt(r.dist_first) + ", " +
                       fmt(r.dist_second) + ", phi_1 == pi/4: " + (exact_angle ? "yes" : "no")};
  });

  const auto coll_cfg = experiment(ProtocolKind::CollectiveConcentration, 100000);
  MseMatrix coll;
  criterion(5, "collective protocol attains C^R(I)", 60.0, [&] {
    coll = monte_carlo_mse(coll_cfg, 0);
    const double exact = exact_n_trace_gv(coll_cfg.protocol, *coll_cfg.weight.block_params(), 1.0, 100);
    const double c_r = c_r_for(coll_cfg.weight, 1.0).value;
    const double z = (coll.n_trace_gv() - exact) / coll.n_se();
    const double rel = std::abs(coll.n_trace_gv() - c_r) / c_r;
    return Verdict{std::abs(z) <= 3.0 && rel < 0.02,
                   "n Tr V = " + fmt(coll.n_trace_gv()) + " +/- " + fmt(coll.n_se()) + ", exact " + fmt(exact) +
                       " (z = " + fmt(z) + "), C^R = " + fmt(c_r) + " (rel " + fmt(rel) + ")"};
  });

  criterion(6, "separable heterodyne is strictly worse", 60.0, [&] {
    const auto cfg = experiment(ProtocolKind::SeparableHeterodyne, 100000);
    const MseMatrix sep = monte_carlo_mse(cfg, 0);
    const double exact = exact_n_trace_gv(cfg.protocol, *cfg.weight.block_params(), 1.0, 100);
    const double z = (sep.n_trace_gv() - exact) / sep.n_se();
    const double gap = sep.n_trace_gv() - coll.n_trace_gv();
    const double gap_se = std::hypot(sep.n_se(), coll.n_se());
    return Verdict{std::abs(z) <= 3.0 && gap >= 5.0 * gap_se,
                   "n Tr V = " + fmt(sep.n_trace_gv()) + " +/- " + fmt(sep.n_se()) + ", exact " + fmt(exact) +
                       " (z = " + fmt(z) + "), gap over collective = " + fmt(gap / gap_se) + " SE"};
  });

  criterion(7, "known-N heterodyne attains the two-parameter bound", 60.0, [] {
    const auto cfg = experiment(ProtocolKind::KnownNHeterodyne, 100000);
    const MseMatrix m = monte_carlo_mse(cfg, 0);
    const double target = c_r_closed_2param(1.0, 0.0, 0.0, 1.0).value;
    const double z = (m.n_trace_gv() - target) / m.n_se();
    return Verdict{std::abs(z) <= 3.0,
                   "n Tr V = " + fmt(m.n_trace_gv()) + " +/- " + fmt(m.n_se()) + ", target " + fmt(target) +
                       " (z = " + fmt(z) + ")"};
  });

  criterion(8, "optimal squeezed heterodyne reaches the two-parameter bound", 5.0, [] {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double g1 = 0.1 + 3.0 * unit(gen);
      const double radius = g1 * unit(gen);
      const double angle = 2.0 * std::numbers::pi * unit(gen);
      const double g2 = radius * std::cos(angle);
      const double g3 = radius * std::sin(angle);
      const double n = 0.1 + 3.0 * unit(gen);
      const auto t = optimal_gaussian_tradeoff(g1, g2, g3, n);
      worst = std::max(worst, std::abs(t.achieved - c_r_closed_2param(g1, g2, g3, n).value));
    }
    return Verdict{worst < 1e-6, "50 weights, max |achieved - bound| = " + fmt(worst)};
  });

  criterion(9, "simulate summaries are independent of --threads", 60.0, [&] {
    const fs::path dir = fs::temp_directory_path() / "dtherm_acceptance";
    fs::create_directories(dir);
    const std::string base = "'" + cli + "' simulate --protocol collective --n-mean 1 --zeta-re 0.7071 "
                             "--n-copies 100 --trials 20000 --seed 42 --json";
    const fs::path a = dir / "threads1.json";
    const fs::path b = dir / "threads4.json";
    const int ra = std::system((base + " --threads 1 --out '" + a.string() + "'").c_str());
    const int rb = std::system((base + " --threads 4 --out '" + b.string() + "'").c_str());
    if (ra != 0 || rb != 0) return Verdict{false, "dtherm_cli exited with a non-zero status"};
    const std::string sa = slurp(a);
    const std::string sb = slurp(b);
    return Verdict{!sa.empty() && sa == sb, std::to_string(sa.size()) + " bytes, identical: " +
                                                (sa == sb ? std::string("yes") : std::string("no"))};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
