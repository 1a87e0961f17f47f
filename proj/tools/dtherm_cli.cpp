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

// Command-line front end: bounds, Monte Carlo experiments and Fock-space
// oracle checks.
//
// Exit codes: 0 success, 1 check failure, 2 usage or input error,
// 3 mathematical-domain error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtherm/bounds.hpp"
#include "dtherm/estimator.hpp"
#include "dtherm/fock.hpp"
#include "dtherm/weight_io.hpp"
#include "json.hpp"

namespace {

using dtherm::cplx;
using json = nlohmann::json;

constexpr const char* kSchemaVersion = "1";

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2, kDomain = 3 };

/// Reads a flat JSON object whose keys are long option names ("n-mean" or
/// "n_mean") into CLI11 config items addressed to the subcommand being run.
/// Values given on the command line win.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    const auto active = root_->get_subcommands();
    if (active.empty()) throw CLI::ConversionError("--config needs a subcommand");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.parents = {active.front()->get_name()};
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_string()) {
        item.inputs = {value.get<std::string>()};
      } else if (value.is_boolean()) {
        item.inputs = {value.get<bool>() ? "true" : "false"};
      } else if (value.is_number()) {
        item.inputs = {value.dump()};
      } else {
        throw CLI::ConversionError("config key '" + key + "' must be a string, number or boolean");
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;
};

struct Common {
  double n_mean = 1.0;
  double zeta_re = 0.0;
  double zeta_im = 0.0;
  std::optional<double> theta1;
  std::optional<double> theta2;
  std::string weight;
  bool as_json = false;
  std::string out;
};

struct BoundsArgs {
  Common common;
  bool known_n = false;
};

struct SimulateArgs {
  Common common;
  std::string protocol = "collective";
  std::int64_t n_copies = 100;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  bool clip_nonneg = false;
  bool paper_table = false;
  std::string trial_csv;
};

struct OracleArgs {
  Common common;
  std::optional<dtherm::Index> cutoff;
  bool deep = false;
};

void add_common(CLI::App* cmd, Common& c, double default_zeta_re) {
  c.zeta_re = default_zeta_re;
  cmd->add_option("--n-mean", c.n_mean, "Mean thermal photon number N (> 0)")->capture_default_str();
  auto* zr = cmd->add_option("--zeta-re", c.zeta_re, "Re(zeta)")->capture_default_str();
  auto* zi = cmd->add_option("--zeta-im", c.zeta_im, "Im(zeta)")->capture_default_str();
  auto* t1 = cmd->add_option("--theta1", c.theta1, "theta1 = sqrt(2) Re(zeta)");
  auto* t2 = cmd->add_option("--theta2", c.theta2, "theta2 = sqrt(2) Im(zeta)");
  t1->excludes(zr)->excludes(zi);
  t2->excludes(zr)->excludes(zi);
  cmd->add_flag("--json", c.as_json, "Write JSON instead of a text table");
  cmd->add_option("--out", c.out, "Write the result to this file (a manifest goes to <out>.manifest.json)");
}

dtherm::ThetaPoint theta_from(const Common& c) {
  if (c.theta1 || c.theta2) return dtherm::ThetaPoint(c.theta1.value_or(0.0), c.theta2.value_or(0.0), c.n_mean);
  return dtherm::ThetaPoint::from_zeta(cplx(c.zeta_re, c.zeta_im), c.n_mean);
}

json matrix_json(const dtherm::RealMatrix& m) {
  json rows = json::array();
  for (dtherm::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (dtherm::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string command_line(int argc, char** argv) {
  std::ostringstream os;
  for (int i = 0; i < argc; ++i) {
    if (i) os << ' ';
    const std::string arg = argv[i];
    if (arg.find_first_of(" \t\"'") == std::string::npos && !arg.empty()) {
      os << arg;
    } else {
      os << std::quoted(arg);
    }
  }
  return os.str();
}

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw dtherm::InputError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }

 private:
  std::string path_;
  std::ofstream file_;
};

struct ManifestInfo {
  std::string command;
  std::chrono::steady_clock::time_point start;
};

void write_manifest(const std::string& target, const ManifestInfo& info, json config, json extra = json::object()) {
  if (target.empty()) return;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - info.start).count();
  json manifest = {
      {"schema_version", kSchemaVersion},
      {"command_line", info.command},
      {"wall_time_seconds", wall},
      {"config", std::move(config)},
      {"rng", {{"mixer", dtherm::RngStream::kMixerId}, {"normals", dtherm::RngStream::kNormalId}}},
  };
  manifest.update(extra);
  std::ofstream out(target + ".manifest.json");
  if (!out) throw dtherm::InputError("cannot write manifest for '" + target + "'");
  out << manifest.dump(2) << '\n';
}

std::string num(double v, int digits = 12) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// bounds

int run_bounds(const BoundsArgs& args, const ManifestInfo& info) {
  const Common& c = args.common;
  const std::string weight_spec = c.weight.empty() ? (args.known_n ? "identity2" : "identity3") : c.weight;
  const dtherm::WeightMatrix weight = dtherm::load_weight(weight_spec);
  if (args.known_n && weight.dim() != 2) {
    throw dtherm::InputError("--known-n takes a 2x2 weight; '" + weight_spec + "' is 3x3");
  }
  const double n = c.n_mean;
  dtherm::require_positive_n_mean(n, "bounds");

  const dtherm::BoundValue general = dtherm::c_r_for(weight, n);
  json result = {{"n_mean", n}, {"weight", matrix_json(weight.matrix())}, {"c_r_general", general.value}};
  std::optional<dtherm::BoundValue> closed;
  std::optional<dtherm::GaussianTradeoff> squeeze;
  if (const auto g = weight.block_params()) {
    closed = weight.dim() == 2 ? dtherm::c_r_closed_2param(g->g1, g->g2, g->g3, n)
                               : dtherm::c_r_closed_3param(g->g0, g->g1, g->g2, g->g3, n);
    if (g->g1 > 0.0) squeeze = dtherm::optimal_gaussian_tradeoff(g->g1, g->g2, g->g3, n);
  }
  if (closed) {
    result["c_r_closed"] = closed->value;
    result["closed_form"] = std::string(dtherm::to_string(closed->kind));
    result["difference"] = general.value - closed->value;
  } else {
    result["c_r_closed"] = nullptr;
    result["closed_form"] = nullptr;
    result["difference"] = nullptr;
  }
  if (squeeze) {
    result["squeezed_heterodyne"] = {{"squeeze_r", squeeze->squeeze_r},
                                     {"squeeze_angle", squeeze->squeeze_angle},
                                     {"achieved", squeeze->achieved},
                                     {"iterations", squeeze->iterations}};
  }

  Output out(c.out);
  if (c.as_json) {
    out.stream() << result.dump(2) << '\n';
  } else {
    auto& os = out.stream();
    os << "N                      " << num(n) << '\n';
    os << "weight                 " << matrix_json(weight.matrix()).dump() << '\n';
    os << "C^R (general formula)  " << num(general.value) << '\n';
    if (closed) {
      os << "C^R (closed form)      " << num(closed->value) << "  [" << dtherm::to_string(closed->kind) << "]\n";
      os << "difference             " << num(general.value - closed->value, 3) << '\n';
    } else {
      os << "C^R (closed form)      n/a (weight is not of block form)\n";
    }
    if (squeeze) {
      os << "squeezed heterodyne    r* = " << num(squeeze->squeeze_r, 10) << ", angle = "
         << num(squeeze->squeeze_angle, 10) << ", cost = " << num(squeeze->achieved) << '\n';
    }
  }
  write_manifest(c.out, info, {{"command", "bounds"}, {"n_mean", n}, {"weight", weight_spec}, {"known_n", args.known_n}});
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

dtherm::ExperimentConfig experiment_from(const SimulateArgs& args, const dtherm::ThetaPoint& theta,
                                         std::int64_t n_copies, dtherm::ProtocolKind kind) {
  std::string source = args.common.weight;
  if (source.empty()) source = dtherm::protocol_dim(kind) == 2 ? "identity2" : "identity3";
  dtherm::WeightMatrix weight = dtherm::load_weight(source);
  if (weight.dim() != dtherm::protocol_dim(kind)) {
    throw dtherm::InputError("protocol '" + std::string(dtherm::to_string(kind)) + "' needs a " +
                             std::to_string(dtherm::protocol_dim(kind)) + "x" +
                             std::to_string(dtherm::protocol_dim(kind)) + " weight");
  }
  return dtherm::ExperimentConfig{kind, theta, n_copies, args.trials, args.seed, std::move(weight), args.clip_nonneg};
}

json config_echo(const dtherm::ExperimentConfig& cfg) {
  return {{"protocol", std::string(dtherm::to_string(cfg.protocol))},
          {"n_mean", cfg.theta.n_mean()},
          {"zeta_re", cfg.theta.zeta().real()},
          {"zeta_im", cfg.theta.zeta().imag()},
          {"n_copies", cfg.n_copies},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"weight", matrix_json(cfg.weight.matrix())},
          {"clip_nonneg", cfg.clip_nonneg}};
}

json summary_json(const dtherm::ExperimentConfig& cfg, const dtherm::MseMatrix& mse) {
  const dtherm::BoundComparison cmp = dtherm::compare_to_bounds(mse, cfg);
  return {{"schema_version", kSchemaVersion},
          {"n", mse.n_copies},
          {"trials", mse.trials},
          {"mse_entries", matrix_json(mse.entries)},
          {"trace_gv", mse.trace_gv},
          {"n_trace_gv", cmp.n_trace_gv},
          {"se", number_or_null(cmp.se)},
          {"c_r", cmp.c_r},
          {"ratio", number_or_null(cmp.ratio)},
          {"ratio_se", number_or_null(cmp.ratio_se)},
          {"exact_n_trace_gv", number_or_null(cmp.exact_n_trace_gv)},
          {"z_vs_exact", number_or_null(cmp.z_vs_exact)},
          {"asymptotic_ratio", number_or_null(cmp.asymptotic_ratio)},
          {"seed", cfg.seed},
          {"config", config_echo(cfg)},
          {"rng", {{"mixer", dtherm::RngStream::kMixerId}, {"normals", dtherm::RngStream::kNormalId}}}};
}

void write_trial_csv(const std::string& path, const dtherm::SimulationResult& result) {
  std::ofstream csv(path);
  if (!csv) throw dtherm::InputError("cannot open '" + path + "' for writing");
  csv << "trial,zeta_hat_re,zeta_hat_im,n_hat,err_sq_theta1,err_sq_theta2,err_sq_n\n";
  csv << std::setprecision(17);
  for (const auto& rec : result.records) {
    csv << rec.trial << ',' << rec.estimate.zeta_hat.real() << ',' << rec.estimate.zeta_hat.imag() << ',';
    if (rec.estimate.n_hat) csv << *rec.estimate.n_hat;
    csv << ',' << rec.error(0) * rec.error(0) << ',' << rec.error(1) * rec.error(1) << ',';
    if (rec.error.size() == 3) csv << rec.error(2) * rec.error(2);
    csv << '\n';
  }
}

int run_paper_table(const SimulateArgs& args, const ManifestInfo& info) {
  const cplx zeta = theta_from(args.common).zeta();
  json rows = json::array();
  for (double n_mean : {0.5, 1.0, 2.0}) {
    for (std::int64_t n : {10, 100, 1000}) {
      const dtherm::ThetaPoint theta = dtherm::ThetaPoint::from_zeta(zeta, n_mean);
      const auto coll_cfg = experiment_from(args, theta, n, dtherm::ProtocolKind::CollectiveConcentration);
      const auto sep_cfg = experiment_from(args, theta, n, dtherm::ProtocolKind::SeparableHeterodyne);
      const auto coll = dtherm::compare_to_bounds(dtherm::monte_carlo_mse(coll_cfg, args.threads), coll_cfg);
      const auto sep = dtherm::compare_to_bounds(dtherm::monte_carlo_mse(sep_cfg, args.threads), sep_cfg);
      rows.push_back({{"n_mean", n_mean},
                      {"n", n},
                      {"c_r", coll.c_r},
                      {"collective_n_trace_gv", coll.n_trace_gv},
                      {"collective_se", number_or_null(coll.se)},
                      {"separable_n_trace_gv", sep.n_trace_gv},
                      {"separable_se", number_or_null(sep.se)},
                      {"separable_over_collective", sep.n_trace_gv / coll.n_trace_gv},
                      {"collective_exact", number_or_null(coll.exact_n_trace_gv)},
                      {"separable_exact", number_or_null(sep.exact_n_trace_gv)}});
    }
  }
  json table = {{"schema_version", kSchemaVersion},
                {"label", "collective vs separable weighted MSE grid (artifact output)"},
                {"trials", args.trials},
                {"seed", args.seed},
                {"zeta_re", zeta.real()},
                {"zeta_im", zeta.imag()},
                {"rows", rows}};
  Output out(args.common.out);
  if (args.common.as_json) {
    out.stream() << table.dump(2) << '\n';
  } else {
    auto& os = out.stream();
    os << "collective vs separable weighted MSE grid (artifact output), trials=" << args.trials
       << " seed=" << args.seed << '\n';
    os << std::left << std::setw(6) << "N" << std::setw(7) << "n" << std::setw(10) << "C^R" << std::setw(22)
       << "collective nTrGV" << std::setw(22) << "separable nTrGV" << "sep/coll\n";
    for (const auto& r : rows) {
      os << std::setw(6) << num(r["n_mean"].get<double>(), 3) << std::setw(7) << r["n"].get<std::int64_t>()
         << std::setw(10) << num(r["c_r"].get<double>(), 6) << std::setw(22)
         << num(r["collective_n_trace_gv"].get<double>(), 6) << std::setw(22)
         << num(r["separable_n_trace_gv"].get<double>(), 6)
         << num(r["separable_over_collective"].get<double>(), 5) << '\n';
    }
  }
  write_manifest(args.common.out, info, {{"command", "simulate --paper-table"}, {"trials", args.trials}, {"seed", args.seed}},
                 {{"threads", args.threads}});
  return kOk;
}

int run_simulate(const SimulateArgs& args, const ManifestInfo& info) {
  if (args.trials < 100) throw dtherm::InputError("--trials must be at least 100");
  if (args.paper_table) return run_paper_table(args, info);
  if (args.n_copies < 2) throw dtherm::InputError("--n-copies must be at least 2");
  const auto kind = dtherm::parse_protocol(args.protocol);
  if (!kind) {
    throw dtherm::InputError("unknown protocol '" + args.protocol + "' (expected collective, separable or known-n)");
  }
  const dtherm::ThetaPoint theta = theta_from(args.common);
  const dtherm::ExperimentConfig cfg = experiment_from(args, theta, args.n_copies, *kind);
  const dtherm::SimulationResult result = dtherm::simulate(cfg, args.threads, !args.trial_csv.empty());
  const json summary = summary_json(cfg, result.mse);

  Output out(args.common.out);
  if (args.common.as_json) {
    out.stream() << summary.dump(2) << '\n';
  } else {
    auto& os = out.stream();
    os << "protocol        " << dtherm::to_string(cfg.protocol) << '\n';
    os << "n, trials       " << cfg.n_copies << ", " << cfg.trials << '\n';
    os << "n Tr G V        " << num(summary["n_trace_gv"].get<double>(), 8) << " +/- "
       << num(result.mse.n_se(), 3) << '\n';
    os << "C^R(G)          " << num(summary["c_r"].get<double>(), 8) << '\n';
    os << "ratio           " << num(result.mse.n_trace_gv() / summary["c_r"].get<double>(), 6) << '\n';
    if (!summary["exact_n_trace_gv"].is_null()) {
      os << "exact finite-n  " << num(summary["exact_n_trace_gv"].get<double>(), 8) << '\n';
    }
  }
  if (!args.trial_csv.empty()) {
    write_trial_csv(args.trial_csv, result);
    write_manifest(args.trial_csv, info, config_echo(cfg), {{"threads", args.threads}});
  }
  write_manifest(args.common.out, info, config_echo(cfg), {{"threads", args.threads}});
  return kOk;
}

// ---------------------------------------------------------------------------
// oracle-check

struct CheckRow {
  std::string name;
  double deviation;
  double tolerance;  // 0 demands exact equality
  bool pass() const { return tolerance == 0.0 ? deviation == 0.0 : deviation < tolerance; }
};

int run_oracle_check(const OracleArgs& args, const ManifestInfo& info) {
  namespace fk = dtherm::fock;
  const dtherm::ThetaPoint theta = theta_from(args.common);
  const double n = theta.n_mean();
  const cplx zeta = theta.zeta();
  const double amp = std::abs(zeta);

  auto cutoff_for = [&](double amplitude, double tol) {
    const dtherm::Index needed = fk::required_cutoff(n, amplitude, tol);
    if (!args.cutoff) return needed;
    const dtherm::Index floor_needed = fk::required_cutoff(n, amplitude, 1e-8);
    if (*args.cutoff < floor_needed) {
      std::ostringstream os;
      os << "--cutoff " << *args.cutoff << " leaves a tail above 1e-8 for N=" << n << ", |zeta|=" << amplitude
         << "; need D >= " << floor_needed;
      throw dtherm::PreconditionError(os.str());
    }
    return *args.cutoff;
  };

  std::vector<CheckRow> rows;

  {
    // Heterodyne density: Fock oracle <alpha|rho|alpha>/pi vs the Gaussian.
    // The coherent vectors reach |alpha| ~ 3, so the default cutoff covers them too.
    const dtherm::Index d =
        args.cutoff ? cutoff_for(amp, 1e-8) : std::max(cutoff_for(amp, 1e-12), fk::required_cutoff(n, 3.0, 1e-12));
    const fk::FockOperator rho = fk::displaced_thermal_density(zeta, n, d);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int k = 0; k < 5; ++k) {
        const cplx alpha(-2.1 + 1.05 * i, -2.1 + 1.05 * k);
        worst = std::max(worst, std::abs(fk::povm_probability(rho, fk::HeterodyneOutcome{alpha}) -
                                         dtherm::heterodyne_pdf({zeta, n}, alpha)));
      }
    }
    rows.push_back({"heterodyne_pdf", worst, 1e-6});
  }
  {
    const fk::FockOperator thermal = fk::thermal_density(n, cutoff_for(0.0, 1e-12));
    double worst = 0.0;
    for (dtherm::Index k = 0; k < thermal.cutoff(); ++k) {
      worst = std::max(worst, std::abs(fk::povm_probability(thermal, fk::PhotonOutcome{k}) - dtherm::photon_pmf(n, k)));
    }
    rows.push_back({"photon_pmf", worst, 1e-12});
  }
  {
    rows.push_back({"concentration_angle_1", std::abs(fk::concentration_angle(1) - std::numbers::pi / 4.0), 0.0});
    const dtherm::Index d = cutoff_for(std::sqrt(2.0) * amp, 1e-8);
    const fk::ConcentrationReport r = fk::verify_concentration_n2(zeta, n, d);
    rows.push_back({"concentration_n2", std::max(r.dist_first, r.dist_second), 1e-6});
  }
  if (args.deep) {
    const dtherm::Index d = cutoff_for(std::sqrt(3.0) * amp, 1e-8);
    const fk::ConcentrationReport r = fk::verify_concentration_n3(zeta, n, d);
    rows.push_back({"concentration_n3", std::max(r.dist_first, r.dist_second), 1e-6});
  }
  {
    const dtherm::Index d = cutoff_for(amp, 1e-8);
    const dtherm::ComplexMatrix j2 = fk::numeric_rld_fisher(fk::Family::TwoParam, theta, d);
    rows.push_back({"rld_2param", dtherm::max_abs(j2.inverse() - dtherm::rld_inverse_2param(n)), 1e-3});
    const dtherm::ComplexMatrix j3 = fk::numeric_rld_fisher(fk::Family::ThreeParam, theta, d);
    rows.push_back({"rld_3param", dtherm::max_abs(j3.inverse() - dtherm::rld_inverse_3param(n)), 1e-3});
  }
  bool all_pass = true;
  json checks = json::array();
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass();
    checks.push_back({{"check", r.name}, {"max_deviation", r.deviation}, {"pass", r.pass()}});
  }
  Output out(args.common.out);
  if (args.common.as_json) {
    out.stream() << json{{"n_mean", n}, {"zeta_re", zeta.real()}, {"zeta_im", zeta.imag()},
                         {"checks", checks}, {"pass", all_pass}}
                        .dump(2)
                 << '\n';
  } else {
    auto& os = out.stream();
    os << "oracle checks at N=" << n << ", zeta=" << zeta.real() << (zeta.imag() < 0 ? "" : "+") << zeta.imag()
       << "i\n";
    for (const auto& r : rows) {
      os << std::left << std::setw(24) << r.name << std::setw(14) << num(r.deviation, 4)
         << (r.pass() ? "PASS" : "FAIL") << '\n';
    }
  }
  if (!all_pass) {
    for (const auto& r : rows)
      if (!r.pass()) std::cerr << "check failed: " << r.name << " (deviation " << r.deviation << ")\n";
  }
  write_manifest(args.common.out, info,
                 {{"command", "oracle-check"}, {"n_mean", n}, {"zeta_re", zeta.real()}, {"zeta_im", zeta.imag()},
                  {"deep", args.deep}});
  return all_pass ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  const ManifestInfo info{command_line(argc, argv), std::chrono::steady_clock::now()};

  CLI::App app{"Displaced thermal state estimation: bounds, experiments and oracle checks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file mirroring the subcommand's flags; flags on the command line win");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  BoundsArgs bounds_args;
  auto* bounds = app.add_subcommand("bounds", "Evaluate C^R(G) and the optimal squeezed heterodyne");
  add_common(bounds, bounds_args.common, 0.0);
  bounds->add_option("--weight", bounds_args.common.weight, "identity2, identity3 or a weight file");
  bounds->add_flag("--known-n", bounds_args.known_n, "Use the two-parameter family with N known");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo MSE of an estimation protocol");
  add_common(sim, sim_args.common, 0.0);
  sim->add_option("--weight", sim_args.common.weight, "identity2, identity3 or a weight file");
  sim->add_option("--protocol", sim_args.protocol, "collective, separable or known-n")->capture_default_str();
  sim->add_option("--n-copies", sim_args.n_copies, "Copies per trial (n >= 2)")->capture_default_str();
  sim->add_option("--trials", sim_args.trials, "Monte Carlo trials (>= 100)")->capture_default_str();
  sim->add_option("--seed", sim_args.seed, "RNG seed")->capture_default_str();
  sim->add_option("--threads", sim_args.threads, "Worker threads (0 = available cores)")->capture_default_str();
  sim->add_flag("--clip-nonneg", sim_args.clip_nonneg, "Clamp N-hat at zero before scoring");
  sim->add_flag("--paper-table", sim_args.paper_table, "Run the N x n grid for collective and separable");
  sim->add_option("--trial-csv", sim_args.trial_csv, "Write per-trial estimates to this CSV file");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-check", "Cross-check the sampling laws against the Fock-space oracle");
  add_common(oracle, oracle_args.common, 0.5);
  oracle->add_option("--cutoff", oracle_args.cutoff, "Fock cutoff D (default: chosen from tail bounds)");
  oracle->add_flag("--deep", oracle_args.deep, "Also run the three-copy cascade check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (bounds->parsed()) return run_bounds(bounds_args, info);
    if (sim->parsed()) return run_simulate(sim_args, info);
    return run_oracle_check(oracle_args, info);
  } catch (const dtherm::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const dtherm::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const dtherm::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const dtherm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kDomain;
  }
}
