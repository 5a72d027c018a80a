// mpdesim: command line front end for the multirate PWM simulator.
//
// Results go to stdout as JSON; files go to the config's output.dir or the
// --output override. Failures print {"error": {"code", "message"}} on stderr.

#include "mpde/error.hpp"
#include "mpde/experiment.hpp"
#include "mpde/galerkin.hpp"
#include "mpde/metrics.hpp"
#include "mpde/reference.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, failure = 1, usage = 2, bad_config = 3, solver = 4, check_failed = 5 };

int fail(const std::string& code, const std::string& message, int status) {
  json j{{"error", {{"code", code}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return status;
}

mpde::ExperimentConfig load(const std::string& path, const std::string& output) {
  mpde::ExperimentConfig cfg = mpde::load_config(path);
  if (!output.empty()) cfg.output_dir = fs::path(output);
  cfg.validate();
  return cfg;
}

std::vector<double> parse_tolerances(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad tolerance '" + item + "'");
    out.push_back(v);
  }
  return out;
}

json method(const mpde::MethodReport& m, bool with_errors) {
  json j = json::parse(mpde::stats_to_json(m.stats));
  json out{{"tolerance", m.tolerance}, {"stats", j}, {"wall_seconds", m.wall_seconds}};
  if (with_errors) {
    out["eps_v"] = m.eps_v;
    out["eps_i"] = m.eps_i;
  }
  return out;
}

void write_envelope_csv(const fs::path& path, const mpde::MpdeSolution& sol,
                        const std::vector<std::string>& labels) {
  std::ofstream os(path);
  const int nb = sol.basis.dof_count();
  os << 't';
  for (const auto& l : labels)
    for (int k = 0; k < nb; ++k) os << ',' << l << '_' << k;
  os << '\n';
  os.precision(17);
  const auto& env = sol.envelope;
  for (std::size_t i = 0; i < env.size(); ++i) {
    os << env.time(i);
    for (double v : env.state(i)) os << ',' << v;
    os << '\n';
  }
}

int simulate_mpde(const mpde::ExperimentConfig& cfg, bool with_errors) {
  std::optional<mpde::Trajectory> oracle;
  if (with_errors) oracle = mpde::build_oracle(cfg);
  std::optional<mpde::MpdeResult> kept;
  const auto rep = mpde::run_mpde(cfg, oracle ? &*oracle : nullptr, &kept);
  if (cfg.output_dir) {
    fs::create_directories(*cfg.output_dir);
    const auto [a, b] = cfg.span();
    const auto labels = cfg.make_circuit().labels;
    if (cfg.write_trajectories) {
      std::ofstream os(*cfg.output_dir / "mpde.csv");
      mpde::write_trajectory_csv(
          os,
          mpde::reconstruct(kept->solution, mpde::midpoint_grid(a, b, cfg.samples_per_cycle,
                                                                1.0 / cfg.fs)),
          labels);
      write_envelope_csv(*cfg.output_dir / "envelope.csv", kept->solution, labels);
    }
  }
  std::cout << json{{"mpde", method(rep, with_errors)}}.dump(2) << '\n';
  return ok;
}

int simulate_reference(const mpde::ExperimentConfig& cfg, bool with_errors) {
  std::optional<mpde::Trajectory> oracle;
  if (with_errors) oracle = mpde::build_oracle(cfg);
  std::optional<mpde::IntegrationResult> kept;
  const auto rep = mpde::run_reference(cfg, oracle ? &*oracle : nullptr, &kept);
  if (cfg.output_dir && cfg.write_trajectories) {
    fs::create_directories(*cfg.output_dir);
    std::ofstream os(*cfg.output_dir / "reference.csv");
    mpde::write_trajectory_csv(os, kept->trajectory, cfg.make_circuit().labels);
  }
  std::cout << json{{"reference", method(rep, with_errors)}}.dump(2) << '\n';
  return ok;
}

int compare(const mpde::ExperimentConfig& cfg) {
  const auto rep = mpde::run_comparison(cfg);
  std::cout << mpde::report_to_json(rep, cfg) << '\n';
  return ok;
}

int sweep(const mpde::ExperimentConfig& cfg, const std::string& tols) {
  const auto rows = mpde::sweep_tolerances(cfg, parse_tolerances(tols));
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"tolerance", r.tolerance},
                   {"mpde", method(r.report.mpde, true)},
                   {"reference", method(r.report.reference, true)},
                   {"speedup_time_steps", r.report.speedup_steps}});
  }
  std::cout << out.dump(2) << '\n';
  return ok;
}

int verify_affine(int degree, int refine, double fs, const std::string& dump) {
  const double Ts = 1.0 / fs;
  const auto basis = mpde::SplineBasis::uniform(degree, refine, 0.5);
  const auto rep = mpde::verify_affine_structure(basis, Ts);
  if (!dump.empty()) {
    fs::create_directories(dump);
    const auto ops = mpde::GalerkinOperators::build(basis, Ts);
    const std::pair<const char*, Eigen::MatrixXd> mats[] = {
        {"mass_constant.csv", ops.mass.constant},
        {"mass_slope.csv", ops.mass.slope},
        {"transport.csv", ops.transport.constant},
        {"duty_drift.csv", ops.duty_drift.constant},
        {"pwm_load.csv", Eigen::MatrixXd(ops.pwm_load.constant.transpose())},
        {"pwm_load_slope.csv", Eigen::MatrixXd(ops.pwm_load.slope.transpose())}};
    for (const auto& [name, m] : mats) {
      std::ofstream os(fs::path(dump) / name);
      mpde::write_matrix_csv(os, m);
    }
  }
  std::cout << mpde::affine_report_to_json(rep) << '\n';
  if (!rep.passed()) {
    return fail("affine_check_failed", "Galerkin matrices violate the affine duty structure",
                check_failed);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multirate PWM converter simulator"};
  app.require_subcommand(1);

  std::string config, output, tols, dump;
  bool with_errors = false;
  int degree = 1, refine = 1;
  double fs = 5000.0;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config, "experiment JSON document")->required();
    sub->add_option("--output", output, "output directory (overrides output.dir)");
  };

  auto* sim_mpde = app.add_subcommand("simulate-mpde", "envelope solve of the reduced system");
  add_config(sim_mpde);
  sim_mpde->add_flag("--errors", with_errors, "also build the oracle and report errors");

  auto* sim_ref = app.add_subcommand("simulate-reference", "switched transient solve");
  add_config(sim_ref);
  sim_ref->add_flag("--errors", with_errors, "also build the oracle and report errors");

  auto* cmp = app.add_subcommand("compare", "oracle, reference and envelope side by side");
  add_config(cmp);

  auto* swp = app.add_subcommand("sweep", "comparison per tolerance");
  add_config(swp);
  swp->add_option("--tols", tols, "comma separated tolerances")->required();

  auto* thm = app.add_subcommand("verify-theorem1", "check the affine duty structure");
  thm->add_option("--degree", degree, "spline degree p")->required();
  thm->add_option("--refine", refine, "refinement knots K per side")->required();
  thm->add_option("--fs", fs, "switching frequency in Hz");
  thm->add_option("--dump", dump, "directory for CSV dumps of the matrices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what(), usage);
  }

  try {
    if (*thm) return verify_affine(degree, refine, fs, dump);
    const auto cfg = load(config, output);
    if (*sim_mpde) return simulate_mpde(cfg, with_errors);
    if (*sim_ref) return simulate_reference(cfg, with_errors);
    if (*cmp) return compare(cfg);
    if (*swp) return sweep(cfg, tols);
  } catch (const mpde::SolverError& e) {
    return fail(e.code(), e.what(), solver);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_input", e.what(), bad_config);
  } catch (const std::domain_error& e) {
    return fail("domain_error", e.what(), bad_config);
  } catch (const std::exception& e) {
    return fail("internal_error", e.what(), failure);
  }
  return failure;
}
