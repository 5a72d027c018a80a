#include "mpde/experiment.hpp"

#include "mpde/error.hpp"
#include "mpde/galerkin.hpp"
#include "mpde/metrics.hpp"
#include "mpde/reference.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mpde {

using nlohmann::json;

const StudySetting kStudySettings[3] = {
    {"lowest order", 1, 1, 1e-3, 1e-2},
    {"medium order", 2, 1, 1e-4, 1e-4},
    {"high order", 3, 3, 1e-7, 1e-6},
};

SplineBasis BasisSetting::build(double duty) const {
  if (alphas.empty() && betas.empty()) return SplineBasis::uniform(degree, refine, duty);
  return SplineBasis(degree, refine, alphas, betas, duty);
}

LinearCircuit ExperimentConfig::make_circuit() const { return buck_circuit(circuit); }

PwmExcitation ExperimentConfig::make_excitation() const {
  const DutyCycleProfile duty = duty_kind == DutyKind::constant
                                    ? DutyCycleProfile::constant(duty_value)
                                    : DutyCycleProfile::sinusoidal(v_desired, v_peak, f_ac);
  return PwmExcitation(v_peak, fs, duty);
}

std::pair<double, double> ExperimentConfig::span() const {
  if (t_span) return *t_span;
  if (duty_kind == DutyKind::sinusoidal) return {0.0, 4.0 / f_ac};
  return {0.0, 20.0 / fs};
}

void ExperimentConfig::validate() const {
  const auto [a, b] = span();
  if (!(b > a)) throw std::invalid_argument("t_span must have positive length");
  if (samples_per_cycle < 1) throw std::invalid_argument("samples_per_cycle must be >= 1");
  mpde_solver.validate();
  reference_solver.validate();
  (void)make_circuit();
  (void)make_excitation();
  (void)basis.build(0.5);
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) {
      throw std::invalid_argument("unknown field '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_opt(const json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<double>();
  }
}

SolverConfig parse_solver(const json& j, SolverConfig cfg, const char* where) {
  reject_unknown(j, {"abstol", "reltol", "tol", "max_order", "max_step", "initial_step"}, where);
  if (j.contains("tol")) {
    cfg.abstol = cfg.reltol = j.at("tol").get<double>();
  }
  read(j, "abstol", cfg.abstol);
  read(j, "reltol", cfg.reltol);
  read(j, "max_order", cfg.max_order);
  read_opt(j, "max_step", cfg.max_step);
  read_opt(j, "initial_step", cfg.initial_step);
  return cfg;
}

json solver_json(const SolverConfig& c) {
  json j;
  j["abstol"] = c.abstol;
  j["reltol"] = c.reltol;
  j["max_order"] = c.max_order;
  j["max_step"] = c.max_step ? json(*c.max_step) : json(nullptr);
  j["initial_step"] = c.initial_step ? json(*c.initial_step) : json(nullptr);
  return j;
}

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::mpde: return "mpde";
    case ExperimentKind::reference: return "reference";
    case ExperimentKind::compare: return "compare";
    case ExperimentKind::sweep: return "sweep";
  }
  return "compare";
}

SolverConfig tolerance_config(double tol) {
  SolverConfig c;
  c.abstol = c.reltol = tol;
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int label_index(const LinearCircuit& c, const std::string& label, int fallback) {
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    if (c.labels[i] == label) return static_cast<int>(i);
  }
  return fallback;
}

void fill_errors(MethodReport& rep, const ExperimentConfig& cfg, const LinearCircuit& circuit,
                 const Trajectory& oracle, const Trajectory& test) {
  const auto [a, b] = cfg.span();
  const double Ts = 1.0 / cfg.fs;
  rep.eps_v = l2_relative_error(oracle, test, label_index(circuit, "v_C", 1), a, b,
                                cfg.samples_per_cycle, Ts);
  rep.eps_i = l2_relative_error(oracle, test, label_index(circuit, "i_L", 0), a, b,
                                cfg.samples_per_cycle, Ts);
}

double ratio(long num, long den) {
  return static_cast<double>(num) / static_cast<double>(std::max<long>(den, 1));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"kind", "circuit", "excitation", "duty", "basis", "mpde_solver",
                  "reference_solver", "t_span", "samples_per_cycle", "init_mode", "output"},
                 "config");
  ExperimentConfig cfg;
  cfg.mpde_solver = tolerance_config(1e-3);
  cfg.reference_solver = tolerance_config(1e-2);
  try {
    if (j.contains("kind")) {
      const auto k = j.at("kind").get<std::string>();
      if (k == "mpde") cfg.kind = ExperimentKind::mpde;
      else if (k == "reference") cfg.kind = ExperimentKind::reference;
      else if (k == "compare") cfg.kind = ExperimentKind::compare;
      else if (k == "sweep") cfg.kind = ExperimentKind::sweep;
      else throw std::invalid_argument("unknown experiment kind '" + k + "'");
    }
    if (j.contains("circuit")) {
      const json& c = j.at("circuit");
      reject_unknown(c, {"L", "C", "R_L", "R"}, "circuit");
      read(c, "L", cfg.circuit.inductance);
      read(c, "C", cfg.circuit.capacitance);
      read(c, "R_L", cfg.circuit.coil_resistance);
      read(c, "R", cfg.circuit.load_resistance);
    }
    if (j.contains("excitation")) {
      const json& e = j.at("excitation");
      reject_unknown(e, {"v_peak", "fs"}, "excitation");
      read(e, "v_peak", cfg.v_peak);
      read(e, "fs", cfg.fs);
    }
    if (j.contains("duty")) {
      const json& d = j.at("duty");
      reject_unknown(d, {"kind", "value", "v_desired", "f_ac"}, "duty");
      const auto kind = d.value("kind", std::string("sinusoidal"));
      if (kind == "constant") cfg.duty_kind = DutyKind::constant;
      else if (kind == "sinusoidal") cfg.duty_kind = DutyKind::sinusoidal;
      else throw std::invalid_argument("unknown duty kind '" + kind + "'");
      read(d, "value", cfg.duty_value);
      read(d, "v_desired", cfg.v_desired);
      read(d, "f_ac", cfg.f_ac);
    }
    if (j.contains("basis")) {
      const json& b = j.at("basis");
      reject_unknown(b, {"degree", "refine", "alphas", "betas"}, "basis");
      read(b, "degree", cfg.basis.degree);
      read(b, "refine", cfg.basis.refine);
      read(b, "alphas", cfg.basis.alphas);
      read(b, "betas", cfg.basis.betas);
    }
    if (j.contains("mpde_solver")) {
      cfg.mpde_solver = parse_solver(j.at("mpde_solver"), cfg.mpde_solver, "mpde_solver");
    }
    if (j.contains("reference_solver")) {
      cfg.reference_solver =
          parse_solver(j.at("reference_solver"), cfg.reference_solver, "reference_solver");
    }
    if (j.contains("t_span")) {
      const auto v = j.at("t_span").get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("t_span must be [t0, t1]");
      cfg.t_span = std::make_pair(v[0], v[1]);
    }
    read(j, "samples_per_cycle", cfg.samples_per_cycle);
    if (j.contains("init_mode")) {
      const auto m = j.at("init_mode").get<std::string>();
      if (m == "steady_shift") cfg.init_mode = InitMode::steady_shift;
      else if (m == "zero") cfg.init_mode = InitMode::zero;
      else throw std::invalid_argument("unknown init_mode '" + m + "'");
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      reject_unknown(o, {"dir", "trajectories"}, "output");
      if (o.contains("dir")) cfg.output_dir = o.at("dir").get<std::string>();
      read(o, "trajectories", cfg.write_trajectories);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field has the wrong type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = kind_name(cfg.kind);
  j["circuit"] = {{"L", cfg.circuit.inductance},
                  {"C", cfg.circuit.capacitance},
                  {"R_L", cfg.circuit.coil_resistance},
                  {"R", cfg.circuit.load_resistance}};
  j["excitation"] = {{"v_peak", cfg.v_peak}, {"fs", cfg.fs}};
  if (cfg.duty_kind == DutyKind::constant) {
    j["duty"] = {{"kind", "constant"}, {"value", cfg.duty_value}};
  } else {
    j["duty"] = {{"kind", "sinusoidal"}, {"v_desired", cfg.v_desired}, {"f_ac", cfg.f_ac}};
  }
  j["basis"] = {{"degree", cfg.basis.degree},
                {"refine", cfg.basis.refine},
                {"alphas", cfg.basis.alphas},
                {"betas", cfg.basis.betas}};
  j["mpde_solver"] = solver_json(cfg.mpde_solver);
  j["reference_solver"] = solver_json(cfg.reference_solver);
  const auto [a, b] = cfg.span();
  j["t_span"] = {a, b};
  j["samples_per_cycle"] = cfg.samples_per_cycle;
  j["init_mode"] = cfg.init_mode == InitMode::zero ? "zero" : "steady_shift";
  if (cfg.output_dir) {
    j["output"] = {{"dir", cfg.output_dir->string()}, {"trajectories", cfg.write_trajectories}};
  }
  return j.dump(2);
}

ExperimentConfig study_config(int setting) {
  if (setting < 0 || setting > 2) throw std::invalid_argument("study setting must be 0, 1 or 2");
  const StudySetting& s = kStudySettings[setting];
  ExperimentConfig cfg;
  cfg.basis.degree = s.degree;
  cfg.basis.refine = s.refine;
  cfg.mpde_solver = tolerance_config(s.mpde_tol);
  cfg.reference_solver = tolerance_config(s.reference_tol);
  return cfg;
}

Trajectory build_oracle(const ExperimentConfig& cfg) {
  const auto [a, b] = cfg.span();
  return make_reference_oracle(cfg.make_circuit(), cfg.make_excitation(), a, b);
}

MethodReport run_mpde(const ExperimentConfig& cfg, const Trajectory* oracle,
                      std::optional<MpdeResult>* keep) {
  const LinearCircuit circuit = cfg.make_circuit();
  const PwmExcitation exc = cfg.make_excitation();
  const auto [a, b] = cfg.span();
  const auto start = std::chrono::steady_clock::now();
  const ReducedSystem rsys(circuit, cfg.basis.build(exc.duty.value(a)), exc);
  MpdeResult result = solve_mpde(rsys, a, b, cfg.mpde_solver, cfg.init_mode);
  MethodReport rep;
  rep.wall_seconds = seconds_since(start);
  rep.tolerance = cfg.mpde_solver.reltol;
  rep.stats = result.stats;
  if (oracle) {
    const Trajectory sampled =
        reconstruct(result.solution, midpoint_grid(a, b, cfg.samples_per_cycle, exc.period()));
    fill_errors(rep, cfg, circuit, *oracle, sampled);
  }
  if (keep) *keep = std::move(result);
  return rep;
}

MethodReport run_reference(const ExperimentConfig& cfg, const Trajectory* oracle,
                           std::optional<IntegrationResult>* keep) {
  const LinearCircuit circuit = cfg.make_circuit();
  const PwmExcitation exc = cfg.make_excitation();
  const auto [a, b] = cfg.span();
  const auto start = std::chrono::steady_clock::now();
  IntegrationResult result = solve_reference(circuit, exc, a, b, cfg.reference_solver);
  MethodReport rep;
  rep.wall_seconds = seconds_since(start);
  rep.tolerance = cfg.reference_solver.reltol;
  rep.stats = result.stats;
  if (oracle) fill_errors(rep, cfg, circuit, *oracle, result.trajectory);
  if (keep) *keep = std::move(result);
  return rep;
}

ComparisonReport run_comparison(const ExperimentConfig& cfg, const Trajectory* oracle) {
  cfg.validate();
  ComparisonReport report;
  std::optional<Trajectory> own;
  if (!oracle) {
    const auto start = std::chrono::steady_clock::now();
    own = build_oracle(cfg);
    report.oracle_wall_seconds = seconds_since(start);
    oracle = &*own;
  }
  std::optional<MpdeResult> mpde_run;
  std::optional<IntegrationResult> ref_run;
  report.mpde = run_mpde(cfg, oracle, &mpde_run);
  report.reference = run_reference(cfg, oracle, &ref_run);
  report.speedup_steps = ratio(report.reference.stats.accepted_steps, report.mpde.stats.accepted_steps);
  report.speedup_failed = ratio(report.reference.stats.failed_steps, report.mpde.stats.failed_steps);
  report.speedup_lu =
      ratio(report.reference.stats.lu_factorizations, report.mpde.stats.lu_factorizations);
  report.speedup_solves =
      ratio(report.reference.stats.linear_solves, report.mpde.stats.linear_solves);

  if (cfg.output_dir) {
    std::filesystem::create_directories(*cfg.output_dir);
    const LinearCircuit circuit = cfg.make_circuit();
    if (cfg.write_trajectories) {
      const auto [a, b] = cfg.span();
      std::ofstream m(*cfg.output_dir / "mpde.csv");
      write_trajectory_csv(
          m,
          reconstruct(mpde_run->solution,
                      midpoint_grid(a, b, cfg.samples_per_cycle, 1.0 / cfg.fs)),
          circuit.labels);
      std::ofstream r(*cfg.output_dir / "reference.csv");
      write_trajectory_csv(r, ref_run->trajectory, circuit.labels);
    }
    std::ofstream j(*cfg.output_dir / "report.json");
    j << report_to_json(report, cfg) << '\n';
  }
  return report;
}

std::vector<SweepRow> sweep_tolerances(const ExperimentConfig& cfg,
                                       const std::vector<double>& tolerances,
                                       const Trajectory* oracle) {
  if (tolerances.size() < 3) throw std::invalid_argument("a sweep needs at least 3 tolerances");
  const auto [lo, hi] = std::minmax_element(tolerances.begin(), tolerances.end());
  if (!(*lo > 0.0) || std::log10(*hi / *lo) < 3.0 - 1e-9) {
    throw std::invalid_argument("sweep tolerances must be positive and span at least 3 decades");
  }
  std::optional<Trajectory> own;
  if (!oracle) {
    own = build_oracle(cfg);
    oracle = &*own;
  }
  std::vector<SweepRow> rows;
  for (double tol : tolerances) {
    ExperimentConfig c = cfg;
    c.output_dir.reset();
    c.mpde_solver.abstol = c.mpde_solver.reltol = tol;
    c.reference_solver.abstol = c.reference_solver.reltol = tol;
    rows.push_back({tol, run_comparison(c, oracle)});
  }
  if (cfg.output_dir) {
    std::filesystem::create_directories(*cfg.output_dir);
    std::ofstream out(*cfg.output_dir / "sweep.csv");
    write_sweep_csv(out, rows);
  }
  return rows;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& labels) {
  os << 't';
  for (const auto& l : labels) os << ',' << l;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << traj.time(i);
    const auto x = traj.state(i);
    for (Eigen::Index j = 0; j < x.size(); ++j) os << ',' << x[j];
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "tol,mpde_eps_v,mpde_eps_i,mpde_steps,mpde_failed,mpde_lu,mpde_solves,"
        "ref_eps_v,ref_eps_i,ref_steps,ref_failed,ref_lu,ref_solves\n"
     << std::setprecision(17);
  for (const auto& r : rows) {
    const auto& m = r.report.mpde;
    const auto& f = r.report.reference;
    os << r.tolerance << ',' << m.eps_v << ',' << m.eps_i << ',' << m.stats.accepted_steps << ','
       << m.stats.failed_steps << ',' << m.stats.lu_factorizations << ','
       << m.stats.linear_solves << ',' << f.eps_v << ',' << f.eps_i << ','
       << f.stats.accepted_steps << ',' << f.stats.failed_steps << ','
       << f.stats.lu_factorizations << ',' << f.stats.linear_solves << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
}

namespace {

json stats_json(const SolverStats& s) {
  return {{"time_steps", s.accepted_steps},
          {"failed_steps", s.failed_steps},
          {"lu_decompositions", s.lu_factorizations},
          {"function_evaluations", s.function_evaluations},
          {"linear_solves", s.linear_solves},
          {"starts", s.starts}};
}

json method_json(const MethodReport& m) {
  return {{"tolerance", m.tolerance},
          {"eps_v", m.eps_v},
          {"eps_i", m.eps_i},
          {"stats", stats_json(m.stats)},
          {"wall_seconds", m.wall_seconds}};
}

}  // namespace

std::string stats_to_json(const SolverStats& stats) { return stats_json(stats).dump(2); }

std::string report_to_json(const ComparisonReport& report, const ExperimentConfig& cfg) {
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["mpde"] = method_json(report.mpde);
  j["reference"] = method_json(report.reference);
  j["speedup"] = {{"time_steps", report.speedup_steps},
                  {"failed_steps", report.speedup_failed},
                  {"lu_decompositions", report.speedup_lu},
                  {"linear_solves", report.speedup_solves}};
  j["oracle_wall_seconds"] = report.oracle_wall_seconds;
  return j.dump(2);
}

bool AffineStructureReport::passed() const {
  return mass_affine_residual <= tolerance && mass_check_residual <= tolerance &&
         transport_variation <= tolerance && duty_drift_variation <= tolerance;
}

AffineStructureReport verify_affine_structure(const SplineBasis& basis, double Ts) {
  AffineStructureReport r;
  r.degree = basis.degree();
  r.refine = basis.refinement();

  auto mass_at = [&](double d) { return assemble_mass(basis, d, Ts); };
  // Fit without the built-in check so the residual is reported, not thrown.
  AffineProbe probe;
  probe.rel_tol = std::numeric_limits<double>::infinity();
  const AffineMatrix fit = affine_decompose(mass_at, probe);
  r.mass_check_residual = relative_difference(mass_at(probe.check), fit.at(probe.check));
  for (int i = 1; i <= 9; ++i) {
    const double d = 0.1 * i;
    r.mass_affine_residual = std::max(r.mass_affine_residual, relative_difference(mass_at(d), fit.at(d)));
  }

  // Q is dimensionless with O(1) entries, U carries a factor Ts.
  auto variation = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double unit) {
    const double scale = std::max({unit, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };
  r.transport_variation =
      variation(assemble_transport(basis, 0.2), assemble_transport(basis, 0.8), 1.0);
  r.duty_drift_variation =
      variation(assemble_duty_drift(basis, 0.2, Ts), assemble_duty_drift(basis, 0.8, Ts), Ts);
  return r;
}

std::string affine_report_to_json(const AffineStructureReport& r) {
  json j{{"degree", r.degree},
         {"refine", r.refine},
         {"mass_affine_residual", r.mass_affine_residual},
         {"mass_check_residual", r.mass_check_residual},
         {"transport_variation", r.transport_variation},
         {"duty_drift_variation", r.duty_drift_variation},
         {"tolerance", r.tolerance},
         {"passed", r.passed()}};
  return j.dump(2);
}

}  // namespace mpde
