#pragma once

/**
 * @file experiment.hpp
 * @brief Experiment configuration, comparisons against the reference
 *        solver, tolerance sweeps and report/CSV output.
 */

#include "mpde/basis.hpp"
#include "mpde/circuit.hpp"
#include "mpde/integrator.hpp"
#include "mpde/mpde.hpp"
#include "mpde/trajectory.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpde {

enum class ExperimentKind { mpde, reference, compare, sweep };

struct BasisSetting {
  int degree = 1;
  int refine = 1;
  /// Empty means uniform k/(K+1).
  std::vector<double> alphas;
  std::vector<double> betas;

  [[nodiscard]] SplineBasis build(double duty) const;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::compare;
  BuckParameters circuit;
  double v_peak = 350.0;
  double fs = 5000.0;
  DutyKind duty_kind = DutyKind::sinusoidal;
  double duty_value = 0.5;
  double v_desired = 325.0;
  double f_ac = 50.0;
  BasisSetting basis;
  SolverConfig mpde_solver;
  SolverConfig reference_solver;
  /// Defaults to [0, 4 / f_ac] (or 20 switching periods for a constant duty).
  std::optional<std::pair<double, double>> t_span;
  int samples_per_cycle = 100;
  InitMode init_mode = InitMode::steady_shift;
  std::optional<std::filesystem::path> output_dir;
  bool write_trajectories = true;

  [[nodiscard]] LinearCircuit make_circuit() const;
  [[nodiscard]] PwmExcitation make_excitation() const;
  [[nodiscard]] std::pair<double, double> span() const;
  /// Throws std::invalid_argument.
  void validate() const;
};

/// Parses the JSON experiment document. Unknown fields are rejected with
/// std::invalid_argument.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// The three basis/tolerance settings of the inverter study, with the
/// MPDE and conventional tolerances they are compared at.
struct StudySetting {
  const char* name;
  int degree;
  int refine;
  double mpde_tol;
  double reference_tol;
};
extern const StudySetting kStudySettings[3];

/// Inverter study configuration for setting index 0..2.
ExperimentConfig study_config(int setting);

struct MethodReport {
  double tolerance = 0.0;
  double eps_v = 0.0;
  double eps_i = 0.0;
  SolverStats stats;
  double wall_seconds = 0.0;
};

struct ComparisonReport {
  MethodReport mpde;
  MethodReport reference;
  /// reference / mpde for time steps, failed steps, LU factorizations and
  /// linear solves (denominators clamped to >= 1).
  double speedup_steps = 0.0;
  double speedup_failed = 0.0;
  double speedup_lu = 0.0;
  double speedup_solves = 0.0;
  double oracle_wall_seconds = 0.0;
};

/// Reference ground truth for a configuration (tol 1e-12, max step Ts/1000).
Trajectory build_oracle(const ExperimentConfig& cfg);

/// Errors are filled in only when an oracle is given. `keep` receives the raw
/// solver output.
MethodReport run_mpde(const ExperimentConfig& cfg, const Trajectory* oracle,
                      std::optional<MpdeResult>* keep = nullptr);
MethodReport run_reference(const ExperimentConfig& cfg, const Trajectory* oracle,
                           std::optional<IntegrationResult>* keep = nullptr);

/// Runs oracle (unless supplied), reference and MPDE; writes CSV trajectories
/// and report.json when cfg.output_dir is set.
ComparisonReport run_comparison(const ExperimentConfig& cfg, const Trajectory* oracle = nullptr);

struct SweepRow {
  double tolerance = 0.0;
  ComparisonReport report;
};

/// One comparison per tolerance (abstol = reltol = tol for both solvers).
/// Requires >= 3 tolerances spanning >= 3 decades.
std::vector<SweepRow> sweep_tolerances(const ExperimentConfig& cfg,
                                       const std::vector<double>& tolerances,
                                       const Trajectory* oracle = nullptr);

// Output helpers. All floating values use 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& labels);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
std::string report_to_json(const ComparisonReport& report, const ExperimentConfig& cfg);
std::string stats_to_json(const SolverStats& stats);

struct AffineStructureReport {
  int degree = 0;
  int refine = 0;
  /// max over d in {0.1,...,0.9} of relative |I_direct(d) - I_affine(d)|.
  double mass_affine_residual = 0.0;
  /// Relative mismatch of the d = 0.5 check against the 0.25/0.75 fit.
  double mass_check_residual = 0.0;
  /// Max abs difference between the d = 0.2 and d = 0.8 assemblies divided
  /// by max(unit, max abs entry); unit is 1 for Q and Ts for U.
  double transport_variation = 0.0;
  double duty_drift_variation = 0.0;
  double tolerance = 1e-10;

  [[nodiscard]] bool passed() const;
};

AffineStructureReport verify_affine_structure(const SplineBasis& basis, double Ts);
std::string affine_report_to_json(const AffineStructureReport& r);

}  // namespace mpde
