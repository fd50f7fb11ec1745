#pragma once

#include "oscillab/dynamics.hpp"
#include "oscillab/lyapunov.hpp"
#include "oscillab/objectives.hpp"
#include "oscillab/optimizers.hpp"
#include "oscillab/rates.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oscillab {

/// ODE companion attached to a discrete run.
struct OdeCompanion {
  bool enabled = false;
  double time_scale = 0.0;  ///< h
  double dt = 0.0;
  double t_end = 0.0;
};

struct RunSpec {
  std::string name;  ///< artifact file stem, unique within an experiment
  AlgorithmConfig algorithm;
  bool seed_set = false;  ///< explicit seed in the config; otherwise derived
  OdeCompanion ode;
  std::vector<CertificateSetting> certificates;
  std::vector<RateBoundId> bounds;
};

struct ExperimentConfig {
  std::string objective_id;  ///< "quadratic:<csv>", "pl_nonconvex", "self_concordant:<d>", "lasso:<w>"
  std::optional<Matrix> inline_matrix;  ///< quadratic matrix, written next to the artifacts
  Vector x0;
  std::string x0_provenance = "experiment config";  ///< echoed into the artifacts
  /// Directory objective csv paths resolve against (the config file's
  /// directory); empty means the output directory (inline-matrix presets).
  std::string objective_base_dir;
  std::uint64_t global_seed = 0;
  std::optional<double> dt_override;
  std::string output_dir;
  std::vector<RunSpec> runs;
};

/// Parses and validates a config document. Unresolvable ids and
/// certificate/bound pairings that do not match the run's algorithm are
/// rejected here, before anything executes.
ExperimentConfig parse_experiment(const std::string& json_text,
                                  const std::filesystem::path& base_dir);

/// The built-in preset: the 2-d quadratic with H = [[300, 1], [1, 50]],
/// VGD and NAG_SC at eta = 1e-4 with ODE companions, RCGD and ARCG_SC at
/// eta = 2e-4, x0 = (1, 1), K = 5000.
ExperimentConfig figure2_preset();

struct ExperimentResult {
  bool all_checks_passed = true;
  int runs_executed = 0;
  std::vector<std::string> artifacts;  ///< paths relative to the output dir
  std::string manifest_path;
  std::vector<std::string> failures;
};

/// Executes every run: discrete trajectory, optional ODE companion,
/// certificate reports and bound reports, all serialized under
/// config.output_dir together with a manifest listing each artifact and its
/// checksum. Deterministic: identical configs produce byte-identical files.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Human-readable catalog of objective ids, algorithm kinds, certificate
/// settings and bound formulas.
std::string list_settings();

/// Recomputes the checksums in a manifest; returns false on any mismatch or
/// missing file.
bool verify_manifest(const std::filesystem::path& manifest_path, std::string* diagnostics);

/// Resolves an objective id string ("quadratic:<csv>" paths are relative to
/// base_dir).
ObjectiveSpec parse_objective(const std::string& id, const std::filesystem::path& base_dir);
CompositeObjective parse_composite_objective(const std::string& id);
bool is_composite_id(const std::string& id);

/// Serialization used by the experiment runner (and handy on their own).
std::string discrete_trajectory_csv(const DiscreteTrajectory& traj);
std::string continuous_trajectory_csv(const ContinuousTrajectory& traj);

}  // namespace oscillab
