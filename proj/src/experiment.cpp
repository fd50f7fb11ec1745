#include "oscillab/experiment.hpp"

#include "oscillab/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace oscillab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void config_error(const std::string& message) {
  throw std::invalid_argument("config error: " + message);
}

bool is_massless_kind(Algorithm kind) {
  return kind == Algorithm::Vgd || kind == Algorithm::Rcgd ||
         kind == Algorithm::ProxGrad || kind == Algorithm::Newton;
}

const std::map<CertificateSetting, std::set<Algorithm>>& certificate_pairings() {
  static const std::map<CertificateSetting, std::set<Algorithm>> pairings = {
      {CertificateSetting::VgdConvex, {Algorithm::Vgd, Algorithm::Rcgd}},
      {CertificateSetting::VgdPl, {Algorithm::Vgd, Algorithm::Rcgd}},
      {CertificateSetting::NagQg, {Algorithm::NagSc}},
      {CertificateSetting::NewtonSc, {Algorithm::Newton}},
      {CertificateSetting::CompositeProxPl, {Algorithm::ProxGrad}},
  };
  return pairings;
}

const std::map<RateBoundId, std::set<Algorithm>>& bound_pairings() {
  static const std::map<RateBoundId, std::set<Algorithm>> pairings = {
      {RateBoundId::VgdConvex, {Algorithm::Vgd}},
      {RateBoundId::VgdSc, {Algorithm::Vgd}},
      {RateBoundId::VgdPl, {Algorithm::Vgd}},
      {RateBoundId::NagConvex, {Algorithm::NagGc}},
      {RateBoundId::NagSc, {Algorithm::NagSc}},
      {RateBoundId::NagQg, {Algorithm::NagSc}},
      {RateBoundId::RcgdConvex, {Algorithm::Rcgd}},
      {RateBoundId::RcgdPl, {Algorithm::Rcgd}},
      {RateBoundId::ArcgConvex, {Algorithm::ArcgGc}},
      {RateBoundId::ArcgConvexExplicit, {Algorithm::ArcgGc}},
      {RateBoundId::ArcgQg, {Algorithm::ArcgSc}},
      {RateBoundId::ArcgQgExplicit, {Algorithm::ArcgSc}},
      {RateBoundId::NewtonQuadratic, {Algorithm::Newton}},
  };
  return pairings;
}

void validate_run(const RunSpec& run, const std::string& objective_id, int dimension) {
  if (run.name.empty()) config_error("run name must not be empty");
  for (char c : run.name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      config_error("run name '" + run.name + "' must be filesystem-safe");
  if (run.algorithm.step_size <= 0.0)
    config_error("run '" + run.name + "': eta must be positive");
  if (run.algorithm.iterations < 0)
    config_error("run '" + run.name + "': iterations must be nonnegative");

  const bool composite = is_composite_id(objective_id);
  if (composite && run.algorithm.kind != Algorithm::ProxGrad)
    config_error("run '" + run.name + "': composite objectives only run PROX_GRAD");
  if (!composite && run.algorithm.kind == Algorithm::ProxGrad)
    config_error("run '" + run.name + "': PROX_GRAD needs a composite objective");

  for (const auto setting : run.certificates) {
    const auto& allowed = certificate_pairings().at(setting);
    if (!allowed.contains(run.algorithm.kind))
      config_error("run '" + run.name + "': certificate " + to_string(setting) +
                   " does not pair with algorithm " + to_string(run.algorithm.kind));
    if (!run.ode.enabled)
      config_error("run '" + run.name +
                   "': certificates verify on the ODE companion; enable `ode`");
  }
  for (const auto id : run.bounds) {
    if (composite)
      config_error("run '" + run.name + "': no bound catalog entries for composite runs");
    const auto& allowed = bound_pairings().at(id);
    if (!allowed.contains(run.algorithm.kind))
      config_error("run '" + run.name + "': bound " + to_string(id) +
                   " does not pair with algorithm " + to_string(run.algorithm.kind));
  }
  (void)dimension;
}

double default_time_scale(Algorithm kind, double eta) {
  return is_massless_kind(kind) ? eta : std::sqrt(eta);
}

}  // namespace

bool is_composite_id(const std::string& id) { return id.rfind("lasso", 0) == 0; }

ObjectiveSpec parse_objective(const std::string& id, const fs::path& base_dir) {
  if (id == "pl_nonconvex") return make_pl_nonconvex();
  if (id == "self_concordant") return make_self_concordant(1);
  if (id.rfind("self_concordant:", 0) == 0) {
    const int d = std::stoi(id.substr(std::string("self_concordant:").size()));
    return make_self_concordant(d);
  }
  if (id.rfind("quadratic:", 0) == 0) {
    const fs::path csv = base_dir / id.substr(std::string("quadratic:").size());
    ObjectiveSpec spec = make_quadratic(io::read_matrix_csv(csv));
    return spec;
  }
  config_error("unknown objective id: " + id);
  return {};  // unreachable
}

CompositeObjective parse_composite_objective(const std::string& id) {
  if (id == "lasso") return make_lasso(0.1, 1);
  if (id.rfind("lasso:", 0) == 0) {
    const double weight = std::stod(id.substr(std::string("lasso:").size()));
    return make_lasso(weight, 1);
  }
  config_error("unknown composite objective id: " + id);
  return {};  // unreachable
}

ExperimentConfig parse_experiment(const std::string& json_text, const fs::path& base_dir) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }

  ExperimentConfig config;
  if (!doc.contains("objective")) config_error("missing 'objective'");
  config.objective_id = doc["objective"].get<std::string>();

  const fs::path resolved_base = fs::absolute(base_dir.empty() ? fs::path(".") : base_dir);
  int dimension = 0;
  if (is_composite_id(config.objective_id)) {
    dimension = parse_composite_objective(config.objective_id).dimension();
  } else {
    dimension = parse_objective(config.objective_id, resolved_base).dimension;
  }

  if (!doc.contains("x0")) config_error("missing 'x0'");
  const auto& x0 = doc["x0"];
  if (!x0.is_array() || static_cast<int>(x0.size()) != dimension)
    config_error("x0 must be an array matching the objective dimension");
  config.x0.resize(dimension);
  for (int i = 0; i < dimension; ++i) config.x0[i] = x0[i].get<double>();

  config.global_seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("dt")) config.dt_override = doc["dt"].get<double>();
  config.output_dir = doc.value("output_dir", std::string{"out"});
  config.objective_base_dir = resolved_base.string();

  if (!doc.contains("runs") || !doc["runs"].is_array()) config_error("missing 'runs' array");
  std::set<std::string> names;
  for (const auto& run_doc : doc["runs"]) {
    RunSpec run;
    run.name = run_doc.value("name", std::string{});
    if (!run_doc.contains("algorithm")) config_error("run missing 'algorithm'");
    run.algorithm.kind = algorithm_from_string(run_doc["algorithm"].get<std::string>());
    run.algorithm.step_size = run_doc.value("eta", 0.0);
    run.algorithm.iterations = run_doc.value("iterations", 0);
    if (run_doc.contains("momentum")) run.algorithm.momentum = run_doc["momentum"].get<double>();
    if (run_doc.contains("seed")) {
      run.algorithm.seed = run_doc["seed"].get<std::uint64_t>();
      run.seed_set = true;
    }
    if (run_doc.contains("ode")) {
      const auto& ode = run_doc["ode"];
      run.ode.enabled = ode.value("enabled", true);
      run.ode.time_scale =
          ode.value("time_scale", default_time_scale(run.algorithm.kind, run.algorithm.step_size));
      run.ode.dt = ode.value("dt", config.dt_override.value_or(1e-3));
      run.ode.t_end =
          ode.value("t_end", run.ode.time_scale * std::max(run.algorithm.iterations, 1));
    }
    for (const auto& name : run_doc.value("certificates", std::vector<std::string>{}))
      run.certificates.push_back(certificate_setting_from_string(name));
    for (const auto& name : run_doc.value("bounds", std::vector<std::string>{}))
      run.bounds.push_back(rate_bound_from_string(name));

    if (!names.insert(run.name).second)
      config_error("duplicate run name '" + run.name + "'");
    validate_run(run, config.objective_id, dimension);
    config.runs.push_back(std::move(run));
  }
  return config;
}

ExperimentConfig figure2_preset() {
  ExperimentConfig config;
  Matrix h(2, 2);
  h << 300.0, 1.0, 1.0, 50.0;
  config.inline_matrix = h;
  config.objective_id = "quadratic:H.csv";
  config.x0 = Vector(2);
  config.x0 << 1.0, 1.0;
  config.x0_provenance = "preset default (not externally specified)";
  config.global_seed = 20240807;
  config.output_dir = "figure2_out";

  RunSpec vgd;
  vgd.name = "vgd";
  vgd.algorithm.kind = Algorithm::Vgd;
  vgd.algorithm.step_size = 1e-4;
  vgd.algorithm.iterations = 5000;
  vgd.ode = {true, 1e-4, 1e-3, 0.5};

  RunSpec nag;
  nag.name = "nag_sc";
  nag.algorithm.kind = Algorithm::NagSc;
  nag.algorithm.step_size = 1e-4;
  nag.algorithm.iterations = 5000;
  nag.ode = {true, 1e-2, 1e-3, 5.0};

  RunSpec rcgd;
  rcgd.name = "rcgd";
  rcgd.algorithm.kind = Algorithm::Rcgd;
  rcgd.algorithm.step_size = 2e-4;
  rcgd.algorithm.iterations = 5000;

  RunSpec arcg;
  arcg.name = "arcg_sc";
  arcg.algorithm.kind = Algorithm::ArcgSc;
  arcg.algorithm.step_size = 2e-4;
  arcg.algorithm.iterations = 5000;

  config.runs = {vgd, nag, rcgd, arcg};
  return config;
}

std::string discrete_trajectory_csv(const DiscreteTrajectory& traj) {
  std::string out = "k";
  for (int j = 1; j <= traj.dimension(); ++j) out += ",x_" + std::to_string(j);
  out += ",f\n";
  for (int k = 0; k < traj.length(); ++k) {
    std::vector<double> row;
    row.reserve(traj.dimension() + 2);
    row.push_back(static_cast<double>(k));
    for (int j = 0; j < traj.dimension(); ++j) row.push_back(traj.iterates[k][j]);
    row.push_back(traj.values[k]);
    out += io::csv_row(row);
  }
  return out;
}

std::string continuous_trajectory_csv(const ContinuousTrajectory& traj) {
  const int d = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  std::string out = "t";
  for (int j = 1; j <= d; ++j) out += ",X_" + std::to_string(j);
  for (int j = 1; j <= d; ++j) out += ",V_" + std::to_string(j);
  out += "\n";
  for (int i = 0; i < traj.length(); ++i) {
    std::vector<double> row;
    row.reserve(2 * d + 1);
    row.push_back(traj.times[i]);
    for (int j = 0; j < d; ++j) row.push_back(traj.states[i][j]);
    for (int j = 0; j < d; ++j) row.push_back(traj.velocities[i][j]);
    out += io::csv_row(row);
  }
  return out;
}

namespace {

ordered_json algorithm_json(const RunSpec& run, std::uint64_t seed) {
  ordered_json doc;
  doc["name"] = run.name;
  doc["algorithm"] = to_string(run.algorithm.kind);
  doc["eta"] = run.algorithm.step_size;
  doc["iterations"] = run.algorithm.iterations;
  doc["seed"] = seed;
  if (run.algorithm.momentum) doc["momentum"] = *run.algorithm.momentum;
  return doc;
}

struct ArtifactSink {
  fs::path root;
  std::vector<std::pair<std::string, std::string>> entries;  // path, content

  void add(const std::string& relative, std::string content) {
    io::write_text_file(root / relative, content);
    entries.emplace_back(relative, std::move(content));
  }
};

ordered_json config_echo(const ExperimentConfig& config) {
  ordered_json doc;
  doc["objective"] = config.objective_id;
  doc["x0"] = std::vector<double>(config.x0.data(), config.x0.data() + config.x0.size());
  doc["seed"] = config.global_seed;
  if (config.dt_override) doc["dt"] = *config.dt_override;
  ordered_json runs = ordered_json::array();
  for (const auto& run : config.runs) {
    ordered_json r;
    r["name"] = run.name;
    r["algorithm"] = to_string(run.algorithm.kind);
    r["eta"] = run.algorithm.step_size;
    r["iterations"] = run.algorithm.iterations;
    if (run.seed_set) r["seed"] = run.algorithm.seed;
    if (run.algorithm.momentum) r["momentum"] = *run.algorithm.momentum;
    if (run.ode.enabled) {
      r["ode"] = {{"time_scale", run.ode.time_scale},
                  {"dt", run.ode.dt},
                  {"t_end", run.ode.t_end}};
    }
    if (!run.certificates.empty()) {
      std::vector<std::string> names;
      for (auto s : run.certificates) names.push_back(to_string(s));
      r["certificates"] = names;
    }
    if (!run.bounds.empty()) {
      std::vector<std::string> names;
      for (auto b : run.bounds) names.push_back(to_string(b));
      r["bounds"] = names;
    }
    runs.push_back(std::move(r));
  }
  doc["runs"] = std::move(runs);
  doc["notes"] = {{"x0_provenance", config.x0_provenance}};
  return doc;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  for (const auto& run : config.runs)
    validate_run(run, config.objective_id,
                 static_cast<int>(config.x0.size()));

  ExperimentResult result;
  const fs::path out_dir(config.output_dir.empty() ? "." : config.output_dir);
  fs::create_directories(out_dir);

  ArtifactSink sink{out_dir, {}};
  if (config.inline_matrix) {
    if (config.objective_id.rfind("quadratic:", 0) != 0)
      config_error("inline matrix requires a quadratic objective id");
    sink.add(config.objective_id.substr(std::string("quadratic:").size()),
             io::matrix_csv(*config.inline_matrix));
  }

  const bool composite = is_composite_id(config.objective_id);
  const fs::path objective_base =
      config.inline_matrix || config.objective_base_dir.empty()
          ? out_dir
          : fs::path(config.objective_base_dir);
  ObjectiveSpec objective;
  CompositeObjective composite_objective;
  if (composite)
    composite_objective = parse_composite_objective(config.objective_id);
  else
    objective = parse_objective(config.objective_id, objective_base);

  sink.add("config.json", config_echo(config).dump(2) + "\n");

  for (std::size_t index = 0; index < config.runs.size(); ++index) {
    const RunSpec& run_spec = config.runs[index];
    AlgorithmConfig algo = run_spec.algorithm;
    if (!run_spec.seed_set) algo.seed = config.global_seed ^ static_cast<std::uint64_t>(index);

    DiscreteTrajectory traj = composite ? run(algo, composite_objective, config.x0)
                                        : run(algo, objective, config.x0);
    sink.add(run_spec.name + ".csv", discrete_trajectory_csv(traj));
    ordered_json sidecar = algorithm_json(run_spec, algo.seed);
    sidecar["objective"] = config.objective_id;
    sidecar["diverged"] = traj.diverged;
    sidecar["step_size_warning"] = traj.step_size_warning;
    sink.add(run_spec.name + ".json", sidecar.dump(2) + "\n");
    ++result.runs_executed;

    ContinuousTrajectory flow;
    if (run_spec.ode.enabled) {
      const double dt = config.dt_override.value_or(run_spec.ode.dt);
      ODESystem system;
      if (composite) {
        const double damping = run_spec.ode.time_scale / algo.step_size;
        system = composite_massless_field(composite_objective, damping);
      } else {
        system = build_ode(algo, objective, run_spec.ode.time_scale);
      }
      const Vector v0 = Vector::Zero(config.x0.size());
      flow = integrate(system, config.x0, v0, run_spec.ode.t_end, dt);
      sink.add(run_spec.name + "_ode.csv", continuous_trajectory_csv(flow));
      ordered_json ode_meta;
      ode_meta["system"] = flow.system_id;
      ode_meta["mass"] = flow.params.mass;
      if (flow.params.time_varying_damping)
        ode_meta["damping_schedule"] = "3m_over_t";
      else
        ode_meta["damping"] = flow.params.damping;
      ode_meta["time_scale"] = run_spec.ode.time_scale;
      ode_meta["dt"] = dt;
      ode_meta["t_end"] = run_spec.ode.t_end;
      ode_meta["method"] = flow.method;
      ode_meta["diverged"] = flow.diverged;
      sink.add(run_spec.name + "_ode.json", ode_meta.dump(2) + "\n");
    }

    for (const auto setting : run_spec.certificates) {
      LyapunovCertificate cert =
          composite ? certificate(setting, composite_objective, flow.params)
                    : certificate(setting, objective, flow.params);
      // energy scale for the tolerance: |E| at the first valid sample
      double scale = 1.0;
      for (int i = 0; i < flow.length(); ++i) {
        if (flow.times[i] < cert.start_time) continue;
        scale = std::abs(certificate_value(cert, flow.times[i], flow.states[i],
                                           flow.velocities[i]));
        break;
      }
      MonotonicityReport report =
          verify_monotone(cert, flow, monotonicity_tolerance(flow, scale));
      sink.add(run_spec.name + "_cert_" + to_string(setting) + ".csv", report.csv(cert));
      ordered_json summary;
      summary["setting"] = to_string(setting);
      summary["pass"] = report.pass;
      summary["max_increment"] = report.max_increment;
      summary["tolerance"] = report.tolerance;
      sink.add(run_spec.name + "_cert_" + to_string(setting) + ".json",
               summary.dump(2) + "\n");
      if (!report.pass) {
        result.all_checks_passed = false;
        result.failures.push_back(run_spec.name + ": certificate " + to_string(setting));
      }
    }

    for (const auto bound_id : run_spec.bounds) {
      const double x0_norm = (config.x0 - objective.minimizer).norm();
      RateBound bound =
          bound_catalog(bound_id, objective.constants, x0_norm, objective.dimension);
      if (bound.form == RateBound::Form::QuadraticRecurrence) {
        BoundReport report = check_newton_quadratic(traj, objective.minimum);
        ordered_json summary;
        summary["bound_id"] = to_string(bound_id);
        summary["pass"] = report.pass;
        summary["inconclusive"] = report.inconclusive;
        summary["xi"] = report.xi;
        sink.add(run_spec.name + "_bound_" + to_string(bound_id) + ".json",
                 summary.dump(2) + "\n");
        if (!report.pass) {
          result.all_checks_passed = false;
          result.failures.push_back(run_spec.name + ": bound " + to_string(bound_id));
        }
        continue;
      }
      const ConstantMode mode = bound.needs_calibration ? ConstantMode::CalibratedAtK0
                                                        : ConstantMode::ClosedForm;
      BoundReport report = check_bound(bound, traj, objective.minimum, mode);
      const std::string curve_path =
          run_spec.name + "_bound_" + to_string(bound_id) + ".csv";
      sink.add(curve_path, report.csv());
      ordered_json summary;
      summary["bound_id"] = to_string(bound_id);
      summary["pass"] = report.pass;
      summary["first_violation_k"] = report.first_violation;
      summary["margin_curve_path"] = curve_path;
      sink.add(run_spec.name + "_bound_" + to_string(bound_id) + ".json",
               summary.dump(2) + "\n");
      if (!report.pass) {
        result.all_checks_passed = false;
        result.failures.push_back(run_spec.name + ": bound " + to_string(bound_id));
      }
    }
  }

  ordered_json manifest;
  manifest["checksum_algo"] = "fnv1a64";
  ordered_json artifacts = ordered_json::array();
  std::sort(sink.entries.begin(), sink.entries.end());
  for (const auto& [path, content] : sink.entries) {
    ordered_json entry;
    entry["path"] = path;
    entry["bytes"] = content.size();
    entry["checksum"] = io::checksum_hex(content);
    artifacts.push_back(std::move(entry));
    result.artifacts.push_back(path);
  }
  manifest["artifacts"] = std::move(artifacts);
  io::write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  result.manifest_path = (out_dir / "manifest.json").string();
  return result;
}

std::string list_settings() {
  std::ostringstream out;
  out << "objectives:\n"
      << "  quadratic:<path-to-matrix-csv>   f(x) = x'Hx/2 for symmetric PD H\n"
      << "  pl_nonconvex                     f(x) = x^2 + 3 sin^2(x), PL with mu = 1/8\n"
      << "  self_concordant:<d>              f(x) = sum_i (x_i - log(1 + x_i)), x > -1\n"
      << "  lasso:<weight>                   |x|^2/2 + weight |x|_1 (composite)\n\n";

  out << "algorithms:\n";
  for (const auto kind : all_algorithms()) {
    out << "  " << to_string(kind);
    switch (kind) {
      case Algorithm::Vgd: out << "  x' = x - eta grad f(x)"; break;
      case Algorithm::NagSc:
        out << "  momentum alpha = (sqrt(1/(mu eta)) - 1)/(sqrt(1/(mu eta)) + 1)";
        break;
      case Algorithm::NagGc: out << "  momentum schedule alpha_k = (k-1)/(k+2)"; break;
      case Algorithm::Rcgd: out << "  one uniformly drawn coordinate per step"; break;
      case Algorithm::ArcgSc:
        out << "  coordinate steps, alpha = (sqrt(kappa_max) - 1)/(sqrt(kappa_max) + 1)";
        break;
      case Algorithm::ArcgGc: out << "  coordinate steps, alpha_k = (k-1)/(k+2)"; break;
      case Algorithm::Newton: out << "  x' = x - eta H(x)^{-1} grad f(x)"; break;
      case Algorithm::ProxGrad: out << "  x' = prox_{eta h}(x - eta grad g(x))"; break;
    }
    out << "\n";
  }
  out << "\ncertificates (gamma, Gamma):\n";
  for (const auto setting : all_certificate_settings()) {
    out << "  " << to_string(setting);
    switch (setting) {
      case CertificateSetting::VgdConvex:
        out << "  gamma = t, Gamma = c|X|^2/(2t)";
        break;
      case CertificateSetting::VgdPl:
        out << "  gamma = exp(2 mu t / c), Gamma = 0";
        break;
      case CertificateSetting::NagQg:
        out << "  gamma = exp(lambda c t), Gamma = m/2 |V + sigma c X|^2, "
               "sigma = 4/(5m), lambda = 1/(5m), requires c^2 = 4 m mu";
        break;
      case CertificateSetting::NewtonSc:
        out << "  gamma = exp(t/(2h)), Gamma = 0";
        break;
      case CertificateSetting::CompositeProxPl:
        out << "  gamma = exp(2 mu t / c), Gamma = 0 (directional subgradient flow)";
        break;
    }
    out << "\n";
  }
  out << "\nbounds:\n";
  ConditionConstants unit;
  unit.smoothness = 1.0;
  unit.modulus = 1.0;
  unit.coord_smoothness = 1.0;
  for (const auto id : all_rate_bounds()) {
    const RateBound bound = bound_catalog(id, unit, 1.0, 1);
    out << "  " << to_string(id) << "  " << bound.description << "\n";
  }
  return out.str();
}

bool verify_manifest(const fs::path& manifest_path, std::string* diagnostics) {
  std::ostringstream log;
  bool ok = true;
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(io::read_text_file(manifest_path));
  } catch (const std::exception& e) {
    if (diagnostics) *diagnostics = std::string("cannot read manifest: ") + e.what();
    return false;
  }
  const fs::path root = manifest_path.parent_path();
  for (const auto& entry : manifest.value("artifacts", ordered_json::array())) {
    const std::string path = entry.value("path", "");
    std::string content;
    try {
      content = io::read_text_file(root / path);
    } catch (const std::exception&) {
      log << "missing artifact: " << path << "\n";
      ok = false;
      continue;
    }
    if (content.size() != entry.value("bytes", std::size_t{0})) {
      log << "size mismatch: " << path << "\n";
      ok = false;
      continue;
    }
    if (io::checksum_hex(content) != entry.value("checksum", "")) {
      log << "checksum mismatch: " << path << "\n";
      ok = false;
    }
  }
  if (diagnostics) *diagnostics = log.str();
  return ok;
}

}  // namespace oscillab
