#include "oscillab/dynamics.hpp"
#include "oscillab/experiment.hpp"
#include "oscillab/io.hpp"
#include "oscillab/lyapunov.hpp"
#include "oscillab/objectives.hpp"
#include "oscillab/optimizers.hpp"
#include "oscillab/rates.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <optional>

namespace py = pybind11;
using namespace oscillab;

namespace {

AlgorithmConfig make_config(const std::string& kind, double step_size, int iterations,
                            std::optional<double> momentum, std::uint64_t seed) {
  AlgorithmConfig config;
  config.kind = algorithm_from_string(kind);
  config.step_size = step_size;
  config.iterations = iterations;
  config.momentum = momentum;
  config.seed = seed;
  return config;
}

}  // namespace

PYBIND11_MODULE(_oscillab, m) {
  m.doc() = "discrete optimizers, their damped-oscillator flows, and convergence checks";

  py::class_<ConditionConstants>(m, "ConditionConstants")
      .def(py::init<>())
      .def_readwrite("smoothness", &ConditionConstants::smoothness)
      .def_readwrite("modulus", &ConditionConstants::modulus)
      .def_readwrite("coord_smoothness", &ConditionConstants::coord_smoothness)
      .def_readwrite("self_concordance", &ConditionConstants::self_concordance)
      .def("condition_number", &ConditionConstants::condition_number)
      .def("coord_condition_number", &ConditionConstants::coord_condition_number);

  py::class_<ObjectiveSpec>(m, "ObjectiveSpec")
      .def_readonly("id", &ObjectiveSpec::id)
      .def_readonly("dimension", &ObjectiveSpec::dimension)
      .def_readonly("minimizer", &ObjectiveSpec::minimizer)
      .def_readonly("minimum", &ObjectiveSpec::minimum)
      .def_readonly("constants", &ObjectiveSpec::constants)
      .def_readonly("convex", &ObjectiveSpec::convex)
      .def_readonly("newton_radius", &ObjectiveSpec::newton_radius)
      .def("value", [](const ObjectiveSpec& f, const Vector& x) { return f.value(x); })
      .def("gradient",
           [](const ObjectiveSpec& f, const Vector& x) { return f.gradient(x); })
      .def("coordinate_gradient", [](const ObjectiveSpec& f, const Vector& x,
                                     int j) { return f.coordinate_gradient(x, j); })
      .def("hessian",
           [](const ObjectiveSpec& f, const Vector& x) {
             if (!f.has_hessian()) throw std::invalid_argument("no Hessian capability");
             return f.hessian(x);
           })
      .def("gap", &ObjectiveSpec::gap)
      .def("has_hessian", &ObjectiveSpec::has_hessian);

  py::class_<CompositeObjective>(m, "CompositeObjective")
      .def_readonly("id", &CompositeObjective::id)
      .def_readonly("smooth", &CompositeObjective::smooth)
      .def_readonly("minimizer", &CompositeObjective::minimizer)
      .def_readonly("minimum", &CompositeObjective::minimum)
      .def_readonly("modulus", &CompositeObjective::modulus)
      .def_property_readonly("dimension", &CompositeObjective::dimension)
      .def("value", [](const CompositeObjective& cf, const Vector& x) { return cf.value(x); })
      .def("nonsmooth",
           [](const CompositeObjective& cf, const Vector& x) { return cf.nonsmooth(x); })
      .def("directional_subgradient",
           [](const CompositeObjective& cf, const Vector& x, const Vector& p) {
             return cf.directional_subgradient(x, p);
           })
      .def("prox", [](const CompositeObjective& cf, const Vector& v, double t) {
        return cf.prox(v, t);
      });

  py::class_<ConditionReport>(m, "ConditionReport")
      .def_readonly("condition", &ConditionReport::condition)
      .def_readonly("passed", &ConditionReport::pass)
      .def_readonly("worst", &ConditionReport::worst)
      .def_readonly("threshold", &ConditionReport::threshold)
      .def_readonly("worst_index", &ConditionReport::worst_index)
      .def_readonly("skipped", &ConditionReport::skipped)
      .def_readonly("direction_grid", &ConditionReport::direction_grid);

  m.def("make_quadratic", &make_quadratic, py::arg("hessian"));
  m.def("make_pl_nonconvex", &make_pl_nonconvex);
  m.def("make_self_concordant", &make_self_concordant, py::arg("dimension") = 1);
  m.def("make_lasso", &make_lasso, py::arg("l1_weight"), py::arg("dimension") = 1);
  m.def("check_pl", &check_pl, py::arg("objective"), py::arg("samples"), py::arg("modulus"));
  m.def("check_qg", &check_qg, py::arg("objective"), py::arg("samples"), py::arg("modulus"));
  m.def("check_proximal_pl", &check_proximal_pl, py::arg("objective"), py::arg("samples"),
        py::arg("modulus"), py::arg("directions") = 64);

  py::class_<AlgorithmConfig>(m, "AlgorithmConfig")
      .def(py::init(&make_config), py::arg("kind"), py::arg("step_size"),
           py::arg("iterations"), py::arg("momentum") = std::nullopt, py::arg("seed") = 0)
      .def_property(
          "kind", [](const AlgorithmConfig& c) { return to_string(c.kind); },
          [](AlgorithmConfig& c, const std::string& kind) {
            c.kind = algorithm_from_string(kind);
          })
      .def_readwrite("step_size", &AlgorithmConfig::step_size)
      .def_readwrite("momentum", &AlgorithmConfig::momentum)
      .def_readwrite("seed", &AlgorithmConfig::seed)
      .def_readwrite("iterations", &AlgorithmConfig::iterations);

  py::class_<DiscreteTrajectory>(m, "DiscreteTrajectory")
      .def_readonly("iterates", &DiscreteTrajectory::iterates)
      .def_readonly("auxiliary", &DiscreteTrajectory::auxiliary)
      .def_readonly("values", &DiscreteTrajectory::values)
      .def_readonly("coordinates", &DiscreteTrajectory::coordinates)
      .def_readonly("seed", &DiscreteTrajectory::seed)
      .def_readonly("diverged", &DiscreteTrajectory::diverged)
      .def_readonly("step_size_warning", &DiscreteTrajectory::step_size_warning)
      .def("gaps", &DiscreteTrajectory::gaps)
      .def("__len__", &DiscreteTrajectory::length);

  m.def("run",
        py::overload_cast<const AlgorithmConfig&, const ObjectiveSpec&, const Vector&>(&run),
        py::arg("config"), py::arg("objective"), py::arg("x0"));
  m.def("run",
        py::overload_cast<const AlgorithmConfig&, const CompositeObjective&, const Vector&>(
            &run),
        py::arg("config"), py::arg("objective"), py::arg("x0"));
  m.def("nag_sc_momentum", &nag_sc_momentum, py::arg("modulus"), py::arg("step_size"));
  m.def("arcg_sc_momentum", &arcg_sc_momentum, py::arg("coord_condition_number"));
  m.def("gc_momentum", &gc_momentum, py::arg("k"));

  py::class_<PhysicalParams>(m, "PhysicalParams")
      .def_readonly("mass", &PhysicalParams::mass)
      .def_readonly("damping", &PhysicalParams::damping)
      .def_readonly("time_scale", &PhysicalParams::time_scale)
      .def_readonly("step_size", &PhysicalParams::step_size)
      .def_readonly("momentum", &PhysicalParams::momentum)
      .def_readonly("time_varying_damping", &PhysicalParams::time_varying_damping)
      .def_readonly("viscosity_tensor", &PhysicalParams::viscosity_tensor)
      .def_readonly("taylor_mass", &PhysicalParams::taylor_mass)
      .def_readonly("taylor_damping", &PhysicalParams::taylor_damping)
      .def_property_readonly("massless",
                             [](const PhysicalParams& p) {
                               return p.regime == MassRegime::Massless;
                             })
      .def("damping_at", &PhysicalParams::damping_at);

  m.def("physical_params", &physical_params, py::arg("config"), py::arg("objective"),
        py::arg("time_scale"));
  m.def(
      "classify_damping",
      [](double mass, double damping, double hooke) {
        return to_string(classify_damping(mass, damping, hooke));
      },
      py::arg("mass"), py::arg("damping"), py::arg("hooke"));
  m.def("energy_decay_exponent", &energy_decay_exponent, py::arg("mass"), py::arg("damping"),
        py::arg("hooke"));
  m.def(
      "analytic_quadratic_solution",
      [](double mass, double damping, double hooke, double x0, double v0, double t) {
        const auto state = analytic_quadratic_solution(mass, damping, hooke, x0, v0, t);
        return std::make_pair(state.position, state.velocity);
      },
      py::arg("mass"), py::arg("damping"), py::arg("hooke"), py::arg("x0"), py::arg("v0"),
      py::arg("t"));

  py::class_<ODESystem>(m, "ODESystem")
      .def_readonly("dimension", &ODESystem::dimension)
      .def_readonly("start_time", &ODESystem::start_time)
      .def_readonly("system_id", &ODESystem::system_id)
      .def_readonly("params", &ODESystem::params)
      .def_property_readonly(
          "second_order",
          [](const ODESystem& s) { return s.order == ODESystem::Order::Second; })
      .def("velocity",
           [](const ODESystem& s, const Vector& x, double t) {
             if (s.order != ODESystem::Order::First)
               throw std::invalid_argument("second-order system");
             return s.velocity(x, t);
           })
      .def("acceleration", [](const ODESystem& s, const Vector& x, const Vector& v,
                              double t) {
        if (s.order != ODESystem::Order::Second)
          throw std::invalid_argument("first-order system");
        return s.acceleration(x, v, t);
      });

  py::class_<ContinuousTrajectory>(m, "ContinuousTrajectory")
      .def_readonly("times", &ContinuousTrajectory::times)
      .def_readonly("states", &ContinuousTrajectory::states)
      .def_readonly("velocities", &ContinuousTrajectory::velocities)
      .def_readonly("step", &ContinuousTrajectory::step)
      .def_readonly("method", &ContinuousTrajectory::method)
      .def_readonly("system_id", &ContinuousTrajectory::system_id)
      .def_readonly("params", &ContinuousTrajectory::params)
      .def_readonly("diverged", &ContinuousTrajectory::diverged)
      .def("__len__", &ContinuousTrajectory::length);

  m.def("build_ode", &build_ode, py::arg("config"), py::arg("objective"),
        py::arg("time_scale"), py::arg("start_time") = std::nullopt);
  m.def(
      "coordinate_limit_field",
      [](const ObjectiveSpec& f, int dimension, const std::string& kind, double mass,
         std::optional<double> start_time) {
        return coordinate_limit_field(f, dimension, algorithm_from_string(kind), mass,
                                      start_time);
      },
      py::arg("objective"), py::arg("dimension"), py::arg("kind"), py::arg("mass") = 1.0,
      py::arg("start_time") = std::nullopt);
  m.def("newton_flow_field", &newton_flow_field, py::arg("objective"),
        py::arg("time_scale"));
  m.def("composite_massless_field", &composite_massless_field, py::arg("objective"),
        py::arg("damping"));
  m.def("integrate", &integrate, py::arg("system"), py::arg("x0"), py::arg("v0"),
        py::arg("t_end"), py::arg("dt"));
  m.def("discrete_continuous_deviation", &discrete_continuous_deviation,
        py::arg("discrete"), py::arg("continuous"), py::arg("time_scale"));
  m.def("total_energy", &total_energy, py::arg("objective"), py::arg("trajectory"),
        py::arg("mass"));

  py::class_<LyapunovCertificate>(m, "LyapunovCertificate")
      .def_property_readonly(
          "setting", [](const LyapunovCertificate& c) { return to_string(c.setting); })
      .def_readonly("start_time", &LyapunovCertificate::start_time)
      .def_readonly("lambda_", &LyapunovCertificate::lambda)
      .def_readonly("sigma", &LyapunovCertificate::sigma)
      .def_readonly("modulus", &LyapunovCertificate::modulus)
      .def_readonly("damping", &LyapunovCertificate::damping)
      .def_readonly("mass", &LyapunovCertificate::mass)
      .def("gamma", [](const LyapunovCertificate& c, double t) { return c.gamma(t); });

  py::class_<MonotonicityReport>(m, "MonotonicityReport")
      .def_property_readonly(
          "setting", [](const MonotonicityReport& r) { return to_string(r.setting); })
      .def_readonly("times", &MonotonicityReport::times)
      .def_readonly("potentials", &MonotonicityReport::potentials)
      .def_readonly("gamma_terms", &MonotonicityReport::gamma_terms)
      .def_readonly("energies", &MonotonicityReport::energies)
      .def_readonly("max_increment", &MonotonicityReport::max_increment)
      .def_readonly("tolerance", &MonotonicityReport::tolerance)
      .def_readonly("passed", &MonotonicityReport::pass);

  m.def(
      "certificate",
      [](const std::string& setting, const ObjectiveSpec& f, const PhysicalParams& params,
         std::optional<double> modulus_override) {
        return certificate(certificate_setting_from_string(setting), f, params,
                           modulus_override);
      },
      py::arg("setting"), py::arg("objective"), py::arg("params"),
      py::arg("modulus_override") = std::nullopt);
  m.def(
      "composite_certificate",
      [](const std::string& setting, const CompositeObjective& cf,
         const PhysicalParams& params, std::optional<double> modulus_override) {
        return certificate(certificate_setting_from_string(setting), cf, params,
                           modulus_override);
      },
      py::arg("setting"), py::arg("objective"), py::arg("params"),
      py::arg("modulus_override") = std::nullopt);
  m.def("certificate_value", &certificate_value, py::arg("certificate"), py::arg("t"),
        py::arg("state"), py::arg("velocity"));
  m.def("monotonicity_tolerance", &monotonicity_tolerance, py::arg("trajectory"),
        py::arg("energy_scale"));
  m.def(
      "verify_monotone",
      [](const LyapunovCertificate& cert, const ContinuousTrajectory& traj,
         std::optional<double> tolerance) {
        double tol = tolerance ? *tolerance : monotonicity_tolerance(traj, 1.0);
        return verify_monotone(cert, traj, tol);
      },
      py::arg("certificate"), py::arg("trajectory"), py::arg("tolerance") = std::nullopt);
  m.def("implied_bound", &implied_bound, py::arg("certificate"), py::arg("report"),
        py::arg("t"));

  py::class_<RateBound>(m, "RateBound")
      .def_property_readonly("id", [](const RateBound& b) { return to_string(b.id); })
      .def_readonly("constant", &RateBound::constant)
      .def_readonly("needs_calibration", &RateBound::needs_calibration)
      .def_readonly("description", &RateBound::description)
      .def("__call__", [](const RateBound& b, int k) { return b(k); });

  py::class_<BoundReport>(m, "BoundReport")
      .def_property_readonly("id", [](const BoundReport& r) { return to_string(r.id); })
      .def_readonly("passed", &BoundReport::pass)
      .def_readonly("first_violation", &BoundReport::first_violation)
      .def_readonly("calibrated_constant", &BoundReport::calibrated_constant)
      .def_readonly("gaps", &BoundReport::gaps)
      .def_readonly("bounds", &BoundReport::bounds)
      .def_readonly("inconclusive", &BoundReport::inconclusive)
      .def_readonly("xi", &BoundReport::xi)
      .def_readonly("ratios", &BoundReport::ratios);

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("exponent", &RateFit::exponent)
      .def_readonly("constant", &RateFit::constant)
      .def_readonly("window_lo", &RateFit::window_lo)
      .def_readonly("window_hi", &RateFit::window_hi)
      .def_readonly("residual", &RateFit::residual)
      .def_readonly("kind", &RateFit::kind)
      .def_readonly("window_shrunk", &RateFit::window_shrunk);

  m.def(
      "bound_catalog",
      [](const std::string& id, const ConditionConstants& consts, double x0_norm,
         int dimension) {
        return bound_catalog(rate_bound_from_string(id), consts, x0_norm, dimension);
      },
      py::arg("id"), py::arg("constants"), py::arg("x0_norm"), py::arg("dimension"));
  m.def(
      "check_bound",
      [](const RateBound& bound, const DiscreteTrajectory& traj, double f_star,
         bool calibrate, int k0) {
        return check_bound(bound, traj, f_star,
                           calibrate ? ConstantMode::CalibratedAtK0
                                     : ConstantMode::ClosedForm,
                           k0);
      },
      py::arg("bound"), py::arg("trajectory"), py::arg("f_star"),
      py::arg("calibrate") = false, py::arg("k0") = 1);
  m.def(
      "fit_linear_rate",
      [](const DiscreteTrajectory& traj, double f_star) {
        return fit_linear_rate(traj, f_star);
      },
      py::arg("trajectory"), py::arg("f_star"));
  m.def(
      "fit_sublinear_rate",
      [](const DiscreteTrajectory& traj, double f_star) {
        return fit_sublinear_rate(traj, f_star);
      },
      py::arg("trajectory"), py::arg("f_star"));
  m.def("fit_linear_rate_time", &fit_linear_rate_time, py::arg("times"), py::arg("gaps"),
        py::arg("t_lo"), py::arg("t_hi"));
  m.def("check_newton_quadratic", &check_newton_quadratic, py::arg("trajectory"),
        py::arg("f_star"));

  m.def("list_settings", &list_settings);
  m.def(
      "run_experiment_file",
      [](const std::string& config_path, const std::string& out_dir,
         std::optional<double> dt) {
        const std::filesystem::path path(config_path);
        auto config = parse_experiment(io::read_text_file(path), path.parent_path());
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (dt) config.dt_override = dt;
        const auto result = run_experiment(config);
        return py::make_tuple(result.all_checks_passed, result.runs_executed,
                              result.manifest_path);
      },
      py::arg("config_path"), py::arg("out_dir") = std::string{},
      py::arg("dt") = std::nullopt);
  m.def(
      "run_figure2_preset",
      [](const std::string& out_dir) {
        auto config = figure2_preset();
        if (!out_dir.empty()) config.output_dir = out_dir;
        const auto result = run_experiment(config);
        return py::make_tuple(result.all_checks_passed, result.runs_executed,
                              result.manifest_path);
      },
      py::arg("out_dir"));
  m.def(
      "verify_manifest",
      [](const std::string& manifest_path) {
        std::string diagnostics;
        const bool ok = verify_manifest(manifest_path, &diagnostics);
        return py::make_tuple(ok, diagnostics);
      },
      py::arg("manifest_path"));
}
