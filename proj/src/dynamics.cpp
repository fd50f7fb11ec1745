#include "oscillab/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace oscillab {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

bool massless_kind(Algorithm kind) {
  return kind == Algorithm::Vgd || kind == Algorithm::Rcgd ||
         kind == Algorithm::ProxGrad || kind == Algorithm::Newton;
}

bool coordinate_kind(Algorithm kind) {
  return kind == Algorithm::Rcgd || kind == Algorithm::ArcgSc || kind == Algorithm::ArcgGc;
}

/// Massless kinds need h = Theta(eta), anything else sends the damping to 0
/// or infinity as the step vanishes; massive kinds need h = Theta(sqrt(eta))
/// or the mass degenerates. Checked as a bounded ratio, so Theta-constants
/// of reasonable size pass while a wrong scaling law (a factor eta^(1/2)
/// away) lands far outside the band once the step is small.
void check_scaling(Algorithm kind, double eta, double h) {
  if (eta >= 0.1) return;  // scaling question is moot for large steps
  const bool massless = massless_kind(kind);
  const double ratio = massless ? h / eta : h / std::sqrt(eta);
  if (ratio < 0.05 || ratio > 20.0) {
    std::ostringstream msg;
    msg << "invalid physical system for " << to_string(kind) << ": "
        << (massless ? "massless kinds need h = Theta(eta), got h/eta = "
                     : "massive kinds need h = Theta(sqrt(eta)), got h/sqrt(eta) = ")
        << ratio << "; the mass or damping degenerates as the step vanishes";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

std::string to_string(DampingRegime r) {
  switch (r) {
    case DampingRegime::Under: return "under";
    case DampingRegime::Critical: return "critical";
    case DampingRegime::Over: return "over";
    case DampingRegime::ExtremeOver: return "extreme_over";
  }
  return "unknown";
}

double PhysicalParams::damping_at(double t) const {
  if (!time_varying_damping) return damping;
  if (t <= 0.0) throw std::domain_error("damping schedule 3m/t is singular at t = 0");
  return 3.0 * mass / t;
}

PhysicalParams physical_params(const AlgorithmConfig& config, const ObjectiveSpec& f,
                               double time_scale) {
  require(time_scale > 0.0, "time scale h must be positive");
  require(config.step_size > 0.0, "step size must be positive");

  const double h = time_scale;
  const int d = f.dimension;
  const double eta =
      coordinate_kind(config.kind) ? config.step_size / d : config.step_size;
  // The d-factor in the effective step is a Theta-constant, so the scaling
  // question is posed against the raw step.
  check_scaling(config.kind, config.step_size, h);

  PhysicalParams params;
  params.time_scale = h;
  params.step_size = eta;

  double alpha = 0.0;
  switch (config.kind) {
    case Algorithm::Vgd:
    case Algorithm::Rcgd:
    case Algorithm::ProxGrad:
      alpha = config.momentum.value_or(0.0);
      params.mass = 0.0;
      params.damping = h / eta;
      params.regime = MassRegime::Massless;
      break;
    case Algorithm::Newton:
      params.mass = 0.0;
      params.regime = MassRegime::Massless;
      params.viscosity_tensor = true;
      break;
    case Algorithm::NagSc:
    case Algorithm::ArcgSc: {
      if (config.momentum)
        alpha = *config.momentum;
      else if (config.kind == Algorithm::NagSc)
        alpha = nag_sc_momentum(f.constants.modulus, config.step_size);
      else
        alpha = arcg_sc_momentum(f.constants.coord_condition_number());
      params.mass = h * h / eta;
      const double hooke_modulus =
          config.kind == Algorithm::ArcgSc ? f.constants.modulus / d : f.constants.modulus;
      params.damping = 2.0 * std::sqrt(params.mass * hooke_modulus);
      params.regime = MassRegime::Massive;
      break;
    }
    case Algorithm::NagGc:
    case Algorithm::ArcgGc:
      params.mass = h * h / eta;
      params.regime = MassRegime::Massive;
      params.time_varying_damping = true;
      break;
  }
  params.momentum = alpha;
  params.taylor_mass = 0.5 * (1.0 + alpha) * h * h / eta;
  params.taylor_damping = (1.0 - alpha) * h / eta;
  return params;
}

DampingRegime classify_damping(double mass, double damping, double hooke) {
  require(mass > 0.0, "classification needs a massive system");
  require(damping >= 0.0, "damping must be nonnegative");
  require(hooke > 0.0, "Hooke constant must be positive");
  const double critical_sq = 4.0 * mass * hooke;
  const double c_sq = damping * damping;
  if (std::abs(c_sq - critical_sq) <= 1e-9 * critical_sq) return DampingRegime::Critical;
  if (c_sq < critical_sq) return DampingRegime::Under;
  if (c_sq >= 100.0 * critical_sq) return DampingRegime::ExtremeOver;
  return DampingRegime::Over;
}

double energy_decay_exponent(double mass, double damping, double hooke) {
  require(mass > 0.0, "decay exponent needs a massive system");
  switch (classify_damping(mass, damping, hooke)) {
    case DampingRegime::Under:
    case DampingRegime::Critical:
      return damping / (2.0 * mass);
    case DampingRegime::Over:
      return 0.5 * (damping / mass -
                    std::sqrt(damping * damping / (mass * mass) - 4.0 * hooke / mass));
    case DampingRegime::ExtremeOver:
      // Twice the slow root: the rate the total energy decays at, tending to
      // the massless limit 2K/c.
      return damping / mass -
             std::sqrt(damping * damping / (mass * mass) - 4.0 * hooke / mass);
  }
  return 0.0;
}

OscillatorState analytic_quadratic_solution(double mass, double damping, double hooke,
                                            double x0, double v0, double t) {
  require(hooke > 0.0, "Hooke constant must be positive");
  require(damping >= 0.0, "damping must be nonnegative");
  if (mass == 0.0) {
    require(damping > 0.0, "massless decay needs positive damping");
    const double rate = hooke / damping;
    const double x = x0 * std::exp(-rate * t);
    return {x, -rate * x};
  }
  if (damping == 0.0) {
    const double omega = std::sqrt(hooke / mass);
    const double x = x0 * std::cos(omega * t) + v0 / omega * std::sin(omega * t);
    const double v = -x0 * omega * std::sin(omega * t) + v0 * std::cos(omega * t);
    return {x, v};
  }
  const double sigma = damping / (2.0 * mass);
  switch (classify_damping(mass, damping, hooke)) {
    case DampingRegime::Under: {
      const double omega_d =
          std::sqrt(4.0 * mass * hooke - damping * damping) / (2.0 * mass);
      const double a = x0;
      const double b = (v0 + sigma * x0) / omega_d;
      const double envelope = std::exp(-sigma * t);
      const double x = envelope * (a * std::cos(omega_d * t) + b * std::sin(omega_d * t));
      const double v =
          envelope * ((-sigma * a + b * omega_d) * std::cos(omega_d * t) +
                      (-sigma * b - a * omega_d) * std::sin(omega_d * t));
      return {x, v};
    }
    case DampingRegime::Critical: {
      const double b = v0 + sigma * x0;
      const double envelope = std::exp(-sigma * t);
      const double x = envelope * (x0 + b * t);
      const double v = envelope * (b - sigma * (x0 + b * t));
      return {x, v};
    }
    case DampingRegime::Over:
    case DampingRegime::ExtremeOver: {
      const double disc = std::sqrt(damping * damping - 4.0 * mass * hooke);
      const double r1 = (-damping + disc) / (2.0 * mass);  // slow root
      const double r2 = (-damping - disc) / (2.0 * mass);
      const double a = (v0 - r2 * x0) / (r1 - r2);
      const double b = x0 - a;
      const double x = a * std::exp(r1 * t) + b * std::exp(r2 * t);
      const double v = a * r1 * std::exp(r1 * t) + b * r2 * std::exp(r2 * t);
      return {x, v};
    }
  }
  return {x0, v0};
}

std::pair<Vector, Vector> analytic_quadratic_solution(double mass, double damping,
                                                      const Matrix& hooke,
                                                      const Vector& x0, const Vector& v0,
                                                      double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> eigen(hooke);
  const Matrix& basis = eigen.eigenvectors();
  const Vector x0_modes = basis.transpose() * x0;
  const Vector v0_modes = basis.transpose() * v0;
  Vector x_modes(x0.size()), v_modes(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const auto state = analytic_quadratic_solution(mass, damping, eigen.eigenvalues()[i],
                                                   x0_modes[i], v0_modes[i], t);
    x_modes[i] = state.position;
    v_modes[i] = state.velocity;
  }
  return {basis * x_modes, basis * v_modes};
}

namespace {

ODESystem massless_flow(const ObjectiveSpec& f, const PhysicalParams& params,
                        std::string id) {
  ODESystem sys;
  sys.order = ODESystem::Order::First;
  sys.dimension = f.dimension;
  const double c = params.damping;
  sys.velocity = [grad = f.gradient, c](const Vector& x, double) {
    return Vector(-grad(x) / c);
  };
  sys.system_id = std::move(id);
  sys.params = params;
  return sys;
}

ODESystem massive_flow(const ObjectiveSpec& f, const PhysicalParams& params,
                       double force_scale, std::string id, double start_time) {
  ODESystem sys;
  sys.order = ODESystem::Order::Second;
  sys.dimension = f.dimension;
  sys.start_time = start_time;
  const double m = params.mass;
  if (params.time_varying_damping) {
    sys.acceleration = [grad = f.gradient, params, m, force_scale](
                           const Vector& x, const Vector& v, double t) {
      return Vector(-(params.damping_at(t) * v + force_scale * grad(x)) / m);
    };
  } else {
    const double c = params.damping;
    sys.acceleration = [grad = f.gradient, c, m, force_scale](const Vector& x,
                                                              const Vector& v, double) {
      return Vector(-(c * v + force_scale * grad(x)) / m);
    };
  }
  sys.system_id = std::move(id);
  sys.params = params;
  return sys;
}

}  // namespace

ODESystem build_ode(const AlgorithmConfig& config, const ObjectiveSpec& f,
                    double time_scale, std::optional<double> start_time) {
  const PhysicalParams params = physical_params(config, f, time_scale);
  switch (config.kind) {
    case Algorithm::Vgd:
      return massless_flow(f, params, "vgd_massless");
    case Algorithm::NagSc:
      return massive_flow(f, params, 1.0, "nag_sc", start_time.value_or(0.0));
    case Algorithm::NagGc: {
      const double t0 = start_time.value_or(3.0 * time_scale);
      if (t0 <= 0.0)
        throw std::invalid_argument(
            "NAG_GC flow needs start_time > 0: the damping 3m/t is singular at t = 0");
      return massive_flow(f, params, 1.0, "nag_gc", t0);
    }
    case Algorithm::Rcgd:
    case Algorithm::ArcgSc:
    case Algorithm::ArcgGc: {
      ODESystem sys = coordinate_limit_field(f, f.dimension, config.kind,
                                             params.mass > 0.0 ? params.mass : 1.0,
                                             start_time);
      sys.params.time_scale = time_scale;
      sys.params.step_size = params.step_size;
      return sys;
    }
    case Algorithm::Newton:
      return newton_flow_field(f, time_scale);
    case Algorithm::ProxGrad:
      throw std::invalid_argument(
          "composite flows are built with composite_massless_field");
  }
  throw std::invalid_argument("unknown algorithm kind");
}

ODESystem coordinate_limit_field(const ObjectiveSpec& f, int dimension, Algorithm kind,
                                 double mass, std::optional<double> start_time) {
  require(dimension == f.dimension, "dimension mismatch");
  require(coordinate_kind(kind), "coordinate limit fields exist for RCGD/ARCG kinds");
  const double d = static_cast<double>(dimension);

  PhysicalParams params;
  params.time_scale = 0.0;
  if (kind == Algorithm::Rcgd) {
    params.mass = 0.0;
    params.damping = d;  // X' = -(1/d) grad f
    params.regime = MassRegime::Massless;
    ODESystem sys = massless_flow(f, params, "rcgd_limit");
    return sys;
  }

  params.mass = mass;
  params.regime = MassRegime::Massive;
  ODESystem sys;
  if (kind == Algorithm::ArcgSc) {
    params.damping = 2.0 * std::sqrt(mass * f.constants.modulus / d);
    sys = massive_flow(f, params, 1.0 / d, "arcg_sc_limit", start_time.value_or(0.0));
  } else {
    params.time_varying_damping = true;
    const double t0 = start_time.value_or(0.05);
    if (t0 <= 0.0)
      throw std::invalid_argument(
          "ARCG_GC flow needs start_time > 0: the damping 3m/t is singular at t = 0");
    sys = massive_flow(f, params, 1.0 / d, "arcg_gc_limit", t0);
  }
  return sys;
}

ODESystem newton_flow_field(const ObjectiveSpec& f, double time_scale) {
  require(time_scale > 0.0, "time scale h must be positive");
  require(f.has_hessian(), "Newton flow requires a Hessian capability");
  ODESystem sys;
  sys.order = ODESystem::Order::First;
  sys.dimension = f.dimension;
  sys.velocity = [grad = f.gradient, hess = f.hessian,
                  h = time_scale](const Vector& x, double) {
    const Matrix hx = hess(x);
    Eigen::FullPivLU<Matrix> lu(hx);
    if (!lu.isInvertible()) {
      std::ostringstream msg;
      msg << "singular Hessian in Newton flow at x = [" << x.transpose() << "]";
      throw std::runtime_error(msg.str());
    }
    return Vector(-lu.solve(grad(x)) / h);
  };
  sys.system_id = "newton_flow";
  sys.params.viscosity_tensor = true;
  sys.params.time_scale = time_scale;
  return sys;
}

ODESystem composite_massless_field(const CompositeObjective& cf, double damping) {
  require(damping > 0.0, "damping must be positive");
  ODESystem sys;
  sys.order = ODESystem::Order::First;
  sys.dimension = cf.dimension();

  // Filippov selection of the subgradient flow: away from kinks this is
  // G(x, p) with p the flow direction itself; at a kink where the
  // stationarity condition |grad g_j| <= w holds the coordinate stays put.
  sys.velocity = [cf, damping](const Vector& x, double) {
    Vector zero_dir = Vector::Zero(x.size());
    Vector force = cf.directional_subgradient(x, zero_dir);
    // at kinks, replace by the minimal-norm selection
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (x[j] != 0.0) continue;
      // h is w |x|_1 for the shipped instance: the subdifferential at 0 is
      // [-w, w]; slide within it to cancel the smooth pull when possible.
      Vector plus = Vector::Zero(x.size());
      plus[j] = 1.0;
      const double g_plus = cf.directional_subgradient(x, plus)[j];
      Vector minus = Vector::Zero(x.size());
      minus[j] = -1.0;
      const double g_minus = cf.directional_subgradient(x, minus)[j];
      // interval of attainable force values for coordinate j
      const double lo = std::min(g_plus, g_minus);
      const double hi = std::max(g_plus, g_minus);
      force[j] = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : (std::abs(lo) < std::abs(hi) ? lo : hi);
    }
    return Vector(-force / damping);
  };

  // Fixed-step RK4 cannot land on a kink: once the stages straddle it the
  // net step stalls an O(dt) distance away. Pin a coordinate to the kink as
  // soon as it crossed, or sits within the one-step hover band, provided the
  // kink is stationary (0 lies in the attainable force interval there).
  sys.post_step = [cf, damping](const Vector& prev, Vector& state, Vector& vel, double dt) {
    for (Eigen::Index j = 0; j < state.size(); ++j) {
      Vector pinned = state;
      pinned[j] = 0.0;
      Vector plus = Vector::Zero(state.size());
      plus[j] = 1.0;
      const double g_plus = cf.directional_subgradient(pinned, plus)[j];
      Vector minus = plus;
      minus[j] = -1.0;
      const double g_minus = cf.directional_subgradient(pinned, minus)[j];
      const double lo = std::min(g_plus, g_minus);
      const double hi = std::max(g_plus, g_minus);
      if (!(lo <= 0.0 && 0.0 <= hi)) continue;  // kink not stationary
      const double hover = 5.0 * dt * 0.5 * (hi - lo) / damping;
      const bool crossed = prev[j] * state[j] < 0.0;
      if (crossed || std::abs(state[j]) <= hover) {
        state[j] = 0.0;
        vel[j] = 0.0;
      }
    }
  };

  sys.system_id = "composite_massless";
  sys.params.mass = 0.0;
  sys.params.damping = damping;
  sys.params.regime = MassRegime::Massless;
  return sys;
}

namespace {

struct PhaseState {
  Vector x;
  Vector v;
};

}  // namespace

ContinuousTrajectory integrate(const ODESystem& system, const Vector& x0, const Vector& v0,
                               double t_end, double dt) {
  require(dt > 0.0, "dt must be positive");
  require(t_end > system.start_time, "t_end must exceed the system start time");
  require(static_cast<int>(x0.size()) == system.dimension, "x0 dimension mismatch");

  ContinuousTrajectory traj;
  traj.step = dt;
  traj.system_id = system.system_id;
  traj.params = system.params;

  const bool second_order = system.order == ODESystem::Order::Second;
  Vector x = x0;
  Vector v = second_order ? v0 : Vector(Vector::Zero(system.dimension));
  if (second_order && static_cast<int>(v0.size()) != system.dimension)
    throw std::invalid_argument("v0 dimension mismatch");

  const double t0 = system.start_time;
  const double span = t_end - t0;
  const auto steps = static_cast<long>(std::ceil(span / dt - 1e-12));

  traj.times.push_back(t0);
  traj.states.push_back(x);
  traj.velocities.push_back(second_order ? v : Vector(Vector::Zero(system.dimension)));

  double t = t0;
  for (long i = 1; i <= steps; ++i) {
    const double t_next = std::min(t0 + static_cast<double>(i) * dt, t_end);
    const double step = t_next - t;
    const Vector x_prev = x;
    bool ok = true;
    try {
      if (!second_order) {
        const Vector k1 = system.velocity(x, t);
        const Vector k2 = system.velocity(x + 0.5 * step * k1, t + 0.5 * step);
        const Vector k3 = system.velocity(x + 0.5 * step * k2, t + 0.5 * step);
        const Vector k4 = system.velocity(x + step * k3, t + step);
        x += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      } else {
        const auto accel = system.acceleration;
        auto deriv = [&](const PhaseState& s, double time) {
          return PhaseState{s.v, accel(s.x, s.v, time)};
        };
        const PhaseState s0{x, v};
        const PhaseState k1 = deriv(s0, t);
        const PhaseState k2 =
            deriv({x + 0.5 * step * k1.x, v + 0.5 * step * k1.v}, t + 0.5 * step);
        const PhaseState k3 =
            deriv({x + 0.5 * step * k2.x, v + 0.5 * step * k2.v}, t + 0.5 * step);
        const PhaseState k4 = deriv({x + step * k3.x, v + step * k3.v}, t + step);
        x += step / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
        v += step / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok || !x.allFinite() || (second_order && !v.allFinite())) {
      traj.diverged = true;
      break;
    }
    if (system.post_step) system.post_step(x_prev, x, v, step);
    t = t_next;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.velocities.push_back(second_order ? v : Vector(Vector::Zero(system.dimension)));
  }
  return traj;
}

double discrete_continuous_deviation(const DiscreteTrajectory& discrete,
                                     const ContinuousTrajectory& continuous,
                                     double time_scale) {
  require(time_scale > 0.0, "time scale h must be positive");
  require(!discrete.iterates.empty() && !continuous.times.empty(), "empty trajectory");

  const double ct_lo = continuous.times.front();
  const double ct_hi = continuous.times.back();
  const double dt_hi = time_scale * (discrete.length() - 1);
  if (dt_hi < ct_lo || ct_hi < 0.0)
    throw std::invalid_argument("trajectory time ranges are disjoint");

  double deviation = 0.0;
  bool any = false;
  std::size_t cursor = 0;
  for (int k = 0; k < discrete.length(); ++k) {
    const double t = time_scale * k;
    if (t < ct_lo - 1e-12 || t > ct_hi + 1e-12) continue;
    while (cursor + 1 < continuous.times.size() && continuous.times[cursor + 1] < t)
      ++cursor;
    Vector interpolated;
    if (cursor + 1 >= continuous.times.size()) {
      interpolated = continuous.states.back();
    } else {
      const double t0 = continuous.times[cursor];
      const double t1 = continuous.times[cursor + 1];
      const double w = t1 > t0 ? std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
      interpolated = (1.0 - w) * continuous.states[cursor] + w * continuous.states[cursor + 1];
    }
    deviation = std::max(deviation, (discrete.iterates[k] - interpolated).norm());
    any = true;
  }
  if (!any) throw std::invalid_argument("trajectory time ranges are disjoint");
  return deviation;
}

std::vector<double> total_energy(const ObjectiveSpec& f, const ContinuousTrajectory& traj,
                                 double mass) {
  std::vector<double> energies(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    energies[i] = f.gap(traj.states[i]) + 0.5 * mass * traj.velocities[i].squaredNorm();
  return energies;
}

}  // namespace oscillab
