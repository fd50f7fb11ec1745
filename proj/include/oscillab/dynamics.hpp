#pragma once

#include "oscillab/objectives.hpp"
#include "oscillab/optimizers.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oscillab {

enum class DampingRegime { Under, Critical, Over, ExtremeOver };
enum class MassRegime { Massless, Massive };

std::string to_string(DampingRegime r);

/// Oscillator parameters induced by an algorithm configuration at time scale
/// h. `mass`/`damping` are the values used by the flows and certificates;
/// `taylor_mass`/`taylor_damping` keep the exact expansion identities
/// m = (1+alpha)/2 h^2/eta and c = (1-alpha) h/eta for constant-alpha kinds
/// (the two coincide only in the h -> 0 limit).
struct PhysicalParams {
  double mass = 0.0;
  double damping = 0.0;     ///< constant damping; schedule kinds use damping_at
  double time_scale = 0.0;  ///< h
  double step_size = 0.0;   ///< effective eta (eta / d for coordinate kinds)
  double momentum = 0.0;    ///< constant alpha used, 0 for schedule kinds
  MassRegime regime = MassRegime::Massless;
  bool time_varying_damping = false;  ///< c(t) = 3 m / t
  bool viscosity_tensor = false;      ///< Newton flow: C = h * hessian
  double taylor_mass = 0.0;
  double taylor_damping = 0.0;

  double damping_at(double t) const;
};

/// Computes (m, c) from (alpha, eta, h) and validates the scaling: massless
/// kinds need h = Theta(eta), massive kinds h = Theta(sqrt(eta)); any other
/// scaling sends m or c to 0 or infinity as the step vanishes and is
/// rejected. Coordinate kinds use the effective step eta / d.
PhysicalParams physical_params(const AlgorithmConfig& config, const ObjectiveSpec& f,
                               double time_scale);

struct ODESystem {
  enum class Order { First, Second };
  Order order = Order::First;
  int dimension = 0;
  double start_time = 0.0;
  /// First-order flows: X' = velocity(X, t).
  std::function<Vector(const Vector&, double)> velocity;
  /// Second-order flows: X'' = acceleration(X, X', t).
  std::function<Vector(const Vector&, const Vector&, double)> acceleration;
  /// Optional projection applied after each integration step
  /// (used by the nonsmooth flow to pin coordinates that reached a kink).
  std::function<void(const Vector& prev, Vector& state, Vector& vel, double dt)> post_step;
  std::string system_id;
  PhysicalParams params;
};

struct ContinuousTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> velocities;  ///< zero vectors for first-order flows
  double step = 0.0;
  std::string method = "rk4";
  std::string system_id;
  PhysicalParams params;
  bool diverged = false;

  int length() const { return static_cast<int>(times.size()); }
};

/// c^2 vs 4 m K, with a 1e-9 relative band for "critical" and a 100x factor
/// for "extreme over".
DampingRegime classify_damping(double mass, double damping, double hooke);

/// Reference decay exponents for a quadratic potential K x^2 / 2:
///   under/critical: c / (2m)            (amplitude envelope)
///   over:           [c/m - sqrt(c^2/m^2 - 4K/m)] / 2   (slow amplitude root)
///   extreme over:   c/m - sqrt(c^2/m^2 - 4K/m)         (energy rate, -> 2K/c)
/// The extreme-over entry is the rate the total energy is observed to decay
/// at, and tends to the massless limit 2K/c.
double energy_decay_exponent(double mass, double damping, double hooke);

struct OscillatorState {
  double position = 0.0;
  double velocity = 0.0;
};

/// Closed-form scalar solution of m x'' + c x' + K x = 0. Massless systems
/// (m = 0) decay as x0 exp(-K t / c) with v = x'.
OscillatorState analytic_quadratic_solution(double mass, double damping, double hooke,
                                            double x0, double v0, double t);

/// Multivariate closed form for m X'' + c X' + H X = 0 via eigendecomposition
/// of H and the per-mode scalar formulas.
std::pair<Vector, Vector> analytic_quadratic_solution(double mass, double damping,
                                                      const Matrix& hooke,
                                                      const Vector& x0, const Vector& v0,
                                                      double t);

/// Builds the flow matching a configuration: massless kinds yield
/// X' = -(1/c) grad f, massive kinds the damped oscillator field, NAG_GC the
/// t-dependent damping c(t) = 3m/t (start_time must be positive; defaults to
/// 3h), Newton the viscosity-tensor flow, and coordinate kinds the
/// coordinate-limit fields.
ODESystem build_ode(const AlgorithmConfig& config, const ObjectiveSpec& f,
                    double time_scale, std::optional<double> start_time = {});

/// Weak-limit fields of the coordinate methods:
///   RCGD:     X' = -(1/d) grad f
///   ARCG_SC:  m X'' + c X' + (1/d) grad f = 0 with c = 2 sqrt(m mu / d)
///   ARCG_GC:  same with c(t) = 3 m / t
ODESystem coordinate_limit_field(const ObjectiveSpec& f, int dimension, Algorithm kind,
                                 double mass = 1.0, std::optional<double> start_time = {});

/// X' = -(1/h) H(X)^{-1} grad f(X), the flow with viscosity tensor h * H(X).
ODESystem newton_flow_field(const ObjectiveSpec& f, double time_scale);

/// Massless subgradient flow c X' + G(X, X') = 0 for a composite objective.
/// Coordinates that cross a kink of h where the stationarity condition holds
/// are pinned there exactly.
ODESystem composite_massless_field(const CompositeObjective& cf, double damping);

/// Classical fixed-step fourth-order Runge-Kutta on the phase-space
/// rewrite; the final step is shortened to land exactly on t_end. Non-finite
/// states truncate the trajectory and set the divergence flag.
ContinuousTrajectory integrate(const ODESystem& system, const Vector& x0, const Vector& v0,
                               double t_end, double dt);

/// max_k | x^(k) - X(k h) | with linear interpolation in t when the grids
/// differ; iterations outside the continuous time range are ignored, and
/// fully disjoint ranges are an error.
double discrete_continuous_deviation(const DiscreteTrajectory& discrete,
                                     const ContinuousTrajectory& continuous,
                                     double time_scale);

/// Potential plus kinetic energy f(X) - f* + m |V|^2 / 2 along a trajectory.
std::vector<double> total_energy(const ObjectiveSpec& f, const ContinuousTrajectory& traj,
                                 double mass);

}  // namespace oscillab
