#pragma once

#include "oscillab/dynamics.hpp"
#include "oscillab/objectives.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oscillab {

enum class CertificateSetting { VgdConvex, VgdPl, NagQg, NewtonSc, CompositeProxPl };

std::string to_string(CertificateSetting s);
CertificateSetting certificate_setting_from_string(const std::string& name);
const std::vector<CertificateSetting>& all_certificate_settings();

/// A (gamma, Gamma) pair such that E(t) = gamma(t) (V(t) + Gamma(t)) is
/// non-increasing along the matching flow, certifying the rate 1/gamma.
/// Immutable value object.
struct LyapunovCertificate {
  CertificateSetting setting;
  std::function<double(double)> gamma;
  std::function<double(double, const Vector&, const Vector&)> gamma_term;  ///< Gamma(t, X, V)
  std::function<double(const Vector&)> potential;  ///< V(X) = f(X) - f*
  double start_time = 0.0;                         ///< validity start t0
  // parameters the certificate was built with
  double lambda = 0.0;
  double sigma = 0.0;
  double modulus = 0.0;
  double damping = 0.0;
  double mass = 0.0;
  double time_scale = 0.0;
};

/// Instantiates the certificate for a setting:
///   VGD_CONVEX:       gamma = t,               Gamma = c |X|^2 / (2 t), t0 = h
///   VGD_PL:           gamma = exp(2 mu t / c), Gamma = 0
///   NAG_QG:           gamma = exp(lambda c t), Gamma = m/2 |V + sigma c X|^2,
///                     sigma = 4/(5m), lambda = 1/(5m); requires c^2 = 4 m mu
///   NEWTON_SC:        gamma = exp(t / (2 h)),  Gamma = 0
/// `modulus_override` replaces the objective's declared mu (used to build
/// deliberately falsified certificates in tests).
LyapunovCertificate certificate(CertificateSetting setting, const ObjectiveSpec& f,
                                const PhysicalParams& params,
                                std::optional<double> modulus_override = {});

/// COMPOSITE_PROXPL: gamma = exp(2 mu t / c), Gamma = 0, V from the composite.
LyapunovCertificate certificate(CertificateSetting setting, const CompositeObjective& cf,
                                const PhysicalParams& params,
                                std::optional<double> modulus_override = {});

/// gamma(t) * (V(X) + Gamma(t, X, V)). Throws std::domain_error for t < t0.
double certificate_value(const LyapunovCertificate& cert, double t, const Vector& state,
                         const Vector& velocity);

struct MonotonicityReport {
  CertificateSetting setting;
  std::vector<double> times;
  std::vector<double> potentials;   ///< V
  std::vector<double> gamma_terms;  ///< Gamma
  std::vector<double> energies;     ///< E = gamma (V + Gamma)
  double max_increment = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  /// CSV with columns t, V, Gamma, E, bound.
  std::string csv(const LyapunovCertificate& cert) const;
};

/// 10x the integrator error estimate plus a 1e-10 absolute floor.
double monotonicity_tolerance(const ContinuousTrajectory& traj, double energy_scale);

/// Evaluates E on the trajectory samples with t >= t0 and flags any increase
/// beyond the tolerance. The trajectory must come from a flow matching the
/// certificate setting (checked via the trajectory metadata).
MonotonicityReport verify_monotone(const LyapunovCertificate& cert,
                                   const ContinuousTrajectory& traj, double tolerance);

/// The certified envelope E(t0) / gamma(t), i.e.
/// gamma(t0) (V(t0) + Gamma(t0)) / gamma(t); at t = t0 this is V + Gamma.
double implied_bound(const LyapunovCertificate& cert, const MonotonicityReport& report,
                     double t);

}  // namespace oscillab
