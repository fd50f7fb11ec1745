#include "oscillab/lyapunov.hpp"

#include "oscillab/io.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace oscillab {

namespace {

const std::vector<std::pair<CertificateSetting, std::string>>& setting_names() {
  static const std::vector<std::pair<CertificateSetting, std::string>> names = {
      {CertificateSetting::VgdConvex, "VGD_CONVEX"},
      {CertificateSetting::VgdPl, "VGD_PL"},
      {CertificateSetting::NagQg, "NAG_QG"},
      {CertificateSetting::NewtonSc, "NEWTON_SC"},
      {CertificateSetting::CompositeProxPl, "COMPOSITE_PROXPL"},
  };
  return names;
}

/// Trajectory metadata a setting may be verified against.
const std::set<std::string>& compatible_systems(CertificateSetting setting) {
  static const std::set<std::string> massless = {"vgd_massless", "rcgd_limit"};
  static const std::set<std::string> critical = {"nag_sc"};
  static const std::set<std::string> newton = {"newton_flow"};
  static const std::set<std::string> composite = {"composite_massless"};
  switch (setting) {
    case CertificateSetting::VgdConvex:
    case CertificateSetting::VgdPl:
      return massless;
    case CertificateSetting::NagQg:
      return critical;
    case CertificateSetting::NewtonSc:
      return newton;
    case CertificateSetting::CompositeProxPl:
      return composite;
  }
  throw std::invalid_argument("unknown certificate setting");
}

}  // namespace

std::string to_string(CertificateSetting s) {
  for (const auto& [value, name] : setting_names())
    if (value == s) return name;
  throw std::invalid_argument("unknown certificate setting");
}

CertificateSetting certificate_setting_from_string(const std::string& name) {
  for (const auto& [value, known] : setting_names())
    if (known == name) return value;
  throw std::invalid_argument("unknown certificate setting: " + name);
}

const std::vector<CertificateSetting>& all_certificate_settings() {
  static const std::vector<CertificateSetting> settings = [] {
    std::vector<CertificateSetting> out;
    for (const auto& [value, name] : setting_names()) out.push_back(value);
    return out;
  }();
  return settings;
}

LyapunovCertificate certificate(CertificateSetting setting, const ObjectiveSpec& f,
                                const PhysicalParams& params,
                                std::optional<double> modulus_override) {
  LyapunovCertificate cert;
  cert.setting = setting;
  cert.modulus = modulus_override.value_or(f.constants.modulus);
  cert.damping = params.damping;
  cert.mass = params.mass;
  cert.time_scale = params.time_scale;
  cert.potential = [value = f.value, f_star = f.minimum](const Vector& x) {
    return value(x) - f_star;
  };

  switch (setting) {
    case CertificateSetting::VgdConvex: {
      const double c = params.damping;
      if (c <= 0.0) throw std::invalid_argument("VGD_CONVEX needs positive damping");
      // Gamma is singular at t = 0; start one discrete step in.
      cert.start_time = params.time_scale > 0.0 ? params.time_scale : 1e-6;
      cert.gamma = [](double t) { return t; };
      cert.gamma_term = [c, x_star = f.minimizer](double t, const Vector& x, const Vector&) {
        return c * (x - x_star).squaredNorm() / (2.0 * t);
      };
      break;
    }
    case CertificateSetting::VgdPl: {
      const double c = params.damping;
      const double mu = cert.modulus;
      if (c <= 0.0 || mu <= 0.0) throw std::invalid_argument("VGD_PL needs c > 0, mu > 0");
      cert.gamma = [mu, c](double t) { return std::exp(2.0 * mu * t / c); };
      cert.gamma_term = [](double, const Vector&, const Vector&) { return 0.0; };
      break;
    }
    case CertificateSetting::NagQg: {
      const double m = params.mass;
      const double c = params.damping;
      const double mu = cert.modulus;
      if (m <= 0.0) throw std::invalid_argument("NAG_QG needs a massive system");
      const double critical_sq = 4.0 * m * mu;
      if (std::abs(c * c - critical_sq) > 1e-9 * critical_sq)
        throw std::invalid_argument(
            "NAG_QG certificate requires critical damping c^2 = 4 m mu");
      cert.sigma = 4.0 / (5.0 * m);
      cert.lambda = 1.0 / (5.0 * m);
      cert.gamma = [lambda = cert.lambda, c](double t) { return std::exp(lambda * c * t); };
      cert.gamma_term = [m, sc = cert.sigma * c, x_star = f.minimizer](
                            double, const Vector& x, const Vector& v) {
        return 0.5 * m * (v + sc * (x - x_star)).squaredNorm();
      };
      break;
    }
    case CertificateSetting::NewtonSc: {
      const double h = params.time_scale;
      if (h <= 0.0) throw std::invalid_argument("NEWTON_SC needs a positive time scale");
      cert.gamma = [h](double t) { return std::exp(t / (2.0 * h)); };
      cert.gamma_term = [](double, const Vector&, const Vector&) { return 0.0; };
      break;
    }
    case CertificateSetting::CompositeProxPl:
      throw std::invalid_argument("COMPOSITE_PROXPL takes a composite objective");
  }
  return cert;
}

LyapunovCertificate certificate(CertificateSetting setting, const CompositeObjective& cf,
                                const PhysicalParams& params,
                                std::optional<double> modulus_override) {
  if (setting != CertificateSetting::CompositeProxPl)
    throw std::invalid_argument("composite objectives pair with COMPOSITE_PROXPL");
  LyapunovCertificate cert;
  cert.setting = setting;
  cert.modulus = modulus_override.value_or(cf.modulus);
  cert.damping = params.damping;
  cert.mass = params.mass;
  cert.time_scale = params.time_scale;
  const double c = params.damping;
  const double mu = cert.modulus;
  if (c <= 0.0 || mu <= 0.0)
    throw std::invalid_argument("COMPOSITE_PROXPL needs c > 0, mu > 0");
  cert.potential = [cf](const Vector& x) { return cf.value(x) - cf.minimum; };
  cert.gamma = [mu, c](double t) { return std::exp(2.0 * mu * t / c); };
  cert.gamma_term = [](double, const Vector&, const Vector&) { return 0.0; };
  return cert;
}

double certificate_value(const LyapunovCertificate& cert, double t, const Vector& state,
                         const Vector& velocity) {
  if (t < cert.start_time)
    throw std::domain_error("certificate evaluated before its validity start time");
  return cert.gamma(t) * (cert.potential(state) + cert.gamma_term(t, state, velocity));
}

double monotonicity_tolerance(const ContinuousTrajectory& traj, double energy_scale) {
  const double dt = traj.step;
  return 1e-10 + 10.0 * std::abs(energy_scale) * dt * dt * dt * dt;
}

MonotonicityReport verify_monotone(const LyapunovCertificate& cert,
                                   const ContinuousTrajectory& traj, double tolerance) {
  if (!compatible_systems(cert.setting).contains(traj.system_id))
    throw std::invalid_argument("certificate " + to_string(cert.setting) +
                                " does not match a trajectory from system '" +
                                traj.system_id + "'");

  MonotonicityReport report;
  report.setting = cert.setting;
  report.tolerance = tolerance;
  double previous = 0.0;
  bool have_previous = false;
  for (int i = 0; i < traj.length(); ++i) {
    const double t = traj.times[i];
    if (t < cert.start_time - 1e-15) continue;
    const double v = cert.potential(traj.states[i]);
    const double g = cert.gamma_term(t, traj.states[i], traj.velocities[i]);
    const double e = cert.gamma(t) * (v + g);
    report.times.push_back(t);
    report.potentials.push_back(v);
    report.gamma_terms.push_back(g);
    report.energies.push_back(e);
    if (have_previous) report.max_increment = std::max(report.max_increment, e - previous);
    previous = e;
    have_previous = true;
  }
  if (report.times.empty())
    throw std::invalid_argument("trajectory has no samples past the certificate start time");
  report.pass = report.max_increment <= tolerance;
  return report;
}

double implied_bound(const LyapunovCertificate& cert, const MonotonicityReport& report,
                     double t) {
  if (report.times.empty()) throw std::invalid_argument("empty report");
  return report.energies.front() / cert.gamma(t);
}

std::string MonotonicityReport::csv(const LyapunovCertificate& cert) const {
  std::string out = "t,V,Gamma,E,bound\n";
  const double e0 = energies.empty() ? 0.0 : energies.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += io::csv_row({times[i], potentials[i], gamma_terms[i], energies[i],
                        e0 / cert.gamma(times[i])});
  }
  return out;
}

}  // namespace oscillab
