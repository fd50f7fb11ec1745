#include "oscillab/rates.hpp"

#include "oscillab/io.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oscillab {

namespace {

const std::vector<std::pair<RateBoundId, std::string>>& bound_names() {
  static const std::vector<std::pair<RateBoundId, std::string>> names = {
      {RateBoundId::VgdConvex, "VGD_CONVEX"},
      {RateBoundId::VgdSc, "VGD_SC"},
      {RateBoundId::VgdPl, "VGD_PL"},
      {RateBoundId::NagConvex, "NAG_CONVEX"},
      {RateBoundId::NagSc, "NAG_SC"},
      {RateBoundId::NagQg, "NAG_QG"},
      {RateBoundId::RcgdConvex, "RCGD_CONVEX"},
      {RateBoundId::RcgdPl, "RCGD_PL"},
      {RateBoundId::ArcgConvex, "ARCG_CONVEX"},
      {RateBoundId::ArcgConvexExplicit, "ARCG_CONVEX_EXPLICIT"},
      {RateBoundId::ArcgQg, "ARCG_QG"},
      {RateBoundId::ArcgQgExplicit, "ARCG_QG_EXPLICIT"},
      {RateBoundId::NewtonQuadratic, "NEWTON_QUADRATIC"},
  };
  return names;
}

}  // namespace

std::string to_string(RateBoundId id) {
  for (const auto& [value, name] : bound_names())
    if (value == id) return name;
  throw std::invalid_argument("unknown bound id");
}

RateBoundId rate_bound_from_string(const std::string& name) {
  for (const auto& [value, known] : bound_names())
    if (known == name) return value;
  throw std::invalid_argument("unknown bound id: " + name);
}

const std::vector<RateBoundId>& all_rate_bounds() {
  static const std::vector<RateBoundId> ids = [] {
    std::vector<RateBoundId> out;
    for (const auto& [value, name] : bound_names()) out.push_back(value);
    return out;
  }();
  return ids;
}

double RateBound::unit_value(int k) const {
  switch (form) {
    case Form::SublinearPower:
      return 1.0 / std::pow(static_cast<double>(k), power);
    case Form::LinearBase:
      return std::pow(base, k);
    case Form::LinearExponent:
      return std::exp(-exponent_rate * k);
    case Form::QuadraticRecurrence:
      throw std::invalid_argument("quadratic recurrence has no pointwise bound B(k)");
  }
  return 0.0;
}

double RateBound::operator()(int k) const { return constant * unit_value(k); }

RateBound bound_catalog(RateBoundId id, const ConditionConstants& consts, double x0_norm,
                        int dimension) {
  const double l = consts.smoothness;
  const double mu = consts.modulus;
  const double l_max = consts.coord_smoothness;
  const double d = static_cast<double>(dimension);
  const double x0_sq = x0_norm * x0_norm;

  RateBound b;
  b.id = id;
  switch (id) {
    case RateBoundId::VgdConvex:
      b.form = RateBound::Form::SublinearPower;
      b.power = 1.0;
      b.constant = l * x0_sq / 2.0;
      b.description = "L|x0|^2 / (2k), general convex, eta = 1/L";
      break;
    case RateBoundId::VgdSc:
      b.form = RateBound::Form::LinearBase;
      b.base = 1.0 - mu / l;
      b.constant = l * x0_sq / 2.0;
      b.description = "(1 - 1/kappa)^k L|x0|^2 / 2, strongly convex";
      break;
    case RateBoundId::VgdPl:
      b.form = RateBound::Form::LinearExponent;
      b.exponent_rate = 2.0 * mu / l;
      b.constant = 1.0;
      b.needs_calibration = true;
      b.description = "C exp(-2 mu k / L), PL condition, C anchored at k0";
      break;
    case RateBoundId::NagConvex:
      b.form = RateBound::Form::SublinearPower;
      b.power = 2.0;
      b.constant = 2.0 * l * x0_sq;
      b.description = "2L|x0|^2 / k^2, general convex";
      break;
    case RateBoundId::NagSc:
      b.form = RateBound::Form::LinearBase;
      b.base = 1.0 - std::sqrt(l > 0.0 ? mu / (4.0 * l) : 0.0);
      b.constant = l * x0_sq / 2.0;
      b.description = "(1 - sqrt(1/(4 kappa)))^k L|x0|^2 / 2, strongly convex";
      break;
    case RateBoundId::NagQg:
      b.form = RateBound::Form::LinearExponent;
      b.exponent_rate = 0.4 * std::sqrt(mu / l);
      b.constant = 1.0;
      b.needs_calibration = true;
      b.description = "C exp(-(2/5) sqrt(mu/L) k), convex + QG, C anchored at k0";
      break;
    case RateBoundId::RcgdConvex:
      b.form = RateBound::Form::SublinearPower;
      b.power = 1.0;
      b.constant = d * l_max * x0_sq / 2.0;
      b.description = "d L_max |x0|^2 / (2k), expected gap, general convex";
      break;
    case RateBoundId::RcgdPl:
      b.form = RateBound::Form::LinearExponent;
      b.exponent_rate = 2.0 * mu / (d * l_max);
      b.constant = 1.0;
      b.needs_calibration = true;
      b.description = "C exp(-2 mu k / (d L_max)), expected gap, PL";
      break;
    case RateBoundId::ArcgConvex:
      b.form = RateBound::Form::SublinearPower;
      b.power = 2.0;
      b.constant = d;
      b.needs_calibration = true;
      b.description = "C d / k^2, expected gap, general convex, C anchored at k0";
      break;
    case RateBoundId::ArcgConvexExplicit:
      b.form = RateBound::Form::SublinearPower;
      b.power = 2.0;
      b.constant = 2.0 * d * std::sqrt(l_max) * x0_sq;
      b.description = "2 d sqrt(L_max) |x0|^2 / k^2, expected gap, explicit constant";
      break;
    case RateBoundId::ArcgQg:
      b.form = RateBound::Form::LinearExponent;
      b.exponent_rate = 2.0 / (5.0 * d) * std::sqrt(mu / l_max);
      b.constant = 1.0;
      b.needs_calibration = true;
      b.description = "C exp(-(2/(5d)) sqrt(mu/L_max) k), expected gap, QG";
      break;
    case RateBoundId::ArcgQgExplicit:
      b.form = RateBound::Form::LinearBase;
      b.base = 1.0 - std::sqrt(mu / l_max) / d;
      b.constant = l * x0_sq / 2.0;
      b.description = "(1 - sqrt(mu/L_max)/d)^k L|x0|^2 / 2, expected gap";
      break;
    case RateBoundId::NewtonQuadratic:
      b.form = RateBound::Form::QuadraticRecurrence;
      b.description = "gap(k+1) <= xi gap(k)^2 near the optimum";
      break;
  }
  return b;
}

BoundReport check_bound(const RateBound& bound, const std::vector<double>& gaps,
                        ConstantMode mode, int k0) {
  if (bound.form == RateBound::Form::QuadraticRecurrence)
    throw std::invalid_argument("use check_newton_quadratic for the recurrence bound");
  if (k0 < 1) throw std::invalid_argument("k0 must be at least 1");
  if (static_cast<int>(gaps.size()) <= k0)
    throw std::invalid_argument("trajectory too short for the bound check");

  BoundReport report;
  report.id = bound.id;
  report.gaps = gaps;
  report.bounds.assign(gaps.size(), std::numeric_limits<double>::quiet_NaN());

  double constant = bound.constant;
  if (mode == ConstantMode::CalibratedAtK0 || bound.needs_calibration) {
    const double unit = bound.unit_value(k0);
    constant = unit > 0.0 ? gaps[k0] / unit : 0.0;
  }
  report.calibrated_constant = constant;

  report.pass = true;
  for (int k = k0; k < static_cast<int>(gaps.size()); ++k) {
    const double limit = constant * bound.unit_value(k);
    report.bounds[k] = limit;
    if (gaps[k] > limit * (1.0 + 1e-9) && report.pass) {
      report.pass = false;
      report.first_violation = k;
    }
  }
  return report;
}

BoundReport check_bound(const RateBound& bound, const DiscreteTrajectory& traj,
                        double f_star, ConstantMode mode, int k0) {
  if (traj.diverged)
    throw std::invalid_argument("bound checks require a convergent trajectory");
  return check_bound(bound, traj.gaps(f_star), mode, k0);
}

MeanGapCurve mean_gap_curve(const std::vector<DiscreteTrajectory>& trajectories,
                            double f_star) {
  if (trajectories.empty()) throw std::invalid_argument("no trajectories");
  const std::size_t length = trajectories.front().values.size();
  for (const auto& traj : trajectories)
    if (traj.values.size() != length)
      throw std::invalid_argument("trajectories must share a common length");

  MeanGapCurve curve;
  curve.mean.assign(length, 0.0);
  curve.stderr_.assign(length, 0.0);
  const double n = static_cast<double>(trajectories.size());
  for (std::size_t k = 0; k < length; ++k) {
    double sum = 0.0;
    for (const auto& traj : trajectories) sum += traj.values[k] - f_star;
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& traj : trajectories) {
      const double delta = (traj.values[k] - f_star) - mean;
      sq += delta * delta;
    }
    curve.mean[k] = mean;
    curve.stderr_[k] = trajectories.size() > 1 ? std::sqrt(sq / (n - 1.0) / n) : 0.0;
  }
  return curve;
}

BoundReport check_expectation_bound(const RateBound& bound, const MeanGapCurve& curve,
                                    ConstantMode mode, int k0, double slack) {
  BoundReport report = check_bound(bound, curve.mean, mode, k0);
  // re-evaluate with the standard-error slack
  report.pass = true;
  report.first_violation = -1;
  for (int k = k0; k < static_cast<int>(curve.mean.size()); ++k) {
    const double limit = report.bounds[k] * (1.0 + 1e-9) + slack * curve.stderr_[k];
    if (curve.mean[k] > limit) {
      report.pass = false;
      report.first_violation = k;
      break;
    }
  }
  return report;
}

namespace {

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  int count = 0;
};

Regression least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  Regression r;
  r.count = static_cast<int>(xs.size());
  if (r.count < 2) return r;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < r.count; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / r.count;
  const double my = sy / r.count;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < r.count; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sq = 0.0;
  for (int i = 0; i < r.count; ++i) {
    const double e = ys[i] - (r.intercept + r.slope * xs[i]);
    sq += e * e;
  }
  r.residual = std::sqrt(sq / r.count);
  return r;
}

/// Longest run of positive finite gaps starting at window_lo.
std::pair<int, bool> usable_window(const std::vector<double>& gaps, int window_lo,
                                   int window_hi) {
  int hi = window_lo - 1;
  for (int k = window_lo; k <= window_hi; ++k) {
    if (!(gaps[k] > 0.0) || !std::isfinite(gaps[k])) break;
    hi = k;
  }
  return {hi, hi != window_hi};
}

void clamp_window(const std::vector<double>& gaps, int& lo, int& hi) {
  if (gaps.size() < 2) throw std::invalid_argument("trajectory too short to fit");
  lo = std::max(lo, 0);
  hi = std::min(hi, static_cast<int>(gaps.size()) - 1);
  if (lo > hi) throw std::invalid_argument("empty fit window");
}

}  // namespace

RateFit fit_linear_rate(const std::vector<double>& gaps, int window_lo, int window_hi) {
  clamp_window(gaps, window_lo, window_hi);
  const auto [hi, shrunk] = usable_window(gaps, window_lo, window_hi);

  RateFit fit;
  fit.kind = "log-linear";
  fit.window_lo = window_lo;
  fit.window_hi = hi;
  fit.window_shrunk = shrunk;
  if (hi - window_lo + 1 < 2) return fit;  // nothing to fit; exponent stays 0

  std::vector<double> ks, logs;
  for (int k = window_lo; k <= hi; ++k) {
    ks.push_back(static_cast<double>(k));
    logs.push_back(std::log(gaps[k]));
  }
  const Regression r = least_squares(ks, logs);
  fit.exponent = -r.slope;
  fit.constant = std::exp(r.intercept);
  fit.residual = r.residual;
  return fit;
}

RateFit fit_linear_rate(const DiscreteTrajectory& traj, double f_star) {
  const auto gaps = traj.gaps(f_star);
  const int k_max = static_cast<int>(gaps.size()) - 1;
  return fit_linear_rate(gaps, k_max / 4, 3 * k_max / 4);
}

RateFit fit_sublinear_rate(const std::vector<double>& gaps, int window_lo, int window_hi) {
  clamp_window(gaps, window_lo, window_hi);
  window_lo = std::max(window_lo, 1);  // log k undefined at k = 0
  if (window_lo > window_hi) throw std::invalid_argument("empty fit window");
  const auto [hi, shrunk] = usable_window(gaps, window_lo, window_hi);

  RateFit fit;
  fit.kind = "log-log";
  fit.window_lo = window_lo;
  fit.window_hi = hi;
  fit.window_shrunk = shrunk;
  if (hi - window_lo + 1 < 2) return fit;

  std::vector<double> log_ks, logs;
  for (int k = window_lo; k <= hi; ++k) {
    log_ks.push_back(std::log(static_cast<double>(k)));
    logs.push_back(std::log(gaps[k]));
  }
  const Regression r = least_squares(log_ks, logs);
  fit.exponent = -r.slope;  // power p in C / k^p
  fit.constant = std::exp(r.intercept);
  fit.residual = r.residual;
  return fit;
}

RateFit fit_sublinear_rate(const DiscreteTrajectory& traj, double f_star) {
  const auto gaps = traj.gaps(f_star);
  const int k_max = static_cast<int>(gaps.size()) - 1;
  return fit_sublinear_rate(gaps, std::max(1, k_max / 4), 3 * k_max / 4);
}

RateFit fit_linear_rate_time(const std::vector<double>& times,
                             const std::vector<double>& gaps, double t_lo, double t_hi) {
  if (times.size() != gaps.size()) throw std::invalid_argument("size mismatch");
  RateFit fit;
  fit.kind = "log-linear";
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i])) {
      fit.window_shrunk = true;
      continue;
    }
    ts.push_back(times[i]);
    logs.push_back(std::log(gaps[i]));
  }
  if (ts.size() < 2) return fit;
  const Regression r = least_squares(ts, logs);
  fit.exponent = -r.slope;
  fit.constant = std::exp(r.intercept);
  fit.residual = r.residual;
  return fit;
}

BoundReport check_newton_quadratic(const DiscreteTrajectory& traj, double f_star) {
  BoundReport report;
  report.id = RateBoundId::NewtonQuadratic;
  report.gaps = traj.gaps(f_star);
  int usable = 0;
  for (std::size_t k = 0; k + 1 < report.gaps.size(); ++k) {
    if (report.gaps[k] <= 1e-14) continue;
    const double ratio = report.gaps[k + 1] / (report.gaps[k] * report.gaps[k]);
    report.ratios.push_back(ratio);
    report.xi = std::max(report.xi, ratio);
    ++usable;
  }
  report.inconclusive = usable < 3;
  report.pass = !report.inconclusive && std::isfinite(report.xi);
  return report;
}

std::string BoundReport::csv() const {
  std::string out = "k,gap,bound\n";
  for (std::size_t k = 0; k < gaps.size(); ++k)
    out += io::csv_row({static_cast<double>(k), gaps[k],
                        k < bounds.size() ? bounds[k] : std::numeric_limits<double>::quiet_NaN()});
  return out;
}

}  // namespace oscillab
