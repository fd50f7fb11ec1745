#pragma once

#include "oscillab/objectives.hpp"
#include "oscillab/optimizers.hpp"

#include <string>
#include <vector>

namespace oscillab {

enum class RateBoundId {
  VgdConvex,
  VgdSc,
  VgdPl,
  NagConvex,
  NagSc,
  NagQg,
  RcgdConvex,
  RcgdPl,
  ArcgConvex,
  ArcgConvexExplicit,
  ArcgQg,
  ArcgQgExplicit,
  NewtonQuadratic,
};

std::string to_string(RateBoundId id);
RateBoundId rate_bound_from_string(const std::string& name);
const std::vector<RateBoundId>& all_rate_bounds();

/// Closed-form upper bound B(k) on f(x^(k)) - f*. Linear-rate bounds whose
/// constant is only specified up to "a constant depending on x^(0)" carry
/// needs_calibration and are anchored at k0 by check_bound.
struct RateBound {
  enum class Form { SublinearPower, LinearBase, LinearExponent, QuadraticRecurrence };

  RateBoundId id = RateBoundId::VgdConvex;
  Form form = Form::SublinearPower;
  double constant = 0.0;       ///< C
  double power = 0.0;          ///< p: B(k) = C / k^p
  double base = 0.0;           ///< B(k) = C * base^k
  double exponent_rate = 0.0;  ///< B(k) = C * exp(-rate * k)
  bool needs_calibration = false;
  std::string description;

  double operator()(int k) const;
  /// B(k) with C = 1 (used for calibration).
  double unit_value(int k) const;
};

/// The bound catalog, keyed by setting. x0_norm is |x0 - x*|.
RateBound bound_catalog(RateBoundId id, const ConditionConstants& consts, double x0_norm,
                        int dimension);

enum class ConstantMode {
  ClosedForm,      ///< use the catalog constant as-is
  CalibratedAtK0,  ///< solve B(k0) = gap(k0) for the constant
};

struct BoundReport {
  RateBoundId id = RateBoundId::VgdConvex;
  bool pass = false;
  int first_violation = -1;
  double calibrated_constant = 0.0;
  std::vector<double> gaps;    ///< gap(k) for k = 0..K
  std::vector<double> bounds;  ///< B(k), NaN below k0
  // quadratic-recurrence checks
  bool inconclusive = false;
  double xi = 0.0;
  std::vector<double> ratios;

  /// Margin curve CSV: k, gap, bound.
  std::string csv() const;
};

/// Passes iff gap(k) <= B(k) (1 + 1e-9) for all k >= k0.
BoundReport check_bound(const RateBound& bound, const std::vector<double>& gaps,
                        ConstantMode mode, int k0 = 1);
BoundReport check_bound(const RateBound& bound, const DiscreteTrajectory& traj,
                        double f_star, ConstantMode mode, int k0 = 1);

/// Seed-averaged gap curve with per-k standard errors (expectation bounds for
/// the randomized coordinate methods are checked against the mean).
struct MeanGapCurve {
  std::vector<double> mean;
  std::vector<double> stderr_;
};
MeanGapCurve mean_gap_curve(const std::vector<DiscreteTrajectory>& trajectories,
                            double f_star);

/// Passes iff mean(k) <= B(k) (1 + 1e-9) + slack * stderr(k) for all k >= k0.
BoundReport check_expectation_bound(const RateBound& bound, const MeanGapCurve& curve,
                                    ConstantMode mode, int k0 = 1, double slack = 3.0);

struct RateFit {
  double exponent = 0.0;  ///< linear fits: rate r in exp(-r k); log-log fits: power p
  double constant = 0.0;
  int window_lo = 0;
  int window_hi = 0;
  double residual = 0.0;
  std::string kind;  ///< "log-linear" or "log-log"
  bool window_shrunk = false;
};

/// Least-squares slope of log(gap) against k; exponent = -slope. Windows
/// containing non-positive gaps are shrunk to the leading valid run.
RateFit fit_linear_rate(const std::vector<double>& gaps, int window_lo, int window_hi);
/// Default window: middle 50% of the iterations.
RateFit fit_linear_rate(const DiscreteTrajectory& traj, double f_star);

/// Log-log regression: gap ~ C / k^p.
RateFit fit_sublinear_rate(const std::vector<double>& gaps, int window_lo, int window_hi);
RateFit fit_sublinear_rate(const DiscreteTrajectory& traj, double f_star);

/// Log-linear fit in continuous time over [t_lo, t_hi].
RateFit fit_linear_rate_time(const std::vector<double>& times,
                             const std::vector<double>& gaps, double t_lo, double t_hi);

/// Reports the smallest xi with gap(k+1) <= xi * gap(k)^2 over all
/// consecutive pairs with gap(k) > 1e-14; fewer than 3 usable pairs is
/// inconclusive.
BoundReport check_newton_quadratic(const DiscreteTrajectory& traj, double f_star);

}  // namespace oscillab
