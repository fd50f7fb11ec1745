#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oscillab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Regularity constants declared by an objective. Constants for
/// non-quadratic objectives are declared (and verified numerically by the
/// condition checkers below), not derived in closed form.
struct ConditionConstants {
  double smoothness = 0.0;        ///< L: gradient Lipschitz constant
  double modulus = 0.0;           ///< mu: strong-convexity / PL / QG modulus
  double coord_smoothness = 0.0;  ///< L_max: per-coordinate Lipschitz constant
  std::optional<double> self_concordance;  ///< nu, when declared

  double condition_number() const { return smoothness / modulus; }
  double coord_condition_number() const { return coord_smoothness / modulus; }

  /// Positivity plus L_max <= L <= d * L_max. Throws std::invalid_argument.
  void validate(int dimension) const;
};

/// A test function with analytically known minimizer and declared constants.
/// Instances are immutable after construction and safe to evaluate from
/// multiple threads.
struct ObjectiveSpec {
  std::string id;
  int dimension = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<double(const Vector&, int)> coordinate_gradient;
  std::function<Matrix(const Vector&)> hessian;  // empty when not available
  Vector minimizer;
  double minimum = 0.0;
  ConditionConstants constants;
  bool convex = true;
  std::optional<double> newton_radius;  ///< declared quadratic-convergence basin

  bool has_hessian() const { return static_cast<bool>(hessian); }
  double gap(const Vector& x) const { return value(x) - minimum; }
};

/// Smooth + nonsmooth pair g + h together with the directional subgradient
/// G(x, p): the element of the subdifferential maximizing <xi, p>.
struct CompositeObjective {
  std::string id;
  ObjectiveSpec smooth;                              ///< g
  std::function<double(const Vector&)> nonsmooth;    ///< h
  std::function<Vector(const Vector&, const Vector&)> directional_subgradient;
  std::function<Vector(const Vector&, double)> prox;  ///< prox_{t h}; empty if none
  Vector minimizer;
  double minimum = 0.0;
  double modulus = 0.0;  ///< declared proximal-PL modulus

  int dimension() const { return smooth.dimension; }
  double value(const Vector& x) const { return smooth.value(x) + nonsmooth(x); }
  double gap(const Vector& x) const { return value(x) - minimum; }
  bool has_prox() const { return static_cast<bool>(prox); }
};

/// Outcome of a sample-based condition check. Conditions are semi-infinite
/// constraints; the checkers evaluate them on caller-supplied samples and
/// report the worst case seen.
struct ConditionReport {
  std::string condition;
  bool pass = false;
  double worst = 0.0;      ///< worst ratio (PL) or worst margin (QG, proximal-PL)
  double threshold = 0.0;
  int worst_index = -1;
  std::vector<int> skipped;  ///< sample indices skipped (near-zero gradient / at optimum)
  int direction_grid = 0;    ///< directions used by the proximal-PL infimum
};

/// f(x) = x' H x / 2 for symmetric positive definite H.
/// L = lambda_max(H), mu = lambda_min(H), L_max = max_j H_jj.
ObjectiveSpec make_quadratic(const Matrix& hessian);

/// f(x) = x^2 + 3 sin^2(x) on d = 1: nonconvex but PL with declared mu = 1/8.
ObjectiveSpec make_pl_nonconvex();

/// f(x) = sum_i (x_i - log(1 + x_i)) with domain x_i > -1.
/// Constants declared on the box [-1/2, 1]^d: mu = 1/4, L = L_max = 4, nu = 2.
ObjectiveSpec make_self_concordant(int dimension = 1);

/// g(x) = |x|^2 / 2, h(x) = weight * |x|_1, with closed-form directional
/// subgradient and soft-threshold prox.
CompositeObjective make_lasso(double l1_weight, int dimension = 1);

/// Worst of gap(x) / |grad f(x)|^2 against 1 / (2 mu). Samples with gradient
/// norm below 1e-12 are skipped and recorded.
ConditionReport check_pl(const ObjectiveSpec& f, const std::vector<Vector>& samples,
                         double modulus);

/// Worst margin of gap(x) - (mu / 2) |x - x*|^2 against 0.
ConditionReport check_qg(const ObjectiveSpec& f, const std::vector<Vector>& samples,
                         double modulus);

/// Checks (1 / 2 mu) inf_p |G(x, p)|^2 >= gap(x) with the infimum taken over
/// a unit-direction grid. Rejects dimension > 3, where a direction grid is
/// not a credible approximation of the infimum.
ConditionReport check_proximal_pl(const CompositeObjective& cf,
                                  const std::vector<Vector>& samples, double modulus,
                                  int directions = 64);

}  // namespace oscillab
