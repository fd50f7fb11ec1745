#pragma once

#include "oscillab/objectives.hpp"
#include "oscillab/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oscillab {

enum class Algorithm {
  Vgd,
  NagSc,
  NagGc,
  Rcgd,
  ArcgSc,
  ArcgGc,
  Newton,
  ProxGrad,
};

std::string to_string(Algorithm kind);
Algorithm algorithm_from_string(const std::string& name);
const std::vector<Algorithm>& all_algorithms();

struct AlgorithmConfig {
  Algorithm kind = Algorithm::Vgd;
  double step_size = 0.0;  ///< eta
  /// Fixed momentum override. When unset, NAG_SC / ARCG_SC derive alpha from
  /// the objective constants and the *_GC kinds use the (k-1)/(k+2) schedule.
  std::optional<double> momentum;
  std::uint64_t seed = 0;  ///< used by the coordinate kinds
  int iterations = 0;      ///< K
};

struct DiscreteTrajectory {
  std::vector<Vector> iterates;    ///< x^(0) ... x^(K)
  std::vector<Vector> auxiliary;   ///< y^(0) ... y^(K) for momentum kinds
  std::vector<double> values;      ///< f(x^(k))
  std::vector<int> coordinates;    ///< drawn coordinate per iteration (coordinate kinds)
  AlgorithmConfig config;
  std::uint64_t seed = 0;
  bool diverged = false;           ///< run truncated on non-finite value/gradient
  bool step_size_warning = false;  ///< eta exceeded 1/L (or 1/L_max)

  int length() const { return static_cast<int>(iterates.size()); }
  int dimension() const { return iterates.empty() ? 0 : static_cast<int>(iterates.front().size()); }
  std::vector<double> gaps(double f_star) const;
};

/// Momentum for the strongly convex setting:
/// (sqrt(1/(mu eta)) - 1) / (sqrt(1/(mu eta)) + 1). Requires mu * eta <= 1.
double nag_sc_momentum(double modulus, double step_size);

/// Momentum for ARCG under strong convexity: (sqrt(k) - 1)/(sqrt(k) + 1)
/// with k = kappa_max.
double arcg_sc_momentum(double coord_condition_number);

/// Schedule alpha_k = (k - 1) / (k + 2) for k >= 1, so alpha_1 = 0 and the
/// first step is a pure gradient step.
double gc_momentum(int k);

Vector update_vgd(const ObjectiveSpec& f, const Vector& x, double eta);

struct NagStep {
  Vector next;      ///< x' = y - eta grad f(y)
  Vector combined;  ///< y  = x + alpha (x - x_prev)
};
NagStep update_nag(const ObjectiveSpec& f, const Vector& x, const Vector& x_prev,
                   double alpha, double eta);

struct CoordinateStep {
  Vector next;
  int coordinate;
};
CoordinateStep update_rcgd(const ObjectiveSpec& f, const Vector& x, double eta, Rng& rng);

struct ArcgStep {
  Vector next;      ///< one coordinate of y_prev stepped, the rest copied
  Vector combined;  ///< next + alpha (next - x)
  int coordinate;
};
ArcgStep update_arcg(const ObjectiveSpec& f, const Vector& x, const Vector& y_prev,
                     double alpha, double eta, Rng& rng);

/// x' = x - eta H(x)^{-1} grad f(x), solved as a linear system. Throws when
/// the Hessian condition number exceeds 1e12.
Vector update_newton(const ObjectiveSpec& f, const Vector& x, double eta);

/// x' = prox_{eta h}(x - eta grad g(x)).
Vector update_prox_grad(const CompositeObjective& cf, const Vector& x, double eta);

DiscreteTrajectory run(const AlgorithmConfig& config, const ObjectiveSpec& f,
                       const Vector& x0);
DiscreteTrajectory run(const AlgorithmConfig& config, const CompositeObjective& cf,
                       const Vector& x0);

}  // namespace oscillab
