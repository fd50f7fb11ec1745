#include "oscillab/optimizers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace oscillab {

namespace {

const std::vector<std::pair<Algorithm, std::string>>& algorithm_names() {
  static const std::vector<std::pair<Algorithm, std::string>> names = {
      {Algorithm::Vgd, "VGD"},        {Algorithm::NagSc, "NAG_SC"},
      {Algorithm::NagGc, "NAG_GC"},   {Algorithm::Rcgd, "RCGD"},
      {Algorithm::ArcgSc, "ARCG_SC"}, {Algorithm::ArcgGc, "ARCG_GC"},
      {Algorithm::Newton, "NEWTON"},  {Algorithm::ProxGrad, "PROX_GRAD"},
  };
  return names;
}

bool is_coordinate_kind(Algorithm kind) {
  return kind == Algorithm::Rcgd || kind == Algorithm::ArcgSc || kind == Algorithm::ArcgGc;
}

bool is_momentum_kind(Algorithm kind) {
  return kind == Algorithm::NagSc || kind == Algorithm::NagGc ||
         kind == Algorithm::ArcgSc || kind == Algorithm::ArcgGc;
}

bool finite(const Vector& x) { return x.allFinite(); }

}  // namespace

std::string to_string(Algorithm kind) {
  for (const auto& [value, name] : algorithm_names())
    if (value == kind) return name;
  throw std::invalid_argument("unknown algorithm kind");
}

Algorithm algorithm_from_string(const std::string& name) {
  for (const auto& [value, known] : algorithm_names())
    if (known == name) return value;
  throw std::invalid_argument("unknown algorithm id: " + name);
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> kinds = [] {
    std::vector<Algorithm> out;
    for (const auto& [value, name] : algorithm_names()) out.push_back(value);
    return out;
  }();
  return kinds;
}

std::vector<double> DiscreteTrajectory::gaps(double f_star) const {
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[k] - f_star;
  return out;
}

double nag_sc_momentum(double modulus, double step_size) {
  if (modulus <= 0.0 || step_size <= 0.0)
    throw std::invalid_argument("NAG_SC momentum needs mu > 0 and eta > 0");
  const double product = modulus * step_size;
  if (product > 1.0)
    throw std::invalid_argument("NAG_SC momentum undefined for mu * eta > 1");
  const double root = std::sqrt(1.0 / product);
  return (root - 1.0) / (root + 1.0);
}

double arcg_sc_momentum(double coord_condition_number) {
  if (coord_condition_number < 1.0)
    throw std::invalid_argument("kappa_max must be at least 1");
  const double root = std::sqrt(coord_condition_number);
  return (root - 1.0) / (root + 1.0);
}

double gc_momentum(int k) {
  if (k < 1) throw std::invalid_argument("momentum schedule index starts at 1");
  return static_cast<double>(k - 1) / static_cast<double>(k + 2);
}

Vector update_vgd(const ObjectiveSpec& f, const Vector& x, double eta) {
  return x - eta * f.gradient(x);
}

NagStep update_nag(const ObjectiveSpec& f, const Vector& x, const Vector& x_prev,
                   double alpha, double eta) {
  // alpha == 0 must reduce to VGD bit-for-bit.
  Vector combined = (alpha == 0.0) ? x : Vector(x + alpha * (x - x_prev));
  Vector next = combined - eta * f.gradient(combined);
  return {std::move(next), std::move(combined)};
}

CoordinateStep update_rcgd(const ObjectiveSpec& f, const Vector& x, double eta, Rng& rng) {
  const int j = rng.uniform_index(f.dimension);
  Vector next = x;
  next[j] -= eta * f.coordinate_gradient(x, j);
  return {std::move(next), j};
}

ArcgStep update_arcg(const ObjectiveSpec& f, const Vector& x, const Vector& y_prev,
                     double alpha, double eta, Rng& rng) {
  const int j = rng.uniform_index(f.dimension);
  Vector next = y_prev;
  next[j] -= eta * f.coordinate_gradient(y_prev, j);
  Vector combined = (alpha == 0.0) ? next : Vector(next + alpha * (next - x));
  return {std::move(next), std::move(combined), j};
}

Vector update_newton(const ObjectiveSpec& f, const Vector& x, double eta) {
  if (!f.has_hessian())
    throw std::invalid_argument("Newton update requires a Hessian capability");
  const Matrix h = f.hessian(x);
  Eigen::SelfAdjointEigenSolver<Matrix> eigen(h, Eigen::EigenvaluesOnly);
  const double abs_min = eigen.eigenvalues().cwiseAbs().minCoeff();
  const double abs_max = eigen.eigenvalues().cwiseAbs().maxCoeff();
  if (abs_min == 0.0 || abs_max / abs_min > 1e12) {
    std::ostringstream msg;
    msg << "Hessian numerically singular at x = [" << x.transpose() << "]";
    throw std::runtime_error(msg.str());
  }
  return x - eta * h.fullPivLu().solve(f.gradient(x)).eval();
}

Vector update_prox_grad(const CompositeObjective& cf, const Vector& x, double eta) {
  if (!cf.has_prox())
    throw std::invalid_argument("proximal gradient requires a prox for the nonsmooth part");
  return cf.prox(x - eta * cf.smooth.gradient(x), eta);
}

namespace {

struct RunState {
  DiscreteTrajectory traj;
  bool stopped = false;
};

/// Appends x if it and f(x) are finite; otherwise truncates with the flag.
/// Domain violations while evaluating count as divergence so partial
/// trajectories survive.
void append_or_stop(RunState& state, const ObjectiveSpec* f, const CompositeObjective* cf,
                    Vector x) {
  if (!finite(x)) {
    state.traj.diverged = true;
    state.stopped = true;
    return;
  }
  double value = 0.0;
  try {
    value = cf != nullptr ? cf->value(x) : f->value(x);
  } catch (const std::domain_error&) {
    state.traj.diverged = true;
    state.stopped = true;
    return;
  }
  if (!std::isfinite(value)) {
    state.traj.diverged = true;
    state.stopped = true;
    return;
  }
  state.traj.iterates.push_back(std::move(x));
  state.traj.values.push_back(value);
}

void validate_config(const AlgorithmConfig& config) {
  if (config.iterations < 0) throw std::invalid_argument("iterations must be nonnegative");
  if (config.step_size <= 0.0) throw std::invalid_argument("step size must be positive");
  if (config.momentum && (*config.momentum < 0.0 || *config.momentum >= 1.0))
    throw std::invalid_argument("momentum must lie in [0, 1)");
}

/// Constant momentum for the strongly convex kinds, from the declared
/// constants unless overridden.
double constant_momentum(const AlgorithmConfig& config, const ObjectiveSpec& f) {
  if (config.momentum) return *config.momentum;
  if (config.kind == Algorithm::NagSc) {
    if (f.constants.modulus <= 0.0)
      throw std::invalid_argument("NAG_SC requires a declared modulus mu");
    return nag_sc_momentum(f.constants.modulus, config.step_size);
  }
  if (config.kind == Algorithm::ArcgSc) {
    if (f.constants.modulus <= 0.0 || f.constants.coord_smoothness <= 0.0)
      throw std::invalid_argument("ARCG_SC requires declared mu and L_max");
    return arcg_sc_momentum(f.constants.coord_condition_number());
  }
  return 0.0;
}

}  // namespace

DiscreteTrajectory run(const AlgorithmConfig& config, const ObjectiveSpec& f,
                       const Vector& x0) {
  validate_config(config);
  if (static_cast<int>(x0.size()) != f.dimension)
    throw std::invalid_argument("x0 dimension mismatch");
  if (config.kind == Algorithm::ProxGrad)
    throw std::invalid_argument("PROX_GRAD needs a composite objective");
  if (config.kind == Algorithm::Newton && !f.has_hessian())
    throw std::invalid_argument("NEWTON requires a Hessian capability");

  RunState state;
  state.traj.config = config;
  state.traj.seed = config.seed;
  if (is_coordinate_kind(config.kind)) {
    if (f.constants.coord_smoothness > 0.0 &&
        config.step_size > 1.0 / f.constants.coord_smoothness * (1.0 + 1e-12))
      state.traj.step_size_warning = true;
  } else if (config.kind != Algorithm::Newton) {
    if (f.constants.smoothness > 0.0 &&
        config.step_size > 1.0 / f.constants.smoothness * (1.0 + 1e-12))
      state.traj.step_size_warning = true;
  }

  append_or_stop(state, &f, nullptr, x0);
  if (state.stopped) return state.traj;

  const double eta = config.step_size;
  Rng rng(config.seed);

  switch (config.kind) {
    case Algorithm::Vgd:
    case Algorithm::Newton: {
      for (int k = 1; k <= config.iterations && !state.stopped; ++k) {
        const Vector& x = state.traj.iterates.back();
        Vector next = config.kind == Algorithm::Vgd ? update_vgd(f, x, eta)
                                                    : update_newton(f, x, eta);
        append_or_stop(state, &f, nullptr, std::move(next));
      }
      break;
    }
    case Algorithm::Rcgd: {
      for (int k = 1; k <= config.iterations && !state.stopped; ++k) {
        auto step = update_rcgd(f, state.traj.iterates.back(), eta, rng);
        state.traj.coordinates.push_back(step.coordinate);
        append_or_stop(state, &f, nullptr, std::move(step.next));
      }
      break;
    }
    case Algorithm::NagSc:
    case Algorithm::NagGc: {
      const bool scheduled = config.kind == Algorithm::NagGc && !config.momentum;
      const double fixed_alpha =
          config.kind == Algorithm::NagSc || config.momentum ? constant_momentum(config, f)
                                                             : 0.0;
      state.traj.auxiliary.push_back(x0);  // y^(0) = x^(0)
      for (int k = 1; k <= config.iterations && !state.stopped; ++k) {
        const Vector y_prev = state.traj.auxiliary.back();
        Vector next = y_prev - eta * f.gradient(y_prev);
        if (!finite(next)) {
          state.traj.diverged = true;
          break;
        }
        const double alpha = scheduled ? gc_momentum(k) : fixed_alpha;
        Vector y_next = (alpha == 0.0)
                            ? next
                            : Vector(next + alpha * (next - state.traj.iterates.back()));
        append_or_stop(state, &f, nullptr, std::move(next));
        if (state.stopped) break;
        state.traj.auxiliary.push_back(std::move(y_next));
      }
      break;
    }
    case Algorithm::ArcgSc:
    case Algorithm::ArcgGc: {
      const bool scheduled = config.kind == Algorithm::ArcgGc && !config.momentum;
      const double fixed_alpha =
          config.kind == Algorithm::ArcgSc || config.momentum ? constant_momentum(config, f)
                                                              : 0.0;
      state.traj.auxiliary.push_back(x0);
      for (int k = 1; k <= config.iterations && !state.stopped; ++k) {
        const double alpha = scheduled ? gc_momentum(k) : fixed_alpha;
        auto step = update_arcg(f, state.traj.iterates.back(), state.traj.auxiliary.back(),
                                alpha, eta, rng);
        state.traj.coordinates.push_back(step.coordinate);
        append_or_stop(state, &f, nullptr, std::move(step.next));
        if (state.stopped) break;
        state.traj.auxiliary.push_back(std::move(step.combined));
      }
      break;
    }
    case Algorithm::ProxGrad:
      break;  // unreachable
  }
  return state.traj;
}

DiscreteTrajectory run(const AlgorithmConfig& config, const CompositeObjective& cf,
                       const Vector& x0) {
  validate_config(config);
  if (config.kind != Algorithm::ProxGrad)
    throw std::invalid_argument("composite objectives run under PROX_GRAD only");
  if (static_cast<int>(x0.size()) != cf.dimension())
    throw std::invalid_argument("x0 dimension mismatch");
  if (!cf.has_prox())
    throw std::invalid_argument("proximal gradient requires a prox for the nonsmooth part");

  RunState state;
  state.traj.config = config;
  state.traj.seed = config.seed;
  if (cf.smooth.constants.smoothness > 0.0 &&
      config.step_size > 1.0 / cf.smooth.constants.smoothness * (1.0 + 1e-12))
    state.traj.step_size_warning = true;

  append_or_stop(state, nullptr, &cf, x0);
  for (int k = 1; k <= config.iterations && !state.stopped; ++k) {
    Vector next = update_prox_grad(cf, state.traj.iterates.back(), config.step_size);
    append_or_stop(state, nullptr, &cf, std::move(next));
  }
  return state.traj;
}

}  // namespace oscillab
