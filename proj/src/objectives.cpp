#include "oscillab/objectives.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace oscillab {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

void ConditionConstants::validate(int dimension) const {
  require(smoothness > 0.0, "smoothness constant L must be positive");
  require(modulus > 0.0, "modulus mu must be positive");
  require(coord_smoothness > 0.0, "coordinate smoothness L_max must be positive");
  if (self_concordance) require(*self_concordance > 0.0, "nu must be positive");
  // L_max <= L <= d * L_max, with a little slack for rounded declarations.
  const double slack = 1e-9 * smoothness;
  require(coord_smoothness <= smoothness + slack, "expected L_max <= L");
  require(smoothness <= dimension * coord_smoothness + slack, "expected L <= d * L_max");
}

ObjectiveSpec make_quadratic(const Matrix& hessian) {
  const auto d = hessian.rows();
  require(d > 0 && hessian.cols() == d, "quadratic matrix must be square");
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("quadratic matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> eigen(hessian, Eigen::EigenvaluesOnly);
  const double lambda_min = eigen.eigenvalues().minCoeff();
  const double lambda_max = eigen.eigenvalues().maxCoeff();
  if (lambda_min <= 0.0) {
    std::ostringstream msg;
    msg << "quadratic matrix is not positive definite (min eigenvalue " << lambda_min << ")";
    throw std::invalid_argument(msg.str());
  }

  const Matrix h = hessian;
  ObjectiveSpec spec;
  spec.id = "quadratic";
  spec.dimension = static_cast<int>(d);
  spec.value = [h](const Vector& x) { return 0.5 * x.dot(h * x); };
  spec.gradient = [h](const Vector& x) { return Vector(h * x); };
  spec.coordinate_gradient = [h](const Vector& x, int j) { return h.row(j).dot(x); };
  spec.hessian = [h](const Vector&) { return h; };
  spec.minimizer = Vector::Zero(d);
  spec.minimum = 0.0;
  spec.constants.smoothness = lambda_max;
  spec.constants.modulus = lambda_min;
  spec.constants.coord_smoothness = h.diagonal().maxCoeff();
  spec.constants.validate(spec.dimension);
  return spec;
}

ObjectiveSpec make_pl_nonconvex() {
  ObjectiveSpec spec;
  spec.id = "pl_nonconvex";
  spec.dimension = 1;
  spec.value = [](const Vector& x) {
    const double s = std::sin(x[0]);
    return x[0] * x[0] + 3.0 * s * s;
  };
  spec.gradient = [](const Vector& x) {
    Vector g(1);
    g[0] = 2.0 * x[0] + 3.0 * std::sin(2.0 * x[0]);
    return g;
  };
  spec.coordinate_gradient = [](const Vector& x, int) {
    return 2.0 * x[0] + 3.0 * std::sin(2.0 * x[0]);
  };
  spec.hessian = [](const Vector& x) {
    Matrix h(1, 1);
    h(0, 0) = 2.0 + 6.0 * std::cos(2.0 * x[0]);
    return h;
  };
  spec.minimizer = Vector::Zero(1);
  spec.minimum = 0.0;
  // |f''| <= 8 everywhere; the PL modulus 1/8 is verified on a grid by the
  // condition-checker tests (the tight constant is about 0.1755).
  spec.constants.smoothness = 8.0;
  spec.constants.modulus = 0.125;
  spec.constants.coord_smoothness = 8.0;
  spec.convex = false;
  spec.constants.validate(1);
  return spec;
}

namespace {

double log_barrier_term(double u) {
  if (u <= -1.0) throw std::domain_error("self-concordant objective requires x > -1");
  return u - std::log1p(u);
}

}  // namespace

ObjectiveSpec make_self_concordant(int dimension) {
  require(dimension >= 1, "dimension must be positive");
  ObjectiveSpec spec;
  spec.id = "self_concordant";
  spec.dimension = dimension;
  spec.value = [](const Vector& x) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) total += log_barrier_term(x[i]);
    return total;
  };
  spec.gradient = [](const Vector& x) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] <= -1.0) throw std::domain_error("self-concordant objective requires x > -1");
      g[i] = x[i] / (1.0 + x[i]);
    }
    return g;
  };
  spec.coordinate_gradient = [](const Vector& x, int j) {
    if (x[j] <= -1.0) throw std::domain_error("self-concordant objective requires x > -1");
    return x[j] / (1.0 + x[j]);
  };
  spec.hessian = [](const Vector& x) {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] <= -1.0) throw std::domain_error("self-concordant objective requires x > -1");
      const double denom = 1.0 + x[i];
      h(i, i) = 1.0 / (denom * denom);
    }
    return h;
  };
  spec.minimizer = Vector::Zero(dimension);
  spec.minimum = 0.0;
  // Declared on the box [-1/2, 1]^d, where the per-coordinate curvature
  // 1/(1+x)^2 ranges over [1/4, 4].
  spec.constants.smoothness = 4.0;
  spec.constants.modulus = 0.25;
  spec.constants.coord_smoothness = 4.0;
  spec.constants.self_concordance = 2.0;
  spec.newton_radius = 0.5;
  spec.constants.validate(dimension);
  return spec;
}

CompositeObjective make_lasso(double l1_weight, int dimension) {
  require(l1_weight >= 0.0, "l1 weight must be nonnegative");
  require(dimension >= 1, "dimension must be positive");

  ObjectiveSpec smooth;
  smooth.id = "quadratic_iso";
  smooth.dimension = dimension;
  smooth.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  smooth.gradient = [](const Vector& x) { return x; };
  smooth.coordinate_gradient = [](const Vector& x, int j) { return x[j]; };
  smooth.hessian = [dimension](const Vector&) {
    return Matrix(Matrix::Identity(dimension, dimension));
  };
  smooth.minimizer = Vector::Zero(dimension);
  smooth.minimum = 0.0;
  smooth.constants.smoothness = 1.0;
  smooth.constants.modulus = 1.0;
  smooth.constants.coord_smoothness = 1.0;

  const double w = l1_weight;
  CompositeObjective cf;
  cf.id = "lasso";
  cf.smooth = std::move(smooth);
  cf.nonsmooth = [w](const Vector& x) { return w * x.lpNorm<1>(); };
  // G(x, p): at nonzero coordinates the l1 subgradient is w sign(x_j); at a
  // kink the sup rule picks w sign(p_j) (any selection attains the sup when
  // p_j = 0, so 0 is used).
  cf.directional_subgradient = [w](const Vector& x, const Vector& p) {
    Vector g = x;  // grad of |x|^2/2
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (x[j] > 0.0)
        g[j] += w;
      else if (x[j] < 0.0)
        g[j] -= w;
      else if (p[j] > 0.0)
        g[j] += w;
      else if (p[j] < 0.0)
        g[j] -= w;
    }
    return g;
  };
  // prox of t * h: soft threshold at t * w
  cf.prox = [w](const Vector& v, double t) {
    const double threshold = t * w;
    Vector out(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (v[j] > threshold)
        out[j] = v[j] - threshold;
      else if (v[j] < -threshold)
        out[j] = v[j] + threshold;
      else
        out[j] = 0.0;
    }
    return out;
  };
  cf.minimizer = Vector::Zero(dimension);
  cf.minimum = 0.0;
  cf.modulus = 1.0;
  return cf;
}

ConditionReport check_pl(const ObjectiveSpec& f, const std::vector<Vector>& samples,
                         double modulus) {
  require(modulus > 0.0, "modulus mu must be positive");
  ConditionReport report;
  report.condition = "pl";
  report.threshold = 1.0 / (2.0 * modulus);
  report.worst = 0.0;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    const double gap = f.gap(samples[i]);
    const double grad_sq = f.gradient(samples[i]).squaredNorm();
    if (grad_sq < 1e-24) {
      report.skipped.push_back(i);
      continue;
    }
    const double ratio = gap / grad_sq;
    if (ratio > report.worst) {
      report.worst = ratio;
      report.worst_index = i;
    }
  }
  report.pass = report.worst <= report.threshold * (1.0 + 1e-9);
  return report;
}

ConditionReport check_qg(const ObjectiveSpec& f, const std::vector<Vector>& samples,
                         double modulus) {
  require(modulus > 0.0, "modulus mu must be positive");
  ConditionReport report;
  report.condition = "qg";
  report.threshold = 0.0;
  report.worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    const double gap = f.gap(samples[i]);
    const double margin =
        gap - 0.5 * modulus * (samples[i] - f.minimizer).squaredNorm();
    if (margin < report.worst) {
      report.worst = margin;
      report.worst_index = i;
    }
  }
  if (samples.empty()) report.worst = 0.0;
  report.pass = report.worst >= -1e-9 * std::max(1.0, std::abs(report.worst));
  return report;
}

namespace {

std::vector<Vector> unit_direction_grid(int dimension, int directions) {
  std::vector<Vector> grid;
  if (dimension == 1) {
    Vector plus(1), minus(1);
    plus[0] = 1.0;
    minus[0] = -1.0;
    grid = {plus, minus};
  } else if (dimension == 2) {
    grid.reserve(directions);
    for (int i = 0; i < directions; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / directions;
      Vector p(2);
      p << std::cos(angle), std::sin(angle);
      grid.push_back(p);
    }
  } else {
    // Fibonacci sphere
    const int n = std::max(directions, 32);
    grid.reserve(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double angle = golden * i;
      Vector p(3);
      p << r * std::cos(angle), r * std::sin(angle), z;
      grid.push_back(p);
    }
  }
  return grid;
}

}  // namespace

ConditionReport check_proximal_pl(const CompositeObjective& cf,
                                  const std::vector<Vector>& samples, double modulus,
                                  int directions) {
  require(modulus > 0.0, "modulus mu must be positive");
  require(cf.dimension() <= 3,
          "proximal-PL check supports dimension <= 3: the direction-grid "
          "infimum is only credible in low dimension");
  const auto grid = unit_direction_grid(cf.dimension(), directions);

  ConditionReport report;
  report.condition = "proximal_pl";
  report.direction_grid = static_cast<int>(grid.size());
  report.threshold = 0.0;
  report.worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    const double gap = cf.gap(samples[i]);
    if (gap <= 1e-14) {
      report.skipped.push_back(i);  // at (or numerically at) the optimum
      continue;
    }
    double inf_force = std::numeric_limits<double>::infinity();
    for (const auto& p : grid)
      inf_force = std::min(inf_force,
                           cf.directional_subgradient(samples[i], p).squaredNorm());
    const double margin = inf_force / (2.0 * modulus) - gap;
    if (margin < report.worst) {
      report.worst = margin;
      report.worst_index = i;
    }
  }
  if (report.worst_index < 0) report.worst = 0.0;
  report.pass = report.worst >= -1e-9 * std::max(1.0, std::abs(report.worst));
  return report;
}

}  // namespace oscillab
