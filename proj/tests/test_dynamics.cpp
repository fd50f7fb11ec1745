#include "oscillab/dynamics.hpp"
#include "oscillab/rates.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace oscillab;
using namespace oscillab::test;

namespace {

Matrix paper_h() {
  Matrix h(2, 2);
  h << 300.0, 1.0, 1.0, 50.0;
  return h;
}

AlgorithmConfig config_for(Algorithm kind, double eta) {
  AlgorithmConfig config;
  config.kind = kind;
  config.step_size = eta;
  config.iterations = 1;
  return config;
}

}  // namespace

TEST_CASE("physical params: massless VGD, massive NAG, invalid scalings") {
  const auto q = make_quadratic(paper_h());

  auto vgd = physical_params(config_for(Algorithm::Vgd, 0.01), q, 0.01);
  CHECK(vgd.mass == 0.0);
  CHECK(vgd.damping == doctest::Approx(1.0));
  CHECK(vgd.regime == MassRegime::Massless);

  // NAG_SC at h = sqrt(eta) with mu about 50: m = 1, c = 2 sqrt(m mu)
  AlgorithmConfig nag = config_for(Algorithm::NagSc, 1e-4);
  auto params = physical_params(nag, q, 1e-2);
  CHECK(params.mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(params.damping ==
        doctest::Approx(2.0 * std::sqrt(q.constants.modulus)).epsilon(1e-12));
  CHECK(params.damping == doctest::Approx(14.14).epsilon(1e-3));
  CHECK(params.regime == MassRegime::Massive);
  // the certificate pairing needs exact critical damping
  CHECK(std::abs(params.damping * params.damping - 4.0 * params.mass * q.constants.modulus) <=
        1e-9 * 4.0 * params.mass * q.constants.modulus);

  // a massless kind at h = sqrt(eta) blows the damping up as eta -> 0
  CHECK_THROWS_WITH_AS(physical_params(config_for(Algorithm::Vgd, 1e-4), q, 1e-2),
                       doctest::Contains("invalid physical system"), std::invalid_argument);
  // a massive kind at h = eta kills both mass and damping
  CHECK_THROWS_AS(physical_params(config_for(Algorithm::NagSc, 1e-4), q, 1e-4),
                  std::invalid_argument);
}

TEST_CASE("physical params: expansion identities invert for constant momentum") {
  const auto q = make_quadratic(paper_h());
  for (double eta : {1e-4, 4e-4}) {
    for (Algorithm kind : {Algorithm::Vgd, Algorithm::NagSc}) {
      const double h = kind == Algorithm::Vgd ? eta : std::sqrt(eta);
      const auto params = physical_params(config_for(kind, eta), q, h);
      // m = (1 + a)/2 h^2/eta and c = (1 - a) h/eta solve back to (a, eta)
      const double eta_rec =
          2.0 * h * h / (2.0 * params.taylor_mass + params.taylor_damping * h);
      const double alpha_rec = 1.0 - params.taylor_damping * eta_rec / h;
      CHECK(eta_rec == doctest::Approx(eta).epsilon(1e-12));
      CHECK(alpha_rec == doctest::Approx(params.momentum).epsilon(1e-12));
    }
  }
}

TEST_CASE("damping classification") {
  CHECK(classify_damping(1.0, 2.0, 1.0) == DampingRegime::Critical);
  CHECK(classify_damping(1.0, 1.0, 1.0) == DampingRegime::Under);
  CHECK(classify_damping(1.0, 3.0, 1.0) == DampingRegime::Over);
  CHECK(classify_damping(1.0, 40.0, 1.0) == DampingRegime::ExtremeOver);
  CHECK(classify_damping(1.0, 0.0, 1.0) == DampingRegime::Under);
}

TEST_CASE("energy decay exponents per regime") {
  CHECK(energy_decay_exponent(1.0, 2.0, 1.0) == doctest::Approx(1.0));
  CHECK(energy_decay_exponent(1.0, 4.0, 1.0) ==
        doctest::Approx(0.5 * (4.0 - std::sqrt(12.0))).epsilon(1e-12));
  CHECK(energy_decay_exponent(1.0, 4.0, 1.0) == doctest::Approx(0.2679).epsilon(1e-3));
  // the extreme-over entry is the observed energy rate, close to 2K/c
  const double extreme = energy_decay_exponent(1.0, 100.0, 1.0);
  CHECK(extreme == doctest::Approx(0.02001).epsilon(1e-3));
  CHECK(std::abs(extreme - 0.02) / 0.02 <= 0.01);
}

TEST_CASE("analytic solution: cosine, initial conditions, massless decay") {
  const auto at_pi = analytic_quadratic_solution(1.0, 0.0, 1.0, 1.0, 0.0, std::acos(-1.0));
  CHECK(at_pi.position == doctest::Approx(-1.0).epsilon(1e-12));

  const auto at_zero = analytic_quadratic_solution(1.0, 0.7, 2.0, 1.3, -0.4, 0.0);
  CHECK(at_zero.position == doctest::Approx(1.3));
  CHECK(at_zero.velocity == doctest::Approx(-0.4));

  const auto massless = analytic_quadratic_solution(0.0, 1.0, 2.0, 1.0, 0.0, 1.0);
  CHECK(massless.position == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("analytic solution agrees with integration in every damping regime") {
  for (double c : {0.5, 2.0, 3.5, 25.0}) {
    ODESystem sys;
    sys.order = ODESystem::Order::Second;
    sys.dimension = 1;
    sys.acceleration = [c](const Vector& x, const Vector& v, double) {
      return Vector(-(c * v + x));  // m = 1, K = 1
    };
    sys.system_id = "test_oscillator";
    const auto traj = integrate(sys, scalar_vec(1.0), scalar_vec(0.5), 2.0, 1e-4);
    for (int i = 0; i < traj.length(); i += 2000) {
      const auto ref = analytic_quadratic_solution(1.0, c, 1.0, 1.0, 0.5, traj.times[i]);
      CHECK(traj.states[i][0] == doctest::Approx(ref.position).epsilon(1e-8));
      CHECK(traj.velocities[i][0] == doctest::Approx(ref.velocity).epsilon(1e-8));
    }
  }
}

TEST_CASE("multivariate analytic solution matches integration on the 2-d quadratic") {
  const Matrix h = paper_h();
  const double c = 14.0;
  ODESystem sys;
  sys.order = ODESystem::Order::Second;
  sys.dimension = 2;
  sys.acceleration = [h, c](const Vector& x, const Vector& v, double) {
    return Vector(-(c * v + h * x));
  };
  sys.system_id = "test_oscillator";
  Vector x0(2), v0(2);
  x0 << 1.0, 1.0;
  v0 << 0.0, 0.0;
  const auto traj = integrate(sys, x0, v0, 0.5, 1e-5);
  const auto [xa, va] = analytic_quadratic_solution(1.0, c, h, x0, v0, 0.5);
  CHECK((traj.states.back() - xa).norm() <= 1e-8);
  CHECK((traj.velocities.back() - va).norm() <= 1e-7);
}

TEST_CASE("build_ode: massless linear flow and the NAG field") {
  const auto iso = make_quadratic(Matrix::Identity(1, 1));
  const auto massless = build_ode(config_for(Algorithm::Vgd, 0.01), iso, 0.01);
  CHECK(massless.order == ODESystem::Order::First);
  CHECK(massless.velocity(scalar_vec(1.0), 0.0)[0] == doctest::Approx(-1.0));
  CHECK(massless.system_id == "vgd_massless");

  const auto q = make_quadratic(paper_h());
  const auto nag = build_ode(config_for(Algorithm::NagSc, 1e-4), q, 1e-2);
  CHECK(nag.order == ODESystem::Order::Second);
  Vector x(2);
  x << 1.0, 0.0;
  const Vector accel = nag.acceleration(x, Vector::Zero(2), 0.0);
  CHECK(accel[0] == doctest::Approx(-300.0));
  CHECK(accel[1] == doctest::Approx(-1.0));
}

TEST_CASE("time-varying damping: c(t) = 3m/t present and singular start rejected") {
  const auto q = make_quadratic(paper_h());
  const auto gc = build_ode(config_for(Algorithm::NagGc, 1e-4), q, 1e-2);
  CHECK(gc.params.time_varying_damping);
  const double m = gc.params.mass;
  CHECK(gc.params.damping_at(3.0 * m) == doctest::Approx(1.0));
  CHECK(gc.start_time > 0.0);
  CHECK_THROWS_AS(build_ode(config_for(Algorithm::NagGc, 1e-4), q, 1e-2, 0.0),
                  std::invalid_argument);

  const auto arcg = coordinate_limit_field(q, 2, Algorithm::ArcgGc, 1.0);
  CHECK(arcg.params.time_varying_damping);
  CHECK(arcg.params.damping_at(3.0) == doctest::Approx(1.0));
}

TEST_CASE("coordinate limit fields") {
  const auto q = make_quadratic(paper_h());
  const auto rcgd = coordinate_limit_field(q, 2, Algorithm::Rcgd);
  Vector x(2);
  x << 1.0, 0.0;
  const Vector vel = rcgd.velocity(x, 0.0);
  CHECK(vel[0] == doctest::Approx(-150.0));
  CHECK(vel[1] == doctest::Approx(-0.5));

  // d = 1 coincides with the VGD flow at c = 1
  const auto iso = make_quadratic(Matrix::Identity(1, 1));
  const auto one = coordinate_limit_field(iso, 1, Algorithm::Rcgd);
  const auto vgd = build_ode(config_for(Algorithm::Vgd, 0.01), iso, 0.01);
  for (double v : {0.3, -1.7})
    CHECK(one.velocity(scalar_vec(v), 0.0)[0] ==
          doctest::Approx(vgd.velocity(scalar_vec(v), 0.0)[0]));

  const auto arcg = coordinate_limit_field(q, 2, Algorithm::ArcgSc, 1.0);
  CHECK(arcg.params.damping ==
        doctest::Approx(2.0 * std::sqrt(q.constants.modulus / 2.0)).epsilon(1e-12));
  CHECK(arcg.params.damping == doctest::Approx(9.9996).epsilon(1e-4));
  // the force enters with the 1/d factor
  const Vector accel = arcg.acceleration(x, Vector::Zero(2), 0.0);
  CHECK(accel[0] == doctest::Approx(-150.0));
}

TEST_CASE("newton flow: isotropic contraction on quadratics and the 1-d barrier") {
  const auto q = make_quadratic(paper_h());
  const auto flow = newton_flow_field(q, 0.5);
  for (const auto& x :
       sample_box(10, Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), 9)) {
    CHECK((flow.velocity(x, 0.0) + x / 0.5).norm() <= 1e-10);
  }
  CHECK(flow.velocity(q.minimizer, 0.0).norm() == 0.0);

  const auto barrier = make_self_concordant(1);
  const auto bflow = newton_flow_field(barrier, 1.0);
  const double phi1 = 0.5 / 1.5;
  const double phi2 = 1.0 / 2.25;
  CHECK(bflow.velocity(scalar_vec(0.5), 0.0)[0] ==
        doctest::Approx(-phi1 / phi2).epsilon(1e-12));
}

TEST_CASE("integrate: exponential accuracy, zero field, final-step landing") {
  ODESystem decay;
  decay.order = ODESystem::Order::First;
  decay.dimension = 1;
  decay.velocity = [](const Vector& x, double) { return Vector(-x); };
  decay.system_id = "test_decay";
  const auto traj = integrate(decay, scalar_vec(1.0), Vector{}, 1.0, 1e-3);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(traj.states.back()[0] - std::exp(-1.0)) <= 1e-9);
  CHECK(traj.velocities.back().norm() == 0.0);  // first-order: zeros recorded
  CHECK(traj.states.front()[0] == 1.0);
  for (int i = 1; i < traj.length(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);

  ODESystem still;
  still.order = ODESystem::Order::First;
  still.dimension = 1;
  still.velocity = [](const Vector& x, double) { return Vector(Vector::Zero(x.size())); };
  still.system_id = "test_still";
  const auto constant = integrate(still, scalar_vec(2.5), Vector{}, 0.35, 0.1);
  CHECK(constant.times.back() == doctest::Approx(0.35));
  for (const auto& x : constant.states) CHECK(x[0] == 2.5);
}

TEST_CASE("integrate: undamped oscillator conserves energy to 1e-8 over [0, 10]") {
  const auto iso = make_quadratic(Matrix::Identity(1, 1));
  ODESystem sys;
  sys.order = ODESystem::Order::Second;
  sys.dimension = 1;
  sys.acceleration = [](const Vector& x, const Vector&, double) { return Vector(-x); };
  sys.system_id = "test_oscillator";
  const auto traj = integrate(sys, scalar_vec(1.0), scalar_vec(0.0), 10.0, 1e-3);
  const auto energy = total_energy(iso, traj, 1.0);
  const double e0 = energy.front();
  for (double e : energy) CHECK(std::abs(e - e0) / e0 <= 1e-8);
}

TEST_CASE("integrator order: error shrinks about 16x per halving of dt") {
  ODESystem decay;
  decay.order = ODESystem::Order::First;
  decay.dimension = 1;
  decay.velocity = [](const Vector& x, double) { return Vector(-x); };
  decay.system_id = "test_decay";
  const double exact = std::exp(-1.0);
  std::vector<double> errors;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const auto traj = integrate(decay, scalar_vec(1.0), Vector{}, 1.0, dt);
    errors.push_back(std::abs(traj.states.back()[0] - exact));
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
  }
}

TEST_CASE("deviation: self-comparison, one VGD step, first-order refinement") {
  const auto iso = make_quadratic(Matrix::Identity(1, 1));
  const auto flow = build_ode(config_for(Algorithm::Vgd, 0.1), iso, 0.1);
  const auto ct = integrate(flow, scalar_vec(1.0), Vector{}, 1.0, 0.1);

  // a discrete trajectory sampled from the flow itself deviates by zero
  DiscreteTrajectory sampled;
  sampled.config.kind = Algorithm::Vgd;
  for (int k = 0; k < ct.length(); ++k) {
    sampled.iterates.push_back(ct.states[k]);
    sampled.values.push_back(iso.value(ct.states[k]));
  }
  CHECK(discrete_continuous_deviation(sampled, ct, 0.1) == 0.0);

  AlgorithmConfig vgd_config = config_for(Algorithm::Vgd, 0.1);
  vgd_config.iterations = 1;
  const auto one_step = run(vgd_config, iso, scalar_vec(1.0));
  const auto fine = integrate(flow, scalar_vec(1.0), Vector{}, 0.1 + 1e-9, 1e-5);
  const double deviation = discrete_continuous_deviation(one_step, fine, 0.1);
  CHECK(deviation == doctest::Approx(std::abs(0.9 - std::exp(-0.1))).epsilon(1e-5));

  // halving eta (and h) about halves the deviation
  auto deviation_for = [&](double eta, int iterations) {
    AlgorithmConfig config = config_for(Algorithm::Vgd, eta);
    config.iterations = iterations;
    const auto traj = run(config, iso, scalar_vec(1.0));
    const auto sys = build_ode(config, iso, eta);
    const auto reference = integrate(sys, scalar_vec(1.0), Vector{}, 1.0 + 1e-9, 1e-5);
    return discrete_continuous_deviation(traj, reference, eta);
  };
  const double coarse = deviation_for(0.1, 10);
  const double fine_dev = deviation_for(0.05, 20);
  const double ratio = fine_dev / coarse;
  CHECK(ratio >= 0.3);
  CHECK(ratio <= 0.7);
}

TEST_CASE("integration truncates with the divergence flag on blow-up") {
  ODESystem explode;
  explode.order = ODESystem::Order::First;
  explode.dimension = 1;
  explode.velocity = [](const Vector& x, double) { return Vector(x.array().square() * 50.0); };
  explode.system_id = "test_explode";
  const auto traj = integrate(explode, scalar_vec(1.0), Vector{}, 10.0, 0.1);
  CHECK(traj.diverged);
  CHECK(traj.length() >= 1);
  for (const auto& x : traj.states) CHECK(x.allFinite());

  // a throwing field (singular Hessian in the Newton flow) truncates the same way
  ObjectiveSpec degenerate = make_quadratic(Matrix::Identity(1, 1));
  degenerate.hessian = [](const Vector& x) {
    Matrix h(1, 1);
    h(0, 0) = 0.0;
    (void)x;
    return h;
  };
  const auto flow = newton_flow_field(degenerate, 1.0);
  CHECK_THROWS_WITH_AS(flow.velocity(scalar_vec(1.0), 0.0), doctest::Contains("singular"),
                       std::runtime_error);
  const auto truncated = integrate(flow, scalar_vec(1.0), Vector{}, 1.0, 0.1);
  CHECK(truncated.diverged);
}

TEST_CASE("deviation rejects disjoint time ranges") {
  const auto iso = make_quadratic(Matrix::Identity(1, 1));
  ODESystem late;
  late.order = ODESystem::Order::First;
  late.dimension = 1;
  late.start_time = 100.0;
  late.velocity = [](const Vector& x, double) { return Vector(-x); };
  late.system_id = "test_late";
  const auto ct = integrate(late, scalar_vec(1.0), Vector{}, 101.0, 0.1);
  DiscreteTrajectory traj;
  traj.iterates = {scalar_vec(1.0), scalar_vec(0.9)};
  traj.values = {0.5, 0.405};
  CHECK_THROWS_AS(discrete_continuous_deviation(traj, ct, 0.1), std::invalid_argument);
}

TEST_CASE("critical damping reaches the energy floor first on the reference grid") {
  // The particle launches at unit speed toward equilibrium. From rest the
  // critically damped solution carries a (1 + t) transient whose cost at the
  // 1e-6 threshold still exceeds its rate advantage over c = 1.5 (the
  // crossover sits near 1e-11), which would mask the regime comparison.
  const auto iso = make_quadratic(Matrix::Identity(1, 1));
  auto time_to_floor = [&](double c) {
    ODESystem sys;
    sys.order = ODESystem::Order::Second;
    sys.dimension = 1;
    sys.acceleration = [c](const Vector& x, const Vector& v, double) {
      return Vector(-(c * v + x));
    };
    sys.system_id = "test_oscillator";
    const auto traj = integrate(sys, scalar_vec(1.0), scalar_vec(-1.0), 60.0, 1e-3);
    const auto energy = total_energy(iso, traj, 1.0);
    for (std::size_t i = 0; i < energy.size(); ++i)
      if (energy[i] <= 1e-6 * energy.front()) return traj.times[i];
    return std::numeric_limits<double>::infinity();
  };
  const std::vector<double> grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0};
  double best_c = 0.0;
  double best_t = std::numeric_limits<double>::infinity();
  for (double c : grid) {
    const double t = time_to_floor(c);
    if (t < best_t) {
      best_t = t;
      best_c = c;
    }
  }
  CHECK(best_c == 2.0);
}

TEST_CASE("extreme overdamping: fitted energy decay within 5% of 2K/c") {
  const auto iso = make_quadratic(Matrix::Identity(1, 1));
  const double c = 25.0;  // c^2 = 625 >= 400 m K
  ODESystem sys;
  sys.order = ODESystem::Order::Second;
  sys.dimension = 1;
  sys.acceleration = [c](const Vector& x, const Vector& v, double) {
    return Vector(-(c * v + x));
  };
  sys.system_id = "test_oscillator";
  const auto traj = integrate(sys, scalar_vec(1.0), scalar_vec(0.0), 60.0, 1e-3);
  const auto energy = total_energy(iso, traj, 1.0);
  std::vector<double> times = traj.times;
  const auto fit = fit_linear_rate_time(times, energy, 5.0, 55.0);
  const double limit = 2.0 * 1.0 / c;
  CHECK(std::abs(fit.exponent - limit) / limit <= 0.05);
  CHECK(std::abs(fit.exponent - energy_decay_exponent(1.0, c, 1.0)) / fit.exponent <= 0.02);
}

TEST_CASE("composite massless flow reaches the kink and stays pinned") {
  const auto cf = make_lasso(0.1, 1);
  const auto sys = composite_massless_field(cf, 1.0);
  const auto traj = integrate(sys, scalar_vec(1.0), Vector{}, 4.0, 1e-4);
  CHECK_FALSE(traj.diverged);
  // crossing time for dx/dt = -(x + w): t* = log((x0 + w)/w)
  const double crossing = std::log(1.1 / 0.1);
  for (int i = 0; i < traj.length(); ++i) {
    if (traj.times[i] < crossing - 0.01) CHECK(traj.states[i][0] > 0.0);
    if (traj.times[i] > crossing + 0.01) CHECK(traj.states[i][0] == 0.0);
  }
}
