#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "isochron/models.hpp"

using namespace isochron;
using testing::vec;

TEST_SUITE("dynamics") {

TEST_CASE("scalar decay matches the exponential") {
  const auto sys = testing::linear_flow(Matrix::Constant(1, 1, -1.0));
  IntegratorOptions o;
  o.rel_tol = 1e-10;
  const State x = flow_to(sys, vec({1.0}), 1.0, o);
  CHECK(std::abs(x[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("dense samples follow the harmonic oscillator") {
  IntegratorOptions o;
  o.rel_tol = 1e-10;
  const auto traj = integrate_flow(testing::harmonic(), vec({1.0, 0.0}), 10.0, o,
                                   SampleSpec::uniform(0.0, 10.0, 41));
  REQUIRE(traj.states.size() == 41);
  CHECK_FALSE(traj.escaped);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (k > 0) CHECK(traj.times[k] > traj.times[k - 1]);
    CHECK(std::abs(traj.states[k][0] - std::cos(traj.times[k])) < 1e-8);
    CHECK(std::abs(traj.states[k][1] + std::sin(traj.times[k])) < 1e-8);
  }
}

TEST_CASE("growth beyond the divergence bound is flagged as escaped") {
  const auto sys = testing::linear_flow(Matrix::Constant(1, 1, 1.0));
  const auto traj = integrate_flow(sys, vec({1.0}), 100.0, {});
  CHECK(traj.escaped);
}

TEST_CASE("finite-time blow-up underflows the step size") {
  SystemDef s;
  s.dim = 1;
  s.vector_field = [](const State& x, State& dx) {
    dx.resize(1);
    dx[0] = x[0] * x[0];
  };
  IntegratorOptions o;
  o.divergence_bound = std::numeric_limits<double>::infinity();
  try {
    (void)flow_to(s, vec({1.0}), 2.0, o);
    FAIL("expected an integration error");
  } catch (const IntegrationError& err) {
    CHECK(err.time_reached() < 1.001);
    CHECK(err.time_reached() > 0.99);
  }
}

TEST_CASE("van der Pol returns to its reference point after one listed period") {
  const auto& e = lookup("van_der_pol");
  IntegratorOptions o;
  o.rel_tol = 1e-10;
  const State back = flow_to(e.system, e.reference_point, kTwoPi / 0.942958, o);
  CHECK((back - e.reference_point).norm() < 1e-4);
}

TEST_CASE("Lorenz trajectory agrees with a tighter-tolerance run") {
  const auto& e = lookup("lorenz_r320");
  IntegratorOptions o;
  o.rel_tol = 1e-9;
  const State x = flow_to(e.system, vec({-48.78, 100.0, 319.0}), 10.0, o);
  // rel_tol 1e-12 reference run
  const State ref = vec({13.695414690963895, 51.643240937738746, 253.67661836020102});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(x[i] - ref[i]) <= 1e-5 * std::abs(ref[i]));
}

TEST_CASE("flow property holds for every continuous model") {
  for (const auto& e : catalog()) {
    if (!e.continuous()) continue;
    CAPTURE(e.name());
    const auto o = e.integrator();
    const double t1 = 0.3 * e.period(), t2 = 0.7 * e.period();
    const State x0 = e.basin_seed;
    const State direct = flow_to(e.system, x0, t2, o);
    const State split = flow_to(e.system, flow_to(e.system, x0, t1, o), t2 - t1, o);
    const double scale = 1.0 + direct.cwiseAbs().maxCoeff();
    CHECK((direct - split).cwiseAbs().maxCoeff() <= 10.0 * o.rel_tol * scale * 10.0);
  }
}

TEST_CASE("fixed point of the second planar map keeps x exactly") {
  const auto sys = make_map_fig1b();
  const double nu0 = sys.param("nu0");
  const auto traj = iterate_map(sys, vec({nu0, 0.3}), 1000);
  REQUIRE(traj.states.size() == 1001);
  for (const auto& s : traj.states) CHECK(s[0] == nu0);
}

TEST_CASE("skew map: two iterates from (0.25, 0)") {
  const auto traj = iterate_map(make_map_eq5(), vec({0.25, 0.0}), 2);
  // decimal hand evaluation of the two update formulas
  CHECK(traj.states[1][0] == doctest::Approx(0.23469135810892).epsilon(1e-14));
  CHECK(traj.states[1][1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(traj.states[2][0] == doctest::Approx(0.250320134284037317754).epsilon(1e-14));
  CHECK(traj.states[2][1] == doctest::Approx(0.51469135810892).epsilon(1e-14));
}

TEST_CASE("skew map orbit stays bounded near x = 0.25") {
  const auto traj = iterate_map(make_map_eq5(), vec({0.3, 0.7}), 5000);
  CHECK_FALSE(traj.escaped);
  const State& last = traj.states.back();
  CHECK(std::abs(last[0] - 0.25) < 0.05);
  CHECK(last[1] >= 0.0);
  CHECK(last[1] < 1.0);
}

TEST_CASE("non-finite map iterate raises an iteration error") {
  SystemDef s;
  s.kind = SystemKind::discrete;
  s.dim = 1;
  s.vector_field = [](const State& x, State& dx) {
    dx.resize(1);
    dx[0] = x[0] > 2.0 ? std::numeric_limits<double>::quiet_NaN() : x[0] + 1.0;
  };
  try {
    (void)iterate_map(s, vec({0.0}), 10);
    FAIL("expected an iteration error");
  } catch (const IterationError& err) {
    CHECK(err.step() == 4);
  }
}

TEST_CASE("fundamental matrix of linear systems") {
  IntegratorOptions o;
  o.rel_tol = 1e-10;
  const auto m = integrate_variational(testing::linear_flow(Matrix::Constant(1, 1, -2.0)),
                                       vec({1.0}), 1.0, o);
  CHECK(std::abs(m.matrix(0, 0) - std::exp(-2.0)) < 1e-8);

  const auto d = integrate_variational(testing::linear_map(Matrix::Constant(1, 1, 0.5)),
                                       vec({1.0}), 3.0);
  CHECK(d.matrix(0, 0) == 0.125);
  CHECK(d.end_state[0] == 0.125);
}

TEST_CASE("map Jacobian products apply later factors on the left") {
  // x <- (y, x*y): orbit-dependent Jacobians that do not commute
  SystemDef s;
  s.kind = SystemKind::discrete;
  s.dim = 2;
  s.vector_field = [](const State& x, State& dx) {
    dx.resize(2);
    dx << x[1], x[0] * x[1];
  };
  s.jacobian = [](const State& x, Matrix& j) {
    j.resize(2, 2);
    j << 0.0, 1.0, x[1], x[0];
  };
  const State x0 = vec({1.5, 0.5});
  const auto m = integrate_variational(s, x0, 3.0);
  const auto orbit = iterate_map(s, x0, 3);
  Matrix expect = s.jac(orbit.states[2]) * s.jac(orbit.states[1]) * s.jac(orbit.states[0]);
  CHECK((m.matrix - expect).norm() < 1e-14);
}

TEST_CASE("tangent propagation is consistent with finite perturbations") {
  const auto& e = lookup("lorenz_r320");
  IntegratorOptions o;
  o.rel_tol = 1e-11;
  const State x0 = e.reference_point;
  const double T = 0.2;
  const auto m = integrate_variational(e.system, x0, T, o);
  const State base = flow_to(e.system, x0, T, o);
  const State dir = vec({0.6, -0.48, 0.64});
  auto defect = [&](double h) {
    const State d = h * dir;
    return (flow_to(e.system, x0 + d, T, o) - base - m.matrix * d).norm();
  };
  const double r = defect(2e-4) / defect(1e-4);
  CHECK(r > 3.0);
  CHECK(r < 5.0);
  CHECK(std::abs(m.matrix.determinant()) > 0.0);
}

TEST_CASE("period of the harmonic oscillator") {
  PeriodOptions po;
  po.window = 60.0;
  const auto p = estimate_period(testing::harmonic(), vec({1.0, 0.0}), 5.0, po);
  CHECK(std::abs(p.omega0 - 1.0) < 1e-6);
}

TEST_CASE("van der Pol period and seed invariance") {
  const auto sys = make_van_der_pol();
  const auto a = estimate_period(sys, vec({2.0, 0.0}), 200.0);
  const auto b = estimate_period(sys, vec({-0.5, 1.5}), 200.0);
  CHECK(std::abs(a.omega0 - 0.942958) < 1e-4);
  CHECK(std::abs(a.period / b.period - 1.0) < 1e-6);
}

TEST_CASE("a fixed point is not periodic") {
  CHECK_THROWS_AS(estimate_period(make_van_der_pol(), vec({0.0, 0.0}), 10.0), NotPeriodicError);
}

TEST_CASE("rotation numbers") {
  const auto fig = make_map_fig1b();
  CHECK(std::abs(estimate_rotation_number(fig, vec({0.2, 0.1}), 20000, 1000) - 0.5613245623) < 1e-8);
  CHECK(std::abs(estimate_rotation_number(make_map_eq5(), vec({0.25, 0.0}), 200000, 2000) -
                 0.24482525) < 1e-6);

  SystemDef rot;
  rot.kind = SystemKind::discrete;
  rot.dim = 1;
  rot.vector_field = [](const State& x, State& dx) {
    dx.resize(1);
    dx[0] = x[0] + 0.3 - std::floor(x[0] + 0.3);
  };
  rot.angle_increment = [](const State&) { return 0.3; };
  CHECK(std::abs(estimate_rotation_number(rot, vec({0.1}), 10000) - 0.3) < 1e-14);
}

}  // TEST_SUITE
