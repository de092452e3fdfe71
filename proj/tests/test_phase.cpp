#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "isochron/phase.hpp"

using namespace isochron;
using testing::vec;

namespace {

/// theta' = w on the real line, observed through cos(theta).
ModelEntry circle_entry(double w) {
  ModelEntry e;
  e.system.name = "circle";
  e.system.dim = 1;
  e.system.state_names = {"theta"};
  e.system.vector_field = [w](const State&, State& dx) {
    dx.resize(1);
    dx[0] = w;
  };
  e.system.observable_default.fn = [](const State& x) { return std::cos(x[0]); };
  e.omega0 = w;
  e.rel_tol = 1e-10;
  return e;
}

/// y <- y + nu (mod 1), observed through cos(2 pi y).
ModelEntry rotation_entry(double nu) {
  ModelEntry e;
  e.system.name = "rotation";
  e.system.kind = SystemKind::discrete;
  e.system.dim = 1;
  e.system.state_names = {"y"};
  e.system.vector_field = [nu](const State& x, State& dx) {
    dx.resize(1);
    dx[0] = x[0] + nu - std::floor(x[0] + nu);
  };
  e.system.observable_default.fn = [](const State& x) { return std::cos(kTwoPi * x[0]); };
  e.omega0 = kTwoPi * nu;
  return e;
}

}  // namespace

TEST_SUITE("phase") {

TEST_CASE("uniform rotation averages to half the initial phasor") {
  const auto e = circle_entry(1.3);
  const double theta0 = 0.7;
  const auto a = fourier_average(e, vec({theta0}), 1000.0 * e.period());
  CHECK(std::abs(a - 0.5 * std::polar(1.0, theta0)) < 1e-6);
}

TEST_CASE("rigid rotation map recovers the initial angle") {
  const auto e = rotation_entry(0.5 * (std::sqrt(5.0) - 1.0));
  const double y0 = 0.2;
  const auto a = fourier_average_discrete(e, vec({y0}), 5000);
  CHECK(std::abs(wrap_pi(std::arg(a) - kTwoPi * y0)) < 1e-3);
  CHECK(std::abs(std::abs(a) - 0.5) < 1e-3);
  CHECK_THROWS_AS(fourier_average_discrete(e, vec({y0}), 0), std::invalid_argument);
  CHECK_THROWS_AS(fourier_average(e, vec({y0}), 10.0), std::invalid_argument);
}

TEST_CASE("van der Pol reference point has phase zero under the full average") {
  const auto& e = lookup("van_der_pol");
  const auto a = fourier_average(e, e.reference_point, 100.0);
  CHECK(std::abs(std::arg(a)) < 1e-3);
}

TEST_CASE("phase on the cycle equals the cycle parameter") {
  const auto& e = lookup("van_der_pol");
  std::vector<double> thetas;
  for (int k = 0; k < 64; ++k) thetas.push_back(kTwoPi * k / 64.0);
  const auto pts = eval_on_cycle(e, thetas);
  for (int k = 0; k < 64; ++k) {
    const auto v = phase_of(e, pts[static_cast<std::size_t>(k)]);
    CHECK(v.converged);
    CHECK(std::abs(wrap_pi(v.theta - thetas[static_cast<std::size_t>(k)])) < 2e-3);
  }
}

TEST_CASE("flow equivariance for van der Pol") {
  const auto& e = lookup("van_der_pol");
  for (const State& x : {vec({1.0, 1.0}), vec({-0.3, 0.2}), vec({2.4, -2.2})}) {
    const auto p = phase_of(e, x);
    REQUIRE(p.converged);
    for (double f : {0.1, 1.0}) {
      const double tau = f * e.period();
      const auto q = phase_of(e, flow_to(e.system, x, tau, e.integrator()));
      CHECK(std::abs(wrap_pi(q.theta - p.theta - e.omega0 * tau)) < 5e-3);
    }
  }
}

TEST_CASE("phaseless points are reported as not converged") {
  CHECK_FALSE(phase_of(lookup("lorenz_r320"), vec({0.0, 0.0, 0.0})).converged);
  CHECK_FALSE(phase_of(lookup("van_der_pol"), vec({0.0, 0.0})).converged);
}

TEST_CASE("escaped trajectories are not converged") {
  const auto v = phase_of(lookup("lorenz_r320"), vec({1e8, 0.0, 0.0}));
  CHECK_FALSE(v.converged);
}

TEST_CASE("elliptic burster converges on its sensitivity set") {
  const auto& e = lookup("ml_elliptic");
  const auto v = phase_of(e, e.sensitivity_set.sample(5)[2]);
  CHECK(v.converged);
  CHECK(v.theta >= 0.0);
  CHECK(v.theta < kTwoPi);
}

TEST_CASE("Lorenz phase is stable under doubling the horizon and tightening the tolerance") {
  const auto& e = lookup("lorenz_r320");
  const State x = vec({30.0, 60.0, 319.0});
  const auto base = default_evaluator(e)(x);
  auto s = default_phase_settings(e, 2.0 * e.horizon_T);
  s.rel_tol = 0.5 * e.rel_tol;
  const auto fine = PhaseEvaluator(e, s)(x);
  REQUIRE(base.converged);
  REQUIRE(fine.converged);
  CHECK(std::abs(wrap_pi(fine.theta - base.theta)) < 1e-2);
}

TEST_CASE("van der Pol phase is stable under doubling the horizon") {
  const auto& e = lookup("van_der_pol");
  const PhaseEvaluator longer(e, default_phase_settings(e, 2.0 * e.horizon_T));
  for (const State& x : {vec({1.0, 1.0}), vec({-2.0, 0.5}), vec({0.1, -0.1})}) {
    const auto a = phase_of(e, x), b = longer(x);
    CHECK(std::abs(wrap_pi(a.theta - b.theta)) < 1e-2);
  }
}

TEST_CASE("phase ignores affine changes of the observable") {
  for (std::string name : {"van_der_pol", "map_eq5", "fitzhugh_rinzel"}) {
    CAPTURE(name);
    const auto& e = lookup(name);
    auto s = default_phase_settings(e);
    const Observable g = s.observable;
    s.observable.fn = [g](const State& x) { return 2.0 * g(x) + 5.0; };
    s.modulus_floor = 0.0;
    const PhaseEvaluator affine(e, s);
    const State x = e.sensitivity_set.sample(7)[2];
    const auto a = phase_of(e, x), b = affine(x);
    REQUIRE(a.converged);
    CHECK(std::abs(wrap_pi(a.theta - b.theta)) < 1e-9);
  }
}

TEST_CASE("map phases converge on the skew-map section") {
  const auto& e = lookup("map_eq5");
  int converged = 0;
  for (double x : {0.1, 0.5, 1.0, 1.5}) {
    for (double y : {0.1, 0.4, 0.8}) converged += phase_of(e, vec({x, y})).converged ? 1 : 0;
  }
  CHECK(converged == 12);
}

TEST_CASE("second planar map phase agrees with a ten times longer sum") {
  const auto& e = lookup("map_fig1b");
  const State x = vec({0.5, 0.5});
  const auto v = phase_of(e, x);
  REQUIRE(v.converged);
  // horizon 50000
  const double longer = 4.302063891;
  CHECK(std::abs(wrap_pi(v.theta - longer)) < 5e-3);
}

TEST_CASE("van der Pol field has a single phaseless patch at the origin") {
  const auto& e = lookup("van_der_pol");
  const auto field = phase_field(e, e.default_section, 1);
  REQUIRE(field.values.size() == 101u * 101u);
  int bad = 0;
  for (int i = 0; i < 101; ++i) {
    for (int j = 0; j < 101; ++j) {
      if (field.at(i, j).converged) continue;
      ++bad;
      CHECK(field.grid.node(i, j).norm() < 0.2);
    }
  }
  CHECK(bad >= 1);
  CHECK_FALSE(field.at(50, 50).converged);
}

TEST_CASE("single-node field equals the pointwise phase") {
  const auto& e = lookup("van_der_pol");
  GridSpec g = e.default_section;
  g.axis1 = {0, 1.2, 1.2, 1};
  g.axis2 = {1, -0.4, -0.4, 1};
  const auto field = phase_field(e, g, 1);
  REQUIRE(field.values.size() == 1);
  CHECK(field.values[0].theta == phase_of(e, vec({1.2, -0.4})).theta);
}

TEST_CASE("field output does not depend on the worker count") {
  const auto& e = lookup("lorenz_r320");
  GridSpec g = e.default_section;
  g.axis1.n = 5;
  g.axis2.n = 4;
  const auto a = phase_field(e, g, 1);
  const auto b = phase_field(e, g, 3);
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    CHECK(a.values[k].theta == b.values[k].theta);
    CHECK(a.values[k].modulus == b.values[k].modulus);
    CHECK(a.values[k].converged == b.values[k].converged);
  }
}

TEST_CASE("field CSV layout") {
  const auto& e = lookup("van_der_pol");
  GridSpec g = e.default_section;
  g.axis1.n = 2;
  g.axis2.n = 3;
  std::ostringstream os;
  write_phase_field_csv(os, e.name(), e.system.state_names, phase_field(e, g, 1));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# model: van_der_pol");
  std::getline(in, line);
  CHECK(line.rfind("# section:", 0) == 0);
  std::getline(in, line);
  CHECK(line == "# axes: x -2.5:2.5 2 y -2.5:2.5 3");
  std::getline(in, line);
  CHECK(line == "i,j,x1,x2,theta,converged");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
}

}  // TEST_SUITE
