#pragma once

#include <initializer_list>
#include <string>

#include "isochron/dynamics.hpp"

namespace testing {

inline isochron::State vec(std::initializer_list<double> xs) {
  isochron::State s(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) s[i++] = x;
  return s;
}

/// Linear flow x' = A x.
inline isochron::SystemDef linear_flow(const isochron::Matrix& a) {
  isochron::SystemDef s;
  s.name = "linear";
  s.dim = static_cast<int>(a.rows());
  s.vector_field = [a](const isochron::State& x, isochron::State& dx) { dx = a * x; };
  s.jacobian = [a](const isochron::State&, isochron::Matrix& j) { j = a; };
  for (int i = 0; i < s.dim; ++i) s.state_names.push_back("x" + std::to_string(i));
  return s;
}

/// Linear map x <- A x.
inline isochron::SystemDef linear_map(const isochron::Matrix& a) {
  auto s = linear_flow(a);
  s.kind = isochron::SystemKind::discrete;
  return s;
}

/// Harmonic oscillator x' = y, y' = -x.
inline isochron::SystemDef harmonic() {
  isochron::Matrix a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  auto s = linear_flow(a);
  s.name = "harmonic";
  return s;
}

}  // namespace testing

#include <algorithm>
#include <cmath>
#include <random>

#include "isochron/models.hpp"

namespace testing {

/// Central-difference Jacobian; map outputs are compared modulo 1 so the mod-1
/// reductions do not register as jumps.
inline isochron::Matrix fd_jacobian(const isochron::SystemDef& s, const isochron::State& x) {
  isochron::Matrix d(s.dim, s.dim);
  for (int c = 0; c < s.dim; ++c) {
    const double h = 1e-6 * (1.0 + std::abs(x[c]));
    isochron::State xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    isochron::State diff = s.eval(xp) - s.eval(xm);
    if (s.kind == isochron::SystemKind::discrete) {
      for (int r = 0; r < s.dim; ++r) diff[r] -= std::round(diff[r]);
    }
    d.col(c) = diff / (2.0 * h);
  }
  return d;
}

/// Worst relative Jacobian error (max entry error over the largest entry) across
/// `n` random states around the entry's section and sensitivity set.
inline double worst_jacobian_error(const isochron::ModelEntry& e, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& g = e.default_section;
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    isochron::State x = k % 2 == 0 ? e.sensitivity_set.sample(11)[k % 11] : g.base;
    if (k % 2 == 1) {
      x[g.axis1.index] = g.axis1.lo + (g.axis1.hi - g.axis1.lo) * u(rng);
      x[g.axis2.index] = g.axis2.lo + (g.axis2.hi - g.axis2.lo) * u(rng);
    }
    for (int i = 0; i < x.size(); ++i) x[i] *= 1.0 + 0.1 * (u(rng) - 0.5);
    const isochron::Matrix j = e.system.jac(x);
    const isochron::Matrix d = fd_jacobian(e.system, x);
    const double scale = std::max(j.cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, (d - j).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace testing
