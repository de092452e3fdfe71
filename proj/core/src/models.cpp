#include "isochron/models.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace isochron {

extern const char* const kEmbeddedReferenceData;

namespace {

double sech2(double u) {
  const double c = std::cosh(u);
  return 1.0 / (c * c);
}

/// 0.5 (1 + tanh((v - v1) / v2)) and its derivative.
struct Sigmoid {
  double v1, v2;
  [[nodiscard]] double value(double v) const { return 0.5 * (1.0 + std::tanh((v - v1) / v2)); }
  [[nodiscard]] double slope(double v) const { return 0.5 * sech2((v - v1) / v2) / v2; }
};

State vec(std::initializer_list<double> xs) {
  State s(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) s[i++] = x;
  return s;
}

double frac(double v) { return v - std::floor(v); }

}  // namespace

SystemDef make_van_der_pol(double mu) {
  SystemDef s;
  s.name = "van_der_pol";
  s.dim = 2;
  s.params = {{"mu", mu}};
  s.state_names = {"x", "y"};
  s.vector_field = [mu](const State& x, State& dx) {
    dx.resize(2);
    dx[0] = x[1];
    dx[1] = mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
  };
  s.jacobian = [mu](const State& x, Matrix& j) {
    j.resize(2, 2);
    j << 0.0, 1.0, -2.0 * mu * x[0] * x[1] - 1.0, mu * (1.0 - x[0] * x[0]);
  };
  s.observable_default.component = 1;
  s.omega0_default = 0.942958;
  return s;
}

SystemDef make_lorenz(double sigma, double b, double r) {
  SystemDef s;
  s.name = "lorenz_r320";
  s.dim = 3;
  s.params = {{"sigma", sigma}, {"b", b}, {"r", r}};
  s.state_names = {"x", "y", "z"};
  s.vector_field = [=](const State& x, State& dx) {
    dx.resize(3);
    dx[0] = sigma * (x[1] - x[0]);
    dx[1] = x[0] * (r - x[2]) - x[1];
    dx[2] = x[0] * x[1] - b * x[2];
  };
  s.jacobian = [=](const State& x, Matrix& j) {
    j.resize(3, 3);
    j << -sigma, sigma, 0.0, r - x[2], -1.0, -x[0], x[1], x[0], -b;
  };
  s.observable_default.component = 0;
  s.omega0_default = 15.4547;
  return s;
}

SystemDef make_map_fig1b() {
  static constexpr double nu0 = 0.5613245623;
  static constexpr double gamma = 0.06123456756432;
  SystemDef s;
  s.name = "map_fig1b";
  s.kind = SystemKind::discrete;
  s.dim = 2;
  s.params = {{"nu0", nu0}, {"gamma", gamma}};
  s.state_names = {"x", "y"};
  s.vector_field = [](const State& x, State& dx) {
    dx.resize(2);
    dx[0] = frac(gamma * (x[0] - nu0) + nu0);
    dx[1] = frac(x[1] + x[0]);
  };
  s.jacobian = [](const State&, Matrix& j) {
    j.resize(2, 2);
    j << gamma, 0.0, 1.0, 1.0;
  };
  s.angle_increment = [](const State& x) { return x[0]; };
  s.observable_default.component = 1;
  s.omega0_default = 3.52690624;
  return s;
}

SystemDef make_map_eq5() {
  static constexpr double a = 0.03;
  static constexpr double gamma = 0.06123456756432;
  SystemDef s;
  s.name = "map_eq5";
  s.kind = SystemKind::discrete;
  s.dim = 2;
  s.params = {{"a", a}, {"gamma", gamma}};
  s.state_names = {"x", "y"};
  s.vector_field = [](const State& x, State& dx) {
    dx.resize(2);
    const double sn = std::sin(kTwoPi * x[1]);
    dx[0] = (1.0 - gamma) * x[0] + a * sn * sn;
    dx[1] = frac(x[0] + x[1] + a * sn);
  };
  s.jacobian = [](const State& x, Matrix& j) {
    j.resize(2, 2);
    const double arg = kTwoPi * x[1];
    j << 1.0 - gamma, kTwoPi * a * std::sin(2.0 * arg), 1.0, 1.0 + kTwoPi * a * std::cos(arg);
  };
  s.angle_increment = [](const State& x) { return x[0] + a * std::sin(kTwoPi * x[1]); };
  s.observable_default.component = 1;
  s.omega0_default = 1.53828241;
  return s;
}

SystemDef make_morris_lecar(MorrisLecarRegime regime) {
  struct P {
    double gca = 4, gk = 8, gl = 2, vk = -84, vl = -60, vca = 120;
    double c, i, gkca, phi, eps1, mu, eps2, tau_s, gcas, ca0;
    double v1 = -1.2, v2 = 18, v3, v4, v5, v6;
  } p{};
  std::string name;
  double omega0 = 0.0;
  int obs = 1;
  switch (regime) {
    case MorrisLecarRegime::square_wave:
      name = "ml_square_wave";
      p.c = 17.8, p.i = 45, p.gkca = 0.25, p.phi = 0.25, p.eps1 = 0.005, p.mu = 0.2;
      p.eps2 = 0, p.tau_s = 1, p.gcas = 0, p.ca0 = 10, p.v3 = 12, p.v4 = 17.4, p.v5 = 0, p.v6 = 1;
      omega0 = 0.008870246;
      obs = 1;
      break;
    case MorrisLecarRegime::elliptic:
      name = "ml_elliptic";
      p.c = 10, p.i = 120, p.gkca = 0.75, p.phi = 0.04, p.eps1 = 0.002, p.mu = 0.3;
      p.eps2 = 0, p.tau_s = 1, p.gcas = 0, p.ca0 = 18, p.v3 = 2, p.v4 = 30, p.v5 = 0, p.v6 = 1;
      omega0 = 0.0037015;
      obs = 2;
      break;
    case MorrisLecarRegime::parabolic:
      name = "ml_parabolic";
      p.c = 1, p.i = 65, p.gkca = 1, p.phi = 1.333, p.eps1 = 0.02, p.mu = 0.025;
      p.eps2 = 0.02, p.tau_s = 0.05, p.gcas = 1, p.ca0 = 1, p.v3 = 12, p.v4 = 17.4, p.v5 = 12,
      p.v6 = 24;
      omega0 = 0.075131;
      obs = 1;
      break;
  }
  // With eps2 = 0 the s-equation is dropped and s stays at 0.
  const bool with_s = p.eps2 != 0.0;
  const int dim = with_s ? 4 : 3;
  const Sigmoid minf{p.v1, p.v2}, winf{p.v3, p.v4}, sinf{p.v5, p.v6};

  SystemDef s;
  s.name = name;
  s.dim = dim;
  s.params = {{"gCa", p.gca},   {"gK", p.gk},     {"gL", p.gl},       {"VK", p.vk},
              {"VL", p.vl},     {"VCa", p.vca},   {"C", p.c},         {"I", p.i},
              {"gKCa", p.gkca}, {"phi", p.phi},   {"eps1", p.eps1},   {"mu", p.mu},
              {"eps2", p.eps2}, {"tau_s", p.tau_s}, {"gCaS", p.gcas}, {"Ca0", p.ca0},
              {"V1", p.v1},     {"V2", p.v2},     {"V3", p.v3},       {"V4", p.v4},
              {"V5", p.v5},     {"V6", p.v6}};
  s.state_names = with_s ? std::vector<std::string>{"V", "n", "h", "s"}
                         : std::vector<std::string>{"V", "n", "h"};
  s.vector_field = [=](const State& x, State& dx) {
    const double v = x[0], n = x[1], h = x[2], sv = with_s ? x[3] : 0.0;
    const double m = minf.value(v);
    const double z = h / (p.ca0 + h);
    const double ica = p.gca * m * (v - p.vca);
    dx.resize(dim);
    dx[0] = (-ica - p.gk * n * (v - p.vk) - p.gl * (v - p.vl) - p.gkca * z * (v - p.vk) -
             p.gcas * sv * (v - p.vca) + p.i) /
            p.c;
    dx[1] = p.phi * (winf.value(v) - n) * std::cosh((v - p.v3) / (2.0 * p.v4));
    dx[2] = p.eps1 * (-p.mu * ica - h);
    if (with_s) dx[3] = p.eps2 * (sinf.value(v) - sv) / p.tau_s;
  };
  s.jacobian = [=](const State& x, Matrix& j) {
    const double v = x[0], n = x[1], h = x[2], sv = with_s ? x[3] : 0.0;
    const double m = minf.value(v), dm = minf.slope(v);
    const double z = h / (p.ca0 + h), dz = p.ca0 / ((p.ca0 + h) * (p.ca0 + h));
    const double dica = p.gca * (dm * (v - p.vca) + m);
    const double u = (v - p.v3) / (2.0 * p.v4);
    j.setZero(dim, dim);
    j(0, 0) = (-dica - p.gk * n - p.gl - p.gkca * z - p.gcas * sv) / p.c;
    j(0, 1) = -p.gk * (v - p.vk) / p.c;
    j(0, 2) = -p.gkca * dz * (v - p.vk) / p.c;
    j(1, 0) = p.phi * (winf.slope(v) * std::cosh(u) +
                       (winf.value(v) - n) * std::sinh(u) / (2.0 * p.v4));
    j(1, 1) = -p.phi * std::cosh(u);
    j(2, 0) = -p.eps1 * p.mu * dica;
    j(2, 2) = -p.eps1;
    if (with_s) {
      j(0, 3) = -p.gcas * (v - p.vca) / p.c;
      j(3, 0) = p.eps2 * sinf.slope(v) / p.tau_s;
      j(3, 3) = -p.eps2 / p.tau_s;
    }
  };
  s.observable_default.component = obs;
  s.omega0_default = omega0;
  return s;
}

SystemDef make_hindmarsh_rose() {
  static constexpr double a = 1, b = 3, c = 1, d = 5, r = 0.001, sigma = 4, v0 = -1.6, i = 2;
  SystemDef s;
  s.name = "hindmarsh_rose";
  s.dim = 3;
  s.params = {{"a", a}, {"b", b}, {"c", c}, {"d", d}, {"r", r}, {"sigma", sigma}, {"V0", v0}, {"I", i}};
  s.state_names = {"V", "n", "h"};
  s.vector_field = [](const State& x, State& dx) {
    const double v = x[0];
    dx.resize(3);
    dx[0] = x[1] - a * v * v * v + b * v * v - x[2] + i;
    dx[1] = c - d * v * v - x[1];
    dx[2] = r * (sigma * (v - v0) - x[2]);
  };
  s.jacobian = [](const State& x, Matrix& j) {
    const double v = x[0];
    j.resize(3, 3);
    j << -3.0 * a * v * v + 2.0 * b * v, 1.0, -1.0, -2.0 * d * v, -1.0, 0.0, r * sigma, 0.0, -r;
  };
  s.observable_default.component = 1;
  s.omega0_default = 0.014586;
  return s;
}

SystemDef make_fitzhugh_rinzel() {
  static constexpr double i = 0.3125, a = 0.7, b = 0.8, c = -0.9, d = 1.0, delta = 0.08, mu = 0.001;
  SystemDef s;
  s.name = "fitzhugh_rinzel";
  s.dim = 3;
  s.params = {{"I", i}, {"a", a}, {"b", b}, {"c", c}, {"d", d}, {"delta", delta}, {"mu", mu}};
  s.state_names = {"V", "w", "y"};
  s.vector_field = [](const State& x, State& dx) {
    const double v = x[0];
    dx.resize(3);
    dx[0] = v - v * v * v / 3.0 - x[1] + x[2] + i;
    dx[1] = delta * (a + v - b * x[1]);
    dx[2] = mu * (c - v - d * x[2]);
  };
  s.jacobian = [](const State& x, Matrix& j) {
    const double v = x[0];
    j.resize(3, 3);
    j << 1.0 - v * v, -1.0, 1.0, delta, -delta * b, 0.0, -mu, 0.0, -mu * d;
  };
  s.observable_default.component = 2;
  s.omega0_default = 0.008218;
  return s;
}

namespace plant_rates {
namespace {
constexpr double kDvsDv = 127.0 / 105.0;

/// z / (e^z - 1) with its removable singularity at z = 0.
double exprel_inv(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - z / 2.0 + z * z / 12.0;
  return z / std::expm1(z);
}
double exprel_inv_slope(double z) {
  if (std::abs(z) < 1e-4) return -0.5 + z / 6.0 - z * z * z / 180.0;
  const double em = std::expm1(z);
  return (em - z * (em + 1.0)) / (em * em);
}
}  // namespace

double shifted_voltage(double v) { return (127.0 * v + 8265.0) / 105.0; }
double alpha_m(double vs) { return exprel_inv((50.0 - vs) / 10.0); }
double beta_m(double vs) { return 4.0 * std::exp((25.0 - vs) / 18.0); }
double alpha_n(double vs) { return 0.1 * exprel_inv((55.0 - vs) / 10.0); }
double beta_n(double vs) { return 0.125 * std::exp((45.0 - vs) / 80.0); }
double alpha_h(double vs) { return 0.07 * std::exp((25.0 - vs) / 20.0); }
double beta_h(double vs) { return 1.0 / (std::exp((55.0 - vs) / 10.0) + 1.0); }

// Derivatives with respect to the membrane voltage V (chain rule through Vs).
double d_alpha_m(double vs) { return exprel_inv_slope((50.0 - vs) / 10.0) * (-kDvsDv / 10.0); }
double d_beta_m(double vs) { return beta_m(vs) * (-kDvsDv / 18.0); }
double d_alpha_n(double vs) { return 0.1 * exprel_inv_slope((55.0 - vs) / 10.0) * (-kDvsDv / 10.0); }
double d_beta_n(double vs) { return beta_n(vs) * (-kDvsDv / 80.0); }
double d_alpha_h(double vs) { return alpha_h(vs) * (-kDvsDv / 20.0); }
double d_beta_h(double vs) {
  const double e = std::exp((55.0 - vs) / 10.0);
  return e * (kDvsDv / 10.0) / ((e + 1.0) * (e + 1.0));
}
}  // namespace plant_rates

SystemDef make_plant(double tau_x) {
  static constexpr double c_m = 1.0, gca = 0.004, gna = 4.0, gk = 0.3, gl = 0.004, f = 0.0003;
  static constexpr double gkca = 0.03, vca = 140.0, vna = 30.0, vk = -75.0, vl = -40.0, k1 = 0.0085;
  using namespace plant_rates;

  SystemDef s;
  s.name = "plant";
  s.dim = 5;
  s.params = {{"C", c_m}, {"gCa", gca}, {"gNa", gna}, {"gK", gk},   {"gL", gl},   {"f", f},
              {"gKCa", gkca}, {"VCa", vca}, {"VNa", vna}, {"VK", vk}, {"VL", vl}, {"k1", k1},
              {"tau_x", tau_x}};
  s.state_names = {"V", "h", "n", "x", "c"};
  s.vector_field = [tau_x](const State& st, State& dx) {
    const double v = st[0], h = st[1], n = st[2], xg = st[3], ca = st[4];
    const double vs = shifted_voltage(v);
    const double am = alpha_m(vs), bm = beta_m(vs);
    const double ah = alpha_h(vs), bh = beta_h(vs);
    const double an = alpha_n(vs), bn = beta_n(vs);
    const double m = am / (am + bm);
    const double n2 = n * n;
    const double xinf = 1.0 / (std::exp(-0.15 * (v + 50.0)) + 1.0);
    dx.resize(5);
    dx[0] = -(gna * m * m * m * h * (v - vna) + gca * xg * (v - vca) +
              (gk * n2 * n2 + gkca * ca / (0.5 + ca)) * (v - vk) + gl * (v - vl)) /
            c_m;
    dx[1] = (ah - h * (ah + bh)) / 12.5;
    dx[2] = (an - n * (an + bn)) / 12.5;
    dx[3] = (xinf - xg) / tau_x;
    dx[4] = f * (k1 * xg * (vca - v) - ca);
  };
  s.jacobian = [tau_x](const State& st, Matrix& j) {
    const double v = st[0], h = st[1], n = st[2], xg = st[3], ca = st[4];
    const double vs = shifted_voltage(v);
    const double am = alpha_m(vs), bm = beta_m(vs), dam = d_alpha_m(vs), dbm = d_beta_m(vs);
    const double ah = alpha_h(vs), bh = beta_h(vs), dah = d_alpha_h(vs), dbh = d_beta_h(vs);
    const double an = alpha_n(vs), bn = beta_n(vs), dan = d_alpha_n(vs), dbn = d_beta_n(vs);
    const double m = am / (am + bm);
    const double dm = (dam * bm - am * dbm) / ((am + bm) * (am + bm));
    const double e = std::exp(-0.15 * (v + 50.0));
    const double dxinf = 0.15 * e / ((e + 1.0) * (e + 1.0));
    const double gkt = gk * n * n * n * n + gkca * ca / (0.5 + ca);
    j.setZero(5, 5);
    j(0, 0) = -(gna * h * (3.0 * m * m * dm * (v - vna) + m * m * m) + gca * xg + gkt + gl) / c_m;
    j(0, 1) = -gna * m * m * m * (v - vna) / c_m;
    j(0, 2) = -4.0 * gk * n * n * n * (v - vk) / c_m;
    j(0, 3) = -gca * (v - vca) / c_m;
    j(0, 4) = -gkca * 0.5 / ((0.5 + ca) * (0.5 + ca)) * (v - vk) / c_m;
    j(1, 0) = (dah - h * (dah + dbh)) / 12.5;
    j(1, 1) = -(ah + bh) / 12.5;
    j(2, 0) = (dan - n * (dan + dbn)) / 12.5;
    j(2, 2) = -(an + bn) / 12.5;
    j(3, 0) = dxinf / tau_x;
    j(3, 3) = -1.0 / tau_x;
    j(4, 0) = -f * k1 * xg;
    j(4, 3) = f * k1 * (vca - v);
    j(4, 4) = -f;
  };
  s.observable_default.component = 1;
  s.omega0_default = 0.00058225;
  return s;
}

namespace {

ModelEntry make_entry(SystemDef sys, double horizon, double rtol, SegmentSpec set_a, int dir_axis,
                      int n_pt, GridSpec section) {
  ModelEntry e;
  e.omega0 = sys.omega0_default;
  e.horizon_T = horizon;
  e.rel_tol = rtol;
  e.sensitivity_set = std::move(set_a);
  e.sensitivity_direction = State::Zero(sys.dim);
  e.sensitivity_direction[dir_axis] = 1.0;
  e.n_pt_default = n_pt;
  e.default_section = std::move(section);
  e.system = std::move(sys);
  return e;
}

/// Trailing window of whole periods covering (at most) the second half of the horizon.
double trailing_window(const ModelEntry& e) {
  const double t0 = e.period();
  return std::max(1.0, std::floor(0.5 * e.horizon_T / t0)) * t0;
}

std::vector<ModelEntry> build_catalog() {
  std::vector<ModelEntry> out;

  {
    auto e = make_entry(make_van_der_pol(), 100.0, 1e-6, {vec({0, 0}), 0, -0.5, 0.5}, 0, 1000,
                        {vec({0, 0}), {0, -2.5, 2.5, 101}, {1, -2.5, 2.5, 101}});
    e.phase_window = trailing_window(e);
    out.push_back(std::move(e));
  }
  {
    auto e = make_entry(make_lorenz(), 50.0, 1e-9, {vec({0, 100, 319}), 0, -48.8, -48.75}, 0, 2500,
                        {vec({0, 0, 319}), {0, -60, 60, 201}, {1, -150, 150, 201}});
    e.phase_window = trailing_window(e);
    out.push_back(std::move(e));
  }
  out.push_back(make_entry(make_map_fig1b(), 5000.0, 0.0, {vec({0.5, 0}), 1, 0.0, 1.0}, 1, 10000,
                           {vec({0, 0}), {0, 0.0, 1.0, 201}, {1, 0.0, 1.0, 201}}));
  out.push_back(make_entry(make_map_eq5(), 5000.0, 0.0, {vec({2, 0}), 1, 0.0, 1.0}, 1, 10000,
                           {vec({0, 0}), {0, 0.0, 2.0, 201}, {1, 0.0, 1.0, 201}}));

  auto bursting = [&](SystemDef sys, double horizon, SegmentSpec a, int n_pt, GridSpec section) {
    auto e = make_entry(std::move(sys), horizon, 1e-6, std::move(a), 0, n_pt, std::move(section));
    e.bursting = true;
    e.phase_window = e.period();
    out.push_back(std::move(e));
  };
  bursting(make_morris_lecar(MorrisLecarRegime::square_wave), 3500.0,
           {vec({-15, 0, 12}), 1, 0.1, 0.2}, 10000,
           {vec({0, 0, 12}), {0, -60, 40, 101}, {1, 0.0, 0.6, 101}});
  bursting(make_morris_lecar(MorrisLecarRegime::elliptic), 8500.0,
           {vec({30, 0, 16}), 1, 0.0, 0.5}, 10000,
           {vec({0, 0, 16}), {0, -60, 60, 101}, {1, 0.0, 0.6, 101}});
  bursting(make_morris_lecar(MorrisLecarRegime::parabolic), 500.0,
           {vec({0, 0, 1.5, 0.15}), 1, 0.2, 0.3}, 10000,
           {vec({0, 0, 1.5, 0.15}), {0, -60, 40, 101}, {1, 0.0, 0.6, 101}});
  bursting(make_hindmarsh_rose(), 2000.0, {vec({0.5, 0, 1.9}), 1, -10.0, 4.0}, 2500,
           {vec({0, 0, 1.9}), {0, -2, 2.5, 101}, {1, -10.0, 4.0, 101}});
  bursting(make_fitzhugh_rinzel(), 4000.0, {vec({-1, 0, 0.01}), 1, -0.5, 0.5}, 10000,
           {vec({0, 0, 0.01}), {0, -2.5, 2.5, 101}, {1, -0.5, 1.5, 101}});
  bursting(make_plant(), 30000.0, {vec({-20, 0, 0.4, 0.74, 0.6}), 1, 0.0, 1.0}, 10000,
           {vec({0, 0, 0.4, 0.74, 0.6}), {0, -70, 30, 101}, {1, 0.0, 1.0, 101}});

  for (auto& e : out) {
    const auto& a = e.sensitivity_set;
    e.basin_seed = a.sample(3)[1];
    e.settle_time = 20.0 * e.period();
  }
  out[0].basin_seed = vec({2.0, 0.0});
  // The r = 320 cycle attracts slowly; a few hundred periods are needed to settle to 1e-8.
  out[1].basin_seed = vec({-48.78, 100.0, 319.0});
  out[1].settle_time = 1000.0 * out[1].period();
  out[2].basin_seed = vec({0.5613245623, 0.3});
  out[2].settle_time = 1000.0;
  out[3].basin_seed = vec({0.25, 0.0});
  out[3].settle_time = 2000.0;

  const auto refs = parse_reference_records(kEmbeddedReferenceData);
  for (auto& e : out) {
    const auto it = refs.find(e.name());
    if (it != refs.end() && it->second.point.size() == e.system.dim) {
      e.reference_point = it->second.point;
    }
  }
  return out;
}

}  // namespace

const std::vector<ModelEntry>& catalog() {
  static const std::vector<ModelEntry> entries = build_catalog();
  return entries;
}

const ModelEntry& lookup(std::string_view name) {
  for (const auto& e : catalog()) {
    if (e.name() == name) return e;
  }
  throw std::out_of_range("unknown model '" + std::string(name) + "'");
}

std::vector<std::string> model_names() {
  std::vector<std::string> names;
  for (const auto& e : catalog()) names.push_back(e.name());
  return names;
}

std::vector<State> eval_on_cycle(const ModelEntry& entry, std::span<const double> thetas) {
  if (!entry.continuous()) throw std::invalid_argument("eval_on_cycle needs a flow");
  if (!entry.has_reference()) {
    throw std::logic_error("no reference point for " + entry.name() + " (run build-refs)");
  }
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(thetas.size());
  const double t0 = entry.period();
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    order.emplace_back(wrap_two_pi(thetas[k]) / kTwoPi * t0, k);
  }
  std::sort(order.begin(), order.end());
  std::vector<State> out(thetas.size());
  std::size_t next = 0;
  while (next < order.size() && order[next].first <= 0.0) out[order[next++].second] = entry.reference_point;
  if (next == order.size()) return out;
  const double t_end = order.back().first;
  walk_flow(entry.system, entry.reference_point, t_end, entry.integrator(), [&](const FlowStepper& s) {
    while (next < order.size() && order[next].first <= s.t()) {
      const double t = order[next].first;
      out[order[next].second] = t == s.t() ? s.y() : s.dense(t);
      ++next;
    }
    return true;
  });
  return out;
}

State eval_on_cycle(const ModelEntry& entry, double theta) {
  const double th[1] = {theta};
  return eval_on_cycle(entry, std::span<const double>(th, 1)).front();
}

std::map<std::string, ReferenceRecord> parse_reference_records(std::string_view text) {
  std::map<std::string, ReferenceRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    ReferenceRecord rec;
    ls >> rec.name >> rec.period >> rec.omega0;
    std::vector<double> xs;
    double v;
    while (ls >> v) xs.push_back(v);
    if (rec.name.empty() || xs.empty()) throw std::runtime_error("malformed reference record: " + line);
    rec.point.resize(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) rec.point[static_cast<Eigen::Index>(i)] = xs[i];
    out[rec.name] = std::move(rec);
  }
  return out;
}

std::string format_reference_record(const ReferenceRecord& rec) {
  std::ostringstream os;
  os << std::setprecision(17) << rec.name << ' ' << rec.period << ' ' << rec.omega0;
  for (Eigen::Index i = 0; i < rec.point.size(); ++i) os << ' ' << rec.point[i];
  return os.str();
}

void write_reference_file(std::ostream& os, const std::vector<ReferenceRecord>& records) {
  os << "# isochron reference points, format v1\n"
     << "# name T0 omega0 x1 ... xN (phase-0 point on the attractor)\n";
  for (const auto& r : records) os << format_reference_record(r) << '\n';
}

}  // namespace isochron
