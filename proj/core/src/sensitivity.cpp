#include "isochron/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "isochron/parallel.hpp"

namespace isochron {

double geodesic_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

std::optional<double> two_point_sensitivity(const PhaseFunction& phase, const State& x, double eps,
                                            const State& e) {
  const PhaseValue c = phase(x);
  if (!c.converged) return std::nullopt;
  const PhaseValue m = phase(x - eps * e);
  const PhaseValue p = phase(x + eps * e);
  if (!m.converged || !p.converged) return std::nullopt;
  return std::max(geodesic_distance(c.theta, m.theta), geodesic_distance(c.theta, p.theta));
}

std::optional<double> two_point_sensitivity(const ModelEntry& entry, const State& x, double eps,
                                            const State& e) {
  const auto& ev = default_evaluator(entry);
  return two_point_sensitivity([&](const State& y) { return ev(y); }, x, eps, e);
}

std::vector<double> default_eps_grid(double length, int n) {
  std::vector<double> eps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double expo = -2.0 - 5.0 * i / std::max(1, n - 1);
    eps[static_cast<std::size_t>(i)] = length * std::pow(10.0, expo);
  }
  return eps;
}

SampleTable sample_sensitivity(const PhaseFunction& phase, const SegmentSpec& set, int n_pt,
                               const State& e, const std::vector<double>& eps, int workers) {
  SampleTable table;
  table.eps = eps;
  table.n_pt = n_pt;
  const auto n_eps = eps.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  table.f.assign(n_eps * static_cast<std::size_t>(n_pt), nan);
  const auto points = set.sample(n_pt);
  std::vector<char> base_ok(static_cast<std::size_t>(n_pt), 0);

  parallel_for(static_cast<std::size_t>(n_pt), workers, [&](std::size_t k) {
    const PhaseValue c = phase(points[k]);
    if (!c.converged) return;
    base_ok[k] = 1;
    for (std::size_t i = 0; i < n_eps; ++i) {
      const PhaseValue m = phase(points[k] - eps[i] * e);
      const PhaseValue p = phase(points[k] + eps[i] * e);
      if (!m.converged || !p.converged) continue;
      table.f[i * static_cast<std::size_t>(n_pt) + k] =
          std::max(geodesic_distance(c.theta, m.theta), geodesic_distance(c.theta, p.theta));
    }
  });
  table.n_base_valid = static_cast<int>(std::count(base_ok.begin(), base_ok.end(), 1));
  return table;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, double* residual) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  if (residual) {
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (my + slope * (x[i] - mx));
      ss += r * r;
    }
    *residual = std::sqrt(ss / n);
  }
  return slope;
}

namespace {

/// Indices of the `fit.window` smallest epsilons with enough valid pairs.
std::vector<std::size_t> fit_window(const SensitivityCurve& c, int n_pt, const FitOptions& fit) {
  std::vector<std::size_t> idx(c.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](auto a, auto b) { return c.samples[a].epsilon < c.samples[b].epsilon; });
  std::vector<std::size_t> out;
  for (auto i : idx) {
    if (static_cast<int>(out.size()) >= fit.window) break;
    if (c.samples[i].n_valid >= fit.min_valid_fraction * n_pt) out.push_back(i);
  }
  return out;
}

void finish_fit(SensitivityCurve& c, const std::vector<std::size_t>& use) {
  if (use.size() < 3) {
    throw FitError("fewer than 3 usable samples in the fit window (" + std::to_string(use.size()) +
                   ")");
  }
  std::vector<double> lx, ly;
  c.window_lo = std::numeric_limits<double>::infinity();
  c.window_hi = 0.0;
  for (auto i : use) {
    lx.push_back(std::log(c.samples[i].epsilon));
    ly.push_back(std::log(c.samples[i].mean_f));
    c.window_lo = std::min(c.window_lo, c.samples[i].epsilon);
    c.window_hi = std::max(c.window_hi, c.samples[i].epsilon);
  }
  c.alpha = fit_slope(lx, ly, &c.fit_residual);
  c.beta = 1.0 - c.alpha;
}

}  // namespace

SensitivityCurve fit_mean_curve(const SampleTable& table, const FitOptions& fit) {
  SensitivityCurve c;
  c.method = "two-point";
  for (std::size_t i = 0; i < table.eps.size(); ++i) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(table.n_pt); ++k) {
      const double f = table.at(i, k);
      if (std::isnan(f)) continue;
      sum += f;
      ++n;
    }
    c.samples.push_back({table.eps[i], n > 0 ? sum / n : 0.0, n});
  }
  auto use = fit_window(c, table.n_pt, fit);
  std::vector<std::size_t> positive;
  for (auto i : use) {
    if (c.samples[i].mean_f > 0.0) positive.push_back(i);
  }
  if (positive.size() < use.size()) c.warnings.push_back("zero mean sensitivity inside the fit window");
  finish_fit(c, positive);
  return c;
}

SensitivityCurve fit_mdtheta_curve(const SampleTable& table, double delta_theta,
                                   const FitOptions& fit) {
  if (!(delta_theta > 0.0 && delta_theta < kPi)) {
    throw std::invalid_argument("delta_theta must lie in (0, pi)");
  }
  SensitivityCurve c;
  c.method = "mdtheta";
  for (std::size_t i = 0; i < table.eps.size(); ++i) {
    int n = 0, above = 0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(table.n_pt); ++k) {
      const double f = table.at(i, k);
      if (std::isnan(f)) continue;
      ++n;
      if (f > delta_theta) ++above;
    }
    c.samples.push_back({table.eps[i], n > 0 ? static_cast<double>(above) / n : 0.0, n});
  }
  const auto use = fit_window(c, table.n_pt, fit);
  std::vector<std::size_t> nonzero;
  for (auto i : use) {
    if (c.samples[i].mean_f > 0.0) nonzero.push_back(i);
  }
  if (nonzero.size() < use.size()) {
    std::ostringstream w;
    w << (use.size() - nonzero.size())
      << " epsilon(s) in the fit window have zero exceedance; the measure is underestimated";
    c.warnings.push_back(w.str());
  }
  finish_fit(c, nonzero);
  return c;
}

namespace {

SampleTable table_for(const ModelEntry& entry, const SegmentSpec& set,
                      const SensitivityOptions& opts) {
  const int n_pt = opts.n_pt > 0 ? opts.n_pt : entry.n_pt_default;
  const State e = opts.direction.size() > 0 ? opts.direction : entry.sensitivity_direction;
  const auto eps = opts.eps.empty() ? default_eps_grid(set.length()) : opts.eps;
  if (n_pt < 100) throw std::invalid_argument("n_pt must be at least 100");
  if (eps.size() < 6) throw std::invalid_argument("at least 6 epsilon values are required");
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (!(eps[i] < eps[i - 1]) || !(eps[i] > 0.0)) {
      throw std::invalid_argument("epsilon values must be positive and strictly decreasing");
    }
  }
  if (e.size() != entry.system.dim || std::abs(e.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("direction must be a unit vector of the state dimension");
  }
  const PhaseEvaluator ev(entry, sensitivity_phase_settings(entry, eps.back(), set.length()));
  return sample_sensitivity([&](const State& x) { return ev(x); }, set, n_pt, e, eps, opts.workers);
}

}  // namespace

PhaseSettings sensitivity_phase_settings(const ModelEntry& entry, double eps_min, double length) {
  PhaseSettings s = default_phase_settings(entry);
  if (entry.continuous() && eps_min > 0.0 && length > 0.0) {
    s.rel_tol = std::min(s.rel_tol, 0.1 * eps_min / length);
  }
  return s;
}

SensitivityCurve sensitivity_curve(const ModelEntry& entry, const SegmentSpec& set,
                                   const SensitivityOptions& opts) {
  return fit_mean_curve(table_for(entry, set, opts), opts.fit);
}

SensitivityCurve mdtheta_curve(const ModelEntry& entry, const SegmentSpec& set,
                               const SensitivityOptions& opts, double delta_theta) {
  return fit_mdtheta_curve(table_for(entry, set, opts), delta_theta, opts.fit);
}

std::vector<std::pair<double, double>> infinitesimal_coefficient(const SensitivityCurve& curve) {
  const auto& s = curve.samples;
  if (s.size() < 3) throw std::invalid_argument("need at least 3 samples");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i - 1].mean_f <= 0.0 || s[i + 1].mean_f <= 0.0) continue;
    const double slope = (std::log(s[i + 1].mean_f) - std::log(s[i - 1].mean_f)) /
                         (std::log(s[i + 1].epsilon) - std::log(s[i - 1].epsilon));
    out.emplace_back(s[i].epsilon, 1.0 - slope);
  }
  return out;
}

void write_curve_csv(std::ostream& os, const SensitivityCurve& curve) {
  os << std::setprecision(9) << "# method=" << curve.method << '\n' << "epsilon,mean_f,n_valid\n";
  for (const auto& s : curve.samples) os << s.epsilon << ',' << s.mean_f << ',' << s.n_valid << '\n';
  os << "# alpha=" << curve.alpha << '\n'
     << "# beta=" << curve.beta << '\n'
     << "# window=" << curve.window_lo << ':' << curve.window_hi << '\n'
     << "# residual=" << curve.fit_residual << '\n';
  for (const auto& w : curve.warnings) os << "# warning: " << w << '\n';
}

}  // namespace isochron
