#include "isochron/phase.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

#include "isochron/parallel.hpp"

namespace isochron {

namespace {

using cplx = std::complex<double>;

/// Weighted sums from which the offset-free average is assembled.
struct Sums {
  cplx ge{0.0, 0.0};
  cplx e{0.0, 0.0};
  double g = 0.0;
  double w = 0.0;

  void add(double weight, double gv, cplx ev) {
    ge += weight * gv * ev;
    e += weight * ev;
    g += weight * gv;
    w += weight;
  }
  /// (1/T) sum (g - mean g) e^{-i w t}: the constant part of g drops out exactly.
  cplx average(double T) const { return (ge - (g / w) * e) / T; }
};

/**
 * Trapezoid rule on dense output over [t_start, T]. Each accepted step is split
 * into max(4, ceil(h / (T0 / 200))) sub-intervals.
 */
cplx flow_average(const SystemDef& sys, const Observable& g, double omega, const State& x,
                  double T, double t_start, const IntegratorOptions& opts, bool& escaped) {
  const double max_sub = kTwoPi / omega / 200.0;
  Sums sums;
  bool have_prev = false;
  double t_last = 0.0, g_last = 0.0;
  cplx e_last{0.0, 0.0};
  auto sample = [&](double t, const State& y) {
    const double gv = g(y);
    const cplx ev = std::polar(1.0, -omega * t);
    if (have_prev) {
      const double h = 0.5 * (t - t_last);
      sums.add(h, g_last, e_last);
      sums.add(h, gv, ev);
    }
    have_prev = true;
    t_last = t;
    g_last = gv;
    e_last = ev;
  };
  if (t_start <= 0.0) sample(0.0, x);

  try {
    const FlowStatus st = walk_flow(sys, x, T, opts, [&](const FlowStepper& s) {
      if (s.t() <= t_start) return true;
      const double a = std::max(s.t_prev(), t_start);
      const double b = s.t();
      if (!have_prev) sample(a, a == s.t_prev() ? s.y_prev() : s.dense(a));
      const int m = std::max(4, static_cast<int>(std::ceil((b - a) / max_sub)));
      for (int k = 1; k < m; ++k) {
        const double t = a + (b - a) * k / m;
        sample(t, s.dense(t));
      }
      sample(b, s.y());
      return true;
    });
    escaped = st.escaped;
  } catch (const IntegrationError&) {
    escaped = true;
  }
  if (escaped || sums.w <= 0.0) return {0.0, 0.0};
  return sums.average(T - std::max(t_start, 0.0));
}

cplx map_average(const SystemDef& sys, const Observable& g, double omega, const State& x, long T,
                 bool& escaped) {
  Sums sums;
  State cur = x, next(sys.dim);
  for (long t = 0; t <= T; ++t) {
    if (!cur.allFinite() || cur.cwiseAbs().maxCoeff() > 1e7) {
      escaped = true;
      return {0.0, 0.0};
    }
    sums.add(1.0, g(cur), std::polar(1.0, -omega * static_cast<double>(t)));
    if (t < T) {
      sys.vector_field(cur, next);
      cur = next;
    }
  }
  escaped = false;
  return sums.average(static_cast<double>(T));
}

State settled_point(const ModelEntry& e) {
  if (e.has_reference()) return e.reference_point;
  if (e.basin_seed.size() != e.system.dim) return {};
  if (e.continuous()) return flow_to(e.system, e.basin_seed, e.settle_time, e.integrator());
  return iterate_map(e.system, e.basin_seed, std::max(1L, std::lround(e.settle_time))).states.back();
}

}  // namespace

PhaseSettings default_phase_settings(const ModelEntry& entry) {
  PhaseSettings s;
  s.observable = entry.system.observable_default;
  s.omega0 = entry.omega0;
  s.horizon = entry.horizon_T;
  s.window = entry.phase_window;
  s.rel_tol = entry.rel_tol;
  return s;
}

PhaseSettings default_phase_settings(const ModelEntry& entry, double horizon) {
  PhaseSettings s = default_phase_settings(entry);
  s.horizon = horizon;
  if (entry.continuous() && s.window > 0.0 && !entry.bursting) {
    const double t0 = entry.period();
    s.window = std::max(1.0, std::floor(0.5 * horizon / t0)) * t0;
  }
  s.window = std::min(s.window, horizon);
  return s;
}

PhaseEvaluator::PhaseEvaluator(const ModelEntry& entry)
    : PhaseEvaluator(entry, default_phase_settings(entry)) {}

PhaseEvaluator::PhaseEvaluator(const ModelEntry& entry, PhaseSettings settings)
    : entry_(entry), settings_(std::move(settings)) {
  if (settings_.modulus_floor >= 0.0) {
    floor_ = settings_.modulus_floor;
    return;
  }
  const State x = settled_point(entry_);
  if (x.size() == 0) return;
  bool escaped = false;
  floor_ = 1e-3 * std::abs(average(x, &escaped));
}

std::complex<double> PhaseEvaluator::average(const State& x, bool* escaped) const {
  bool esc = false;
  cplx a;
  if (entry_.continuous()) {
    IntegratorOptions opts;
    opts.rel_tol = settings_.rel_tol;
    const double t_start = settings_.window > 0.0 ? settings_.horizon - settings_.window : 0.0;
    a = flow_average(entry_.system, settings_.observable, settings_.omega0, x, settings_.horizon,
                     t_start, opts, esc);
  } else {
    a = map_average(entry_.system, settings_.observable, settings_.omega0, x,
                    std::lround(settings_.horizon), esc);
  }
  if (escaped) *escaped = esc;
  return a;
}

PhaseValue PhaseEvaluator::operator()(const State& x) const {
  bool escaped = false;
  const cplx a = average(x, &escaped);
  PhaseValue v;
  v.modulus = std::abs(a);
  v.converged = !escaped && v.modulus > floor_;
  v.theta = v.converged ? wrap_two_pi(std::arg(a)) : 0.0;
  return v;
}

std::complex<double> fourier_average(const ModelEntry& entry, const State& x, double T) {
  if (!entry.continuous()) throw std::invalid_argument("fourier_average needs a flow");
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  bool escaped = false;
  return flow_average(entry.system, entry.system.observable_default, entry.omega0, x, T, 0.0,
                      entry.integrator(), escaped);
}

std::complex<double> fourier_average_discrete(const ModelEntry& entry, const State& x, long T) {
  if (entry.continuous()) throw std::invalid_argument("fourier_average_discrete needs a map");
  if (T < 1) throw std::invalid_argument("horizon must be at least 1");
  bool escaped = false;
  return map_average(entry.system, entry.system.observable_default, entry.omega0, x, T, escaped);
}

const PhaseEvaluator& default_evaluator(const ModelEntry& entry) {
  static std::mutex mutex;
  static std::map<const ModelEntry*, std::unique_ptr<PhaseEvaluator>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[&entry];
  if (!slot || slot->entry().name() != entry.name() ||
      slot->entry().reference_point.size() != entry.reference_point.size()) {
    slot = std::make_unique<PhaseEvaluator>(entry);
  }
  return *slot;
}

PhaseValue phase_of(const ModelEntry& entry, const State& x) { return default_evaluator(entry)(x); }

PhaseField phase_field(const PhaseEvaluator& eval, const GridSpec& grid, int workers) {
  PhaseField field;
  field.grid = grid;
  field.values.resize(static_cast<std::size_t>(grid.size()));
  const int n2 = grid.axis2.n;
  parallel_for(field.values.size(), workers, [&](std::size_t k) {
    const int i = static_cast<int>(k / n2), j = static_cast<int>(k % n2);
    field.values[k] = eval(grid.node(i, j));
  });
  return field;
}

PhaseField phase_field(const ModelEntry& entry, const GridSpec& grid, int workers) {
  return phase_field(default_evaluator(entry), grid, workers);
}

void write_phase_field_csv(std::ostream& os, const std::string& model,
                           const std::vector<std::string>& state_names, const PhaseField& field) {
  write_section_header(os, model, state_names, field.grid);
  os << "i,j,x1,x2,theta,converged\n" << std::setprecision(9);
  const auto& g = field.grid;
  for (int i = 0; i < g.axis1.n; ++i) {
    for (int j = 0; j < g.axis2.n; ++j) {
      const auto& v = field.at(i, j);
      os << i << ',' << j << ',' << g.axis1.at(i) << ',' << g.axis2.at(j) << ',' << v.theta << ','
         << (v.converged ? 1 : 0) << '\n';
    }
  }
}

}  // namespace isochron
