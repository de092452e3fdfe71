#include "isochron/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isochron {

double SystemDef::param(std::string_view key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  throw std::out_of_range("unknown parameter '" + std::string(key) + "' for " + name);
}

int SystemDef::state_index(std::string_view key) const {
  for (std::size_t i = 0; i < state_names.size(); ++i) {
    if (state_names[i] == key) return static_cast<int>(i);
  }
  return -1;
}

SampleSpec SampleSpec::uniform(double t0, double t1, int n) {
  SampleSpec s;
  s.times.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    s.times[static_cast<std::size_t>(i)] = n == 1 ? t1 : t0 + (t1 - t0) * i / (n - 1);
  }
  return s;
}

Trajectory integrate_flow(const SystemDef& sys, const State& x0, double t_final,
                          const IntegratorOptions& opts, const SampleSpec& samples) {
  if (sys.kind != SystemKind::continuous) throw std::invalid_argument("integrate_flow needs a flow");
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
  if (!(opts.rel_tol > 0.0 && opts.rel_tol <= 1e-2)) throw std::invalid_argument("rel_tol out of range");

  std::vector<double> times = samples.times.empty() ? std::vector<double>{t_final} : samples.times;
  if (!std::is_sorted(times.begin(), times.end()) || times.front() < 0.0 || times.back() > t_final) {
    throw std::invalid_argument("sample times must be sorted within [0, t_final]");
  }
  Trajectory out;
  std::size_t next = 0;
  while (next < times.size() && times[next] <= 0.0) {
    out.times.push_back(times[next++]);
    out.states.push_back(x0);
  }
  const FlowStatus st = walk_flow(sys, x0, t_final, opts, [&](const FlowStepper& s) {
    while (next < times.size() && times[next] <= s.t()) {
      out.times.push_back(times[next]);
      out.states.push_back(times[next] == s.t() ? s.y() : s.dense(times[next]));
      ++next;
    }
    return true;
  });
  out.escaped = st.escaped;
  if (st.escaped) {
    out.times.push_back(st.t_reached);
    out.states.push_back(st.final_state);
  }
  return out;
}

State flow_to(const SystemDef& sys, const State& x0, double t, const IntegratorOptions& opts) {
  if (t <= 0.0) return x0;
  return walk_flow(sys, x0, t, opts, [](const FlowStepper&) { return true; }).final_state;
}

Trajectory iterate_map(const SystemDef& sys, const State& x0, long n, double divergence_bound) {
  if (sys.kind != SystemKind::discrete) throw std::invalid_argument("iterate_map needs a map");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  Trajectory out;
  out.times.reserve(static_cast<std::size_t>(n) + 1);
  out.states.reserve(static_cast<std::size_t>(n) + 1);
  State x = x0;
  State next(sys.dim);
  out.times.push_back(0.0);
  out.states.push_back(x);
  for (long k = 1; k <= n; ++k) {
    sys.vector_field(x, next);
    if (!next.allFinite()) throw IterationError("non-finite map iterate", k);
    x = next;
    out.times.push_back(static_cast<double>(k));
    out.states.push_back(x);
    if (x.cwiseAbs().maxCoeff() > divergence_bound) {
      out.escaped = true;
      break;
    }
  }
  return out;
}

namespace {

using TangentState = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim*(kMaxDim + 1), 1>;

struct TangentRhs {
  const SystemDef* sys;
  void operator()(const TangentState& z, TangentState& dz) const {
    const int n = sys->dim;
    const State x = z.head(n);
    State fx(n);
    Matrix j(n, n);
    sys->vector_field(x, fx);
    sys->jacobian(x, j);
    dz.resize(z.size());
    dz.head(n) = fx;
    for (int c = 0; c < n; ++c) {
      dz.segment(n + c * n, n) = j * z.segment(n + c * n, n);
    }
  }
};

/// State block: componentwise relative. Tangent block: relative to each column's size.
struct TangentNorm {
  int n;
  double operator()(const TangentState& y0, const TangentState& y1, const TangentState& err,
                    double rtol, double atol) const {
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      m = std::max(m, std::abs(err[i]) / sc);
    }
    for (int c = 0; c < n; ++c) {
      const auto off = n + c * n;
      const double col = std::max(y0.segment(off, n).cwiseAbs().maxCoeff(),
                                  y1.segment(off, n).cwiseAbs().maxCoeff());
      const double sc = atol + rtol * col;
      m = std::max(m, err.segment(off, n).cwiseAbs().maxCoeff() / sc);
    }
    return m;
  }
};

}  // namespace

FundamentalMatrix integrate_variational(const SystemDef& sys, const State& x0, double horizon,
                                        const IntegratorOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const int n = sys.dim;
  FundamentalMatrix out;
  out.horizon = horizon;
  if (sys.kind == SystemKind::discrete) {
    const long steps = std::lround(horizon);
    Matrix m = Matrix::Identity(n, n);
    Matrix j(n, n);
    State x = x0, next(n);
    for (long t = 0; t < steps; ++t) {
      sys.jacobian(x, j);
      m = (j * m).eval();
      sys.vector_field(x, next);
      if (!next.allFinite()) throw IterationError("non-finite map iterate", t + 1);
      x = next;
    }
    out.matrix = m;
    out.end_state = x;
    return out;
  }
  TangentState z(n + n * n);
  z.head(n) = x0;
  z.tail(n * n).setZero();
  for (int c = 0; c < n; ++c) z[n + c * n + c] = 1.0;
  Dopri5<TangentState, TangentRhs, TangentNorm> stepper(TangentRhs{&sys}, opts, TangentNorm{n});
  stepper.reset(0.0, z, horizon);
  while (!stepper.done()) stepper.step();
  out.matrix.resize(n, n);
  for (int c = 0; c < n; ++c) out.matrix.col(c) = stepper.y().segment(n + c * n, n);
  out.end_state = stepper.y().head(n);
  return out;
}

namespace {

struct Maximum {
  double t;
  double g;
};

double observable_rate(const SystemDef& sys, const Observable& g, const State& x) {
  const State f = sys.eval(x);
  if (g.is_component()) return f[g.component];
  const double h = 1e-7 * std::max(1.0, x.cwiseAbs().maxCoeff()) / std::max(1e-300, f.norm());
  return (g(x + h * f) - g(x - h * f)) / (2.0 * h);
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

PeriodEstimate estimate_period(const SystemDef& sys, const State& x_seed, double transient,
                               const PeriodOptions& opts) {
  if (sys.kind != SystemKind::continuous) throw std::invalid_argument("estimate_period needs a flow");
  double window = opts.window;
  if (window <= 0.0) {
    if (sys.omega0_default <= 0.0) throw std::invalid_argument("window required when omega0 is unknown");
    window = 12.0 * kTwoPi / sys.omega0_default;
  }
  IntegratorOptions io;
  io.rel_tol = opts.rel_tol;
  const State settled = flow_to(sys, x_seed, transient, io);

  const Observable& g = sys.observable_default;
  std::vector<Maximum> maxima;
  const int grid_n = 1 << 16;
  const double grid_dt = window / grid_n;
  std::vector<double> grid(static_cast<std::size_t>(grid_n) + 1, 0.0);
  std::size_t grid_next = 0;
  constexpr int kSub = 8;

  const FlowStatus st = walk_flow(sys, settled, window, io, [&](const FlowStepper& s) {
    const double ta = s.t_prev(), tb = s.t();
    double t_prev = ta;
    double r_prev = observable_rate(sys, g, s.y_prev());
    for (int j = 1; j <= kSub; ++j) {
      const double t = ta + (tb - ta) * j / kSub;
      const State x = j == kSub ? s.y() : s.dense(t);
      const double r = observable_rate(sys, g, x);
      if (r_prev > 0.0 && r <= 0.0) {
        double lo = t_prev, hi = t;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
          const double mid = 0.5 * (lo + hi);
          (observable_rate(sys, g, s.dense(mid)) > 0.0 ? lo : hi) = mid;
        }
        const double tm = 0.5 * (lo + hi);
        maxima.push_back({tm, g(s.dense(tm))});
      }
      t_prev = t;
      r_prev = r;
    }
    while (grid_next < grid.size() && grid_next * grid_dt <= tb) {
      const double t = grid_next * grid_dt;
      grid[grid_next++] = g(t == ta ? s.y_prev() : s.dense(t));
    }
    return true;
  });
  if (st.escaped) throw NotPeriodicError("trajectory escaped while estimating the period");

  auto sample = [&](double t) {
    const double u = std::clamp(t / grid_dt, 0.0, static_cast<double>(grid_n));
    const auto i = std::min(static_cast<std::size_t>(u), static_cast<std::size_t>(grid_n) - 1);
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * grid[i] + w * grid[i + 1];
  };

  const int m = static_cast<int>(maxima.size());
  for (int k = 1; k <= opts.max_group && 3 * k < m; ++k) {
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0, dsum = 0.0;
    for (int j = 0; j + k < m; ++j) {
      const double d = maxima[j + k].t - maxima[j].t;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
      dsum += d;
    }
    const double mean = dsum / (m - k);
    if ((dmax - dmin) / mean > 1e-3) continue;
    const double t0 = maxima[0].t;
    if (t0 + 2.0 * mean > window) continue;
    constexpr int kCorr = 2048;
    std::vector<double> a(kCorr), b(kCorr);
    for (int i = 0; i < kCorr; ++i) {
      const double t = t0 + mean * i / kCorr;
      a[static_cast<std::size_t>(i)] = sample(t);
      b[static_cast<std::size_t>(i)] = sample(t + mean);
    }
    const double corr = correlation(a, b);
    if (corr < opts.correlation_threshold) continue;
    const int cycles = (m - 1) / k;
    PeriodEstimate est;
    est.period = (maxima[static_cast<std::size_t>(cycles * k)].t - maxima[0].t) / cycles;
    est.omega0 = kTwoPi / est.period;
    est.maxima_per_cycle = k;
    est.correlation = corr;
    return est;
  }
  throw NotPeriodicError("no periodic structure detected for " + sys.name);
}

double estimate_rotation_number(const SystemDef& sys, const State& x0, long n, long transient) {
  if (sys.kind != SystemKind::discrete || !sys.angle_increment) {
    throw std::invalid_argument("rotation number needs a map with a lifted angle");
  }
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  State x = x0, next(sys.dim);
  for (long k = 0; k < transient; ++k) {
    sys.vector_field(x, next);
    if (!next.allFinite()) throw IterationError("orbit escaped", k + 1);
    x = next;
  }
  // Neumaier-compensated sum of the lifted increments.
  double sum = 0.0, comp = 0.0;
  for (long k = 0; k < n; ++k) {
    const double inc = sys.angle_increment(x);
    const double t = sum + inc;
    comp += std::abs(sum) >= std::abs(inc) ? (sum - t) + inc : (inc - t) + sum;
    sum = t;
    sys.vector_field(x, next);
    if (!next.allFinite()) throw IterationError("orbit escaped", transient + k + 1);
    x = next;
  }
  return (sum + comp) / static_cast<double>(n);
}

}  // namespace isochron
