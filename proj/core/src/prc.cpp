#include "isochron/prc.hpp"

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>

#include "isochron/parallel.hpp"
#include "isochron/sensitivity.hpp"

namespace isochron {

PRCCurve prc_curve(const PhaseEvaluator& eval, const State& e, int n_theta, int workers) {
  const ModelEntry& entry = eval.entry();
  if (n_theta < 64) throw std::invalid_argument("n_theta must be at least 64");
  if (e.size() != entry.system.dim) throw std::invalid_argument("perturbation has the wrong size");
  PRCCurve c;
  c.model = entry.name();
  c.perturbation = e;
  c.thetas.resize(static_cast<std::size_t>(n_theta));
  for (int k = 0; k < n_theta; ++k) c.thetas[static_cast<std::size_t>(k)] = kTwoPi * k / n_theta;
  const auto states = eval_on_cycle(entry, c.thetas);
  c.responses.assign(c.thetas.size(), 0.0);
  c.converged.assign(c.thetas.size(), 0);
  parallel_for(c.thetas.size(), workers, [&](std::size_t k) {
    const PhaseValue v = eval(states[k] + e);
    if (!v.converged) return;
    c.converged[k] = 1;
    c.responses[k] = wrap_pi(v.theta - c.thetas[k]);
  });
  return c;
}

PRCCurve prc_curve(const ModelEntry& entry, const State& e, int n_theta, int workers) {
  return prc_curve(default_evaluator(entry), e, n_theta, workers);
}

std::vector<double> default_box_scales() {
  std::vector<double> s;
  for (int k = 3; k <= 12; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

namespace {

class Occupancy {
 public:
  explicit Occupancy(long n) : n_(n), bits_(static_cast<std::size_t>((n * n + 63) / 64), 0) {}

  void mark(long i, long j) {
    i = std::clamp(i, 0L, n_ - 1);
    j = std::clamp(j, 0L, n_ - 1);
    const auto idx = static_cast<std::uint64_t>(i * n_ + j);
    auto& word = bits_[idx / 64];
    const std::uint64_t bit = std::uint64_t{1} << (idx % 64);
    if (!(word & bit)) {
      word |= bit;
      ++count_;
    }
  }

  /// Mark every cell crossed by the segment (grid units), by exact cell traversal.
  void segment(double x0, double y0, double x1, double y1) {
    long i = static_cast<long>(std::floor(x0)), j = static_cast<long>(std::floor(y0));
    const long i_end = static_cast<long>(std::floor(x1)), j_end = static_cast<long>(std::floor(y1));
    mark(i, j);
    const double dx = x1 - x0, dy = y1 - y0;
    const int si = dx > 0 ? 1 : -1, sj = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    double tmx = dx != 0 ? ((si > 0 ? i + 1 : i) - x0) / dx : inf;
    double tmy = dy != 0 ? ((sj > 0 ? j + 1 : j) - y0) / dy : inf;
    const double tdx = dx != 0 ? std::abs(1.0 / dx) : inf;
    const double tdy = dy != 0 ? std::abs(1.0 / dy) : inf;
    long guard = std::abs(i_end - i) + std::abs(j_end - j) + 2;
    while ((i != i_end || j != j_end) && guard-- > 0) {
      if (tmx < tmy) {
        i += si;
        tmx += tdx;
      } else {
        j += sj;
        tmy += tdy;
      }
      mark(i, j);
    }
  }

  [[nodiscard]] long count() const { return count_; }

 private:
  long n_;
  std::vector<std::uint64_t> bits_;
  long count_ = 0;
};

}  // namespace

BoxCountReport box_counting_dimension(const PRCCurve& curve, const BoxCountOptions& opts) {
  const auto n = curve.thetas.size();
  if (n < 2) throw FitError("curve has fewer than 2 samples");
  auto scales = opts.scales.empty() ? default_box_scales() : opts.scales;
  std::sort(scales.begin(), scales.end(), std::greater<>());
  const double spacing = 1.0 / static_cast<double>(n);
  BoxCountReport rep;
  for (double d : scales) {
    if (d >= 4.0 * spacing - 1e-15) rep.scales.push_back(d);
  }
  if (rep.scales.size() < 4) throw FitError("fewer than 4 usable box scales");

  const bool exclude = opts.exclude_hi > opts.exclude_lo;
  auto usable = [&](std::size_t k) {
    if (!curve.converged[k]) return false;
    return !(exclude && curve.thetas[k] >= opts.exclude_lo && curve.thetas[k] <= opts.exclude_hi);
  };
  // Unit-square coordinates; the graph wraps around in both directions.
  auto u_of = [](double th) { return th / kTwoPi; };
  auto v_of = [](double z) { return (z + kPi) / kTwoPi; };

  for (double d : rep.scales) {
    const long m = std::max(1L, std::lround(1.0 / d));
    Occupancy occ(m);
    for (std::size_t k = 0; k < n; ++k) {
      if (!usable(k)) continue;
      const std::size_t k1 = (k + 1) % n;
      const double x0 = u_of(curve.thetas[k]) * m, y0 = v_of(curve.responses[k]) * m;
      if (!usable(k1)) {
        occ.mark(static_cast<long>(x0), static_cast<long>(y0));
        continue;
      }
      double du = u_of(curve.thetas[k1]) - u_of(curve.thetas[k]);
      if (du < 0) du += 1.0;
      // Shortest way around the response circle.
      const double dz = wrap_pi(curve.responses[k1] - curve.responses[k]);
      const double dv = dz / kTwoPi;
      const double x1 = x0 + du * m, y1 = y0 + dv * m;
      if (y1 >= 0.0 && y1 <= m) {
        occ.segment(x0, y0, std::min(x1, m - 1e-9), y1);
        continue;
      }
      // Split at the wrap of the response axis.
      const double edge = y1 > m ? m : 0.0;
      const double s = (edge - y0) / (y1 - y0);
      const double xm = x0 + s * (x1 - x0);
      occ.segment(x0, y0, std::min(xm, m - 1e-9), edge > 0 ? edge - 1e-9 : 0.0);
      const double shift = edge > 0 ? -static_cast<double>(m) : static_cast<double>(m);
      occ.segment(std::min(xm, m - 1e-9), edge > 0 ? 0.0 : m - 1e-9, std::min(x1, m - 1e-9),
                  y1 + shift);
    }
    rep.counts.push_back(occ.count());
  }

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.scales.size(); ++i) {
    if (rep.counts[i] <= 0) continue;
    lx.push_back(std::log(1.0 / rep.scales[i]));
    ly.push_back(std::log(static_cast<double>(rep.counts[i])));
  }
  if (lx.size() < 4) throw FitError("fewer than 4 non-empty box scales");
  rep.dimension = fit_slope(lx, ly, &rep.fit_residual);
  rep.window_lo = rep.scales.back();
  rep.window_hi = rep.scales.front();
  return rep;
}

void write_prc_csv(std::ostream& os, const PRCCurve& curve) {
  os << "# model: " << curve.model << "\n# perturbation:" << std::setprecision(9);
  for (Eigen::Index i = 0; i < curve.perturbation.size(); ++i) os << ' ' << curve.perturbation[i];
  os << "\ntheta,Z,converged\n";
  for (std::size_t k = 0; k < curve.thetas.size(); ++k) {
    os << curve.thetas[k] << ',' << curve.responses[k] << ',' << int(curve.converged[k]) << '\n';
  }
}

void write_box_count_csv(std::ostream& os, const BoxCountReport& report) {
  os << std::setprecision(9) << "d,N\n";
  for (std::size_t i = 0; i < report.scales.size(); ++i) {
    os << report.scales[i] << ',' << report.counts[i] << '\n';
  }
  os << "# dimension=" << report.dimension << "\n# window=" << report.window_lo << ':'
     << report.window_hi << "\n# residual=" << report.fit_residual << '\n';
}

}  // namespace isochron
