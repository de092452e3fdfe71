#include <cmath>

#include "isochron/models.hpp"
#include "isochron/phase.hpp"

namespace isochron {

namespace {

constexpr double kPhaseTol = 1e-7;
constexpr int kMaxIter = 200;

struct ZeroPhase {
  State point;
  double residual = 0.0;
};

/**
 * Safeguarded Newton iteration on r(s) = wrap_pi(Theta(point(s))) with a nominal slope.
 * Once a sign change is seen the iterate is kept inside the bracket. Map phases computed
 * from a finite sum jump by O(1/T) where an orbit point crosses the observable's wrap, so a
 * bracket that collapses without reaching the tolerance returns the best point found.
 */
template <class PointAt>
ZeroPhase solve_zero_phase(const PhaseEvaluator& eval, PointAt&& point_at, double s, double slope) {
  auto residual = [&](double at, State& x) {
    x = point_at(at);
    const PhaseValue v = eval(x);
    if (!v.converged) throw NotPeriodicError("phase did not converge while locating the reference");
    return wrap_pi(v.theta);
  };
  State x, xn;
  double r = residual(s, x);
  ZeroPhase best{x, r};
  bool bracketed = false;
  double lo = 0.0, hi = 0.0, r_lo = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    if (std::abs(r) < std::abs(best.residual)) best = {x, r};
    if (std::abs(best.residual) < kPhaseTol) return best;
    if (bracketed && hi - lo < 1e-13 * std::max(1.0, std::abs(s))) return best;
    double next = s - r / slope;
    if (bracketed && !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double rn = residual(next, xn);
    if (!bracketed) {
      if (rn * r < 0.0) {
        bracketed = true;
        lo = std::min(s, next);
        hi = std::max(s, next);
        r_lo = lo == s ? r : rn;
      }
    } else if ((rn < 0.0) == (r_lo < 0.0)) {
      lo = next;
      r_lo = rn;
    } else {
      hi = next;
    }
    if (next != s) {
      const double est = (rn - r) / (next - s);
      if (est > 0.5 * slope && est < 2.0 * slope) slope = est;
    }
    s = next;
    r = rn;
    x = xn;
  }
  throw IterationError("reference point search did not converge", kMaxIter);
}

}  // namespace

State build_reference(const ModelEntry& entry, double* phase_residual) {
  if (entry.basin_seed.size() != entry.system.dim) {
    throw std::invalid_argument("entry " + entry.name() + " has no basin seed");
  }
  ModelEntry work = entry;
  work.reference_point.resize(0);
  const PhaseEvaluator eval(work);

  if (entry.continuous()) {
    const auto opts = entry.integrator();
    const State xs = flow_to(entry.system, entry.basin_seed, entry.settle_time, opts);
    const PhaseValue v0 = eval(xs);
    if (!v0.converged) throw NotPeriodicError("settled state of " + entry.name() + " is phaseless");
    const double omega = entry.omega0;
    const double tau0 = wrap_two_pi(-v0.theta) / omega;
    const auto z = solve_zero_phase(
        eval, [&](double tau) { return tau <= 0.0 ? xs : flow_to(entry.system, xs, tau, opts); }, tau0,
        omega);
    if (phase_residual) *phase_residual = z.residual;
    return z.point;
  }

  // Maps: shift the settled point along the second coordinate and iterate back onto the
  // attractor; the phase advances by K * w0, which is absorbed by the search.
  constexpr long K = 600;
  const State xs =
      iterate_map(entry.system, entry.basin_seed, std::max(1L, std::lround(entry.settle_time)))
          .states.back();
  auto point_at = [&](double s) {
    State z = xs;
    z[1] += s;
    return iterate_map(entry.system, z, K).states.back();
  };
  const PhaseValue v0 = eval(point_at(0.0));
  if (!v0.converged) throw NotPeriodicError("settled state of " + entry.name() + " is phaseless");
  const auto z = solve_zero_phase(eval, point_at, -wrap_pi(v0.theta) / kTwoPi, kTwoPi);
  if (phase_residual) *phase_residual = z.residual;
  return z.point;
}

}  // namespace isochron
