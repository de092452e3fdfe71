#pragma once
/**
 * @file dopri5.hpp
 * @brief Dormand-Prince 5(4) stepper with PI step control and 4th-order dense output.
 *
 * Coefficients and the controller follow Hairer & Wanner's DOPRI5. The
 * stepper is templated on the state vector type and the right-hand side so
 * the inner loop stays free of virtual calls and heap allocation.
 */

#include <algorithm>
#include <cmath>
#include <limits>

#include "isochron/types.hpp"

namespace isochron {

struct IntegratorOptions {
  /// Relative tolerance, in (0, 1e-2].
  double rel_tol = 1e-6;
  /// Absolute floor of the error scale; the default gives pure relative control.
  double abs_tol = std::numeric_limits<double>::min();
  /// A trajectory whose infinity norm exceeds this bound is flagged as escaped.
  double divergence_bound = 1e7;
  /// Initial step; <= 0 selects one automatically.
  double initial_step = 0.0;
  /// Upper bound on the step size; <= 0 means unbounded.
  double max_step = 0.0;
  long max_steps = 100'000'000;
};

/// Max-norm of err_i / (atol + rtol * max(|y0_i|, |y1_i|)).
struct ComponentErrorNorm {
  template <class Vec>
  double operator()(const Vec& y0, const Vec& y1, const Vec& err, double rtol, double atol) const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      m = std::max(m, std::abs(err[i]) / sc);
    }
    return m;
  }
};

namespace dp5 {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

/**
 * Single-trajectory adaptive stepper. `rhs(y, dydt)` evaluates an autonomous
 * vector field; `norm` scores the embedded error estimate.
 */
template <class Vec, class Rhs, class Norm = ComponentErrorNorm>
class Dopri5 {
 public:
  Dopri5(Rhs rhs, IntegratorOptions opts, Norm norm = Norm{})
      : rhs_(std::move(rhs)), norm_(std::move(norm)), opts_(opts) {}

  void reset(double t0, const Vec& y0, double t_final) {
    t_ = t0;
    t_prev_ = t0;
    t_final_ = t_final;
    y_ = y0;
    y_prev_ = y0;
    rhs_(y_, k1_);
    facold_ = 1e-4;
    last_rejected_ = false;
    steps_ = 0;
    h_ = opts_.initial_step > 0.0 ? opts_.initial_step : initial_step();
    h_ = std::min(h_, t_final_ - t_);
    if (opts_.max_step > 0.0) h_ = std::min(h_, opts_.max_step);
  }

  /// Take one accepted step, never stepping past t_final. Throws IntegrationError.
  void step() {
    constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
    const double h_floor = 1e-14 * std::max(std::abs(t_final_), 1.0);
    for (;;) {
      if (++steps_ > opts_.max_steps) throw IntegrationError("step budget exhausted", t_);
      double h = h_;
      const bool last = t_ + 1.01 * h >= t_final_;
      if (last) h = t_final_ - t_;
      if (h < h_floor && !last) throw IntegrationError("step size underflow", t_);

      using namespace dp5;
      tmp_ = y_ + h * (a21 * k1_);
      rhs_(tmp_, k2_);
      tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
      rhs_(tmp_, k3_);
      tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
      rhs_(tmp_, k4_);
      tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
      rhs_(tmp_, k5_);
      tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      rhs_(tmp_, k6_);
      ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
      rhs_(ynew_, k7_);
      err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

      double err = norm_(y_, ynew_, err_, opts_.rel_tol, opts_.abs_tol);
      if (!std::isfinite(err) || !ynew_.allFinite()) err = 1e10;

      const double fac11 = std::pow(err, expo1);
      double fac = fac11 / std::pow(facold_, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;

      if (err <= 1.0) {
        facold_ = std::max(err, 1e-4);
        // dense output coefficients
        r1_ = y_;
        r2_ = ynew_ - y_;
        r3_ = h * k1_ - r2_;
        r4_ = r2_ - h * k7_ - r3_;
        r5_ = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
        if (opts_.max_step > 0.0) hnew = std::min(hnew, opts_.max_step);
        if (last_rejected_) hnew = std::min(hnew, h);
        last_rejected_ = false;
        t_prev_ = t_;
        y_prev_ = y_;
        t_ = last ? t_final_ : t_ + h;
        y_ = ynew_;
        k1_ = k7_;
        h_ = hnew;
        h_last_ = h;
        return;
      }
      last_rejected_ = true;
      h_ = h / std::min(facc1, fac11 / safe);
      if (h_ < h_floor) throw IntegrationError("step size underflow", t_);
    }
  }

  /// Dense output inside the last accepted step [t_prev, t].
  [[nodiscard]] Vec dense(double t) const {
    const double s = (t - t_prev_) / h_last_;
    const double s1 = 1.0 - s;
    return r1_ + s * (r2_ + s1 * (r3_ + s * (r4_ + s1 * r5_)));
  }

  [[nodiscard]] bool done() const { return t_ >= t_final_; }
  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] double t_prev() const { return t_prev_; }
  [[nodiscard]] const Vec& y() const { return y_; }
  [[nodiscard]] const Vec& y_prev() const { return y_prev_; }
  /// Derivative at the current state (first stage of the next step).
  [[nodiscard]] const Vec& dydt() const { return k1_; }
  [[nodiscard]] long steps() const { return steps_; }

 private:
  double initial_step() {
    // Hairer's heuristic with a smooth scale so nearby initial states get nearby steps.
    const double ymax = y_.cwiseAbs().maxCoeff();
    auto scale = [&](Eigen::Index i) {
      return opts_.rel_tol * std::max(std::abs(y_[i]), 1e-3 * ymax + 1e-12);
    };
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      d0 = std::max(d0, std::abs(y_[i]) / scale(i));
      d1 = std::max(d1, std::abs(k1_[i]) / scale(i));
    }
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_final_ - t_);
    tmp_ = y_ + h0 * k1_;
    rhs_(tmp_, k2_);
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) d2 = std::max(d2, std::abs(k2_[i] - k1_[i]) / scale(i));
    d2 /= h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min(100.0 * h0, h1);
  }

  Rhs rhs_;
  Norm norm_;
  IntegratorOptions opts_;
  double t_ = 0.0, t_prev_ = 0.0, t_final_ = 0.0, h_ = 0.0, h_last_ = 1.0, facold_ = 1e-4;
  bool last_rejected_ = false;
  long steps_ = 0;
  Vec y_, y_prev_, ynew_, tmp_, err_;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_;
  Vec r1_, r2_, r3_, r4_, r5_;
};

template <class Vec, class Rhs, class Norm = ComponentErrorNorm>
auto make_dopri5(Rhs rhs, const IntegratorOptions& opts, Norm norm = Norm{}) {
  return Dopri5<Vec, Rhs, Norm>(std::move(rhs), opts, std::move(norm));
}

}  // namespace isochron
