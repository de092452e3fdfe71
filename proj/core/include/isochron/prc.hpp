#pragma once
/**
 * @file prc.hpp
 * @brief Finite phase response curves and box-counting dimension of sampled graphs.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include "isochron/phase.hpp"

namespace isochron {

struct PRCCurve {
  std::string model;
  State perturbation;
  std::vector<double> thetas;     ///< uniform grid on [0, 2pi)
  std::vector<double> responses;  ///< Z in (-pi, pi]
  std::vector<char> converged;
};

/// Z_e(theta) = Theta(x_gamma(theta) + e) - theta on n_theta uniform phases.
PRCCurve prc_curve(const PhaseEvaluator& eval, const State& e, int n_theta, int workers);
PRCCurve prc_curve(const ModelEntry& entry, const State& e, int n_theta, int workers);

struct BoxCountReport {
  std::vector<double> scales;  ///< box sizes d (descending)
  std::vector<long> counts;    ///< N(d)
  double dimension = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double fit_residual = 0.0;
};

struct BoxCountOptions {
  /// Box sizes; empty uses the dyadic values 1/8 ... 1/4096.
  std::vector<double> scales;
  /// Points with theta in [exclude_lo, exclude_hi] are treated as gaps (both 0 disables).
  double exclude_lo = 0.0;
  double exclude_hi = 0.0;
};

std::vector<double> default_box_scales();

/**
 * Count occupied boxes of the piecewise-linear (theta, Z) graph mapped to the unit square.
 * Scales finer than 4 theta-grid spacings are dropped; throws FitError with fewer than 4 left.
 */
BoxCountReport box_counting_dimension(const PRCCurve& curve, const BoxCountOptions& opts = {});

void write_prc_csv(std::ostream& os, const PRCCurve& curve);
void write_box_count_csv(std::ostream& os, const BoxCountReport& report);

}  // namespace isochron
