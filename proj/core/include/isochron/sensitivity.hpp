#pragma once
/**
 * @file sensitivity.hpp
 * @brief Two-point phase sensitivity, averaged sensitivity curves and their slope fits.
 */

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isochron/grid.hpp"
#include "isochron/phase.hpp"

namespace isochron {

/// min_k |a - b + 2 pi k|, in [0, pi].
double geodesic_distance(double a, double b);

using PhaseFunction = std::function<PhaseValue(const State&)>;

/// max of the geodesic distances from Theta(x) to Theta(x -+ eps e); nullopt if any phase failed.
std::optional<double> two_point_sensitivity(const PhaseFunction& phase, const State& x, double eps,
                                            const State& e);
std::optional<double> two_point_sensitivity(const ModelEntry& entry, const State& x, double eps,
                                            const State& e);

/// n log-spaced values from 1e-2 L down to 1e-7 L.
std::vector<double> default_eps_grid(double length, int n = 12);

/**
 * Catalog phase settings with the flow tolerance capped at 0.1 * eps_min / length, so that
 * integration noise in the phase stays below the smallest sampled phase difference.
 */
PhaseSettings sensitivity_phase_settings(const ModelEntry& entry, double eps_min, double length);

/// Two-point values for every (epsilon, point) pair; NaN marks invalid pairs.
struct SampleTable {
  std::vector<double> eps;
  int n_pt = 0;
  /// Points whose own phase converged.
  int n_base_valid = 0;
  std::vector<double> f;  ///< f[i * n_pt + k] for eps[i], point k

  [[nodiscard]] double at(std::size_t i, std::size_t k) const {
    return f[i * static_cast<std::size_t>(n_pt) + k];
  }
};

SampleTable sample_sensitivity(const PhaseFunction& phase, const SegmentSpec& set, int n_pt,
                               const State& e, const std::vector<double>& eps, int workers);

struct SensitivitySample {
  double epsilon = 0.0;
  double mean_f = 0.0;  ///< mean f (two-point) or exceedance fraction (mdtheta)
  int n_valid = 0;
};

struct SensitivityCurve {
  std::vector<SensitivitySample> samples;
  double alpha = 0.0;
  double beta = 1.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double fit_residual = 0.0;
  std::string method = "two-point";
  std::vector<std::string> warnings;
};

struct FitOptions {
  /// Number of smallest usable epsilons in the fit window.
  int window = 5;
  /// Minimum n_valid / n_pt for an epsilon to be usable.
  double min_valid_fraction = 0.9;
};

/// Mean-f curve from a sample table; throws FitError with fewer than 3 usable samples.
SensitivityCurve fit_mean_curve(const SampleTable& table, const FitOptions& fit = {});
/// Exceedance-fraction curve; zero fractions are skipped with a warning.
SensitivityCurve fit_mdtheta_curve(const SampleTable& table, double delta_theta,
                                   const FitOptions& fit = {});

struct SensitivityOptions {
  int n_pt = 0;        ///< 0 uses min(entry default, ...) as given by the caller
  State direction;     ///< empty uses the entry's direction
  std::vector<double> eps;  ///< empty uses default_eps_grid(|A|)
  FitOptions fit;
  int workers = 1;
};

SensitivityCurve sensitivity_curve(const ModelEntry& entry, const SegmentSpec& set,
                                   const SensitivityOptions& opts);
SensitivityCurve mdtheta_curve(const ModelEntry& entry, const SegmentSpec& set,
                               const SensitivityOptions& opts, double delta_theta = 0.5);

/// 1 - d ln f / d ln eps by centered differences at interior samples.
std::vector<std::pair<double, double>> infinitesimal_coefficient(const SensitivityCurve& curve);

/// Least-squares slope of y on x; residual receives the RMS deviation.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y, double* residual = nullptr);

void write_curve_csv(std::ostream& os, const SensitivityCurve& curve);

}  // namespace isochron
