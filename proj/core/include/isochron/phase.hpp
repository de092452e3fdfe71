#pragma once
/**
 * @file phase.hpp
 * @brief Asymptotic phase from Fourier averages along trajectories.
 *
 * Continuous systems: arg of (1/W) * integral over [T - W, T] of g(phi(t, x)) exp(-i w0 t) dt,
 * with W = T (full average) or a trailing window. Maps: arg of
 * (1/T) * sum_{t=0..T} g(F^t(x)) exp(-i w0 t).
 *
 * g is replaced by g minus its mean over the same samples, so adding a constant to the
 * observable leaves the average unchanged to rounding.
 */

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "isochron/grid.hpp"
#include "isochron/models.hpp"

namespace isochron {

struct PhaseValue {
  double theta = 0.0;  ///< in [0, 2pi); meaningful only when converged
  double modulus = 0.0;
  bool converged = false;
};

struct PhaseSettings {
  Observable observable;
  double omega0 = 0.0;
  double horizon = 0.0;
  /// Trailing window length; 0 averages over [0, horizon].
  double window = 0.0;
  double rel_tol = 1e-6;
  /// Absolute modulus floor; negative means 1e-3 of the modulus on the attractor.
  double modulus_floor = -1.0;
};

PhaseSettings default_phase_settings(const ModelEntry& entry);
/// Same, with a different horizon; trailing windows are rescaled to whole periods.
PhaseSettings default_phase_settings(const ModelEntry& entry, double horizon);

class PhaseEvaluator {
 public:
  explicit PhaseEvaluator(const ModelEntry& entry);
  PhaseEvaluator(const ModelEntry& entry, PhaseSettings settings);

  /// Raw Fourier average; `escaped` is set when the orbit left the bounded region or
  /// the integrator failed.
  [[nodiscard]] std::complex<double> average(const State& x, bool* escaped = nullptr) const;
  [[nodiscard]] PhaseValue operator()(const State& x) const;

  [[nodiscard]] double modulus_floor() const { return floor_; }
  [[nodiscard]] const PhaseSettings& settings() const { return settings_; }
  [[nodiscard]] const ModelEntry& entry() const { return entry_; }

 private:
  ModelEntry entry_;
  PhaseSettings settings_;
  double floor_ = 0.0;
};

/// Full-horizon average over [0, T] (continuous entries).
std::complex<double> fourier_average(const ModelEntry& entry, const State& x, double T);
/// (1/T) sum_{t=0..T} for maps.
std::complex<double> fourier_average_discrete(const ModelEntry& entry, const State& x, long T);

/// Phase with the entry's default settings. Evaluators are cached per catalog entry.
PhaseValue phase_of(const ModelEntry& entry, const State& x);
const PhaseEvaluator& default_evaluator(const ModelEntry& entry);

struct PhaseField {
  GridSpec grid;
  /// Row-major: index i * axis2.n + j.
  std::vector<PhaseValue> values;

  [[nodiscard]] const PhaseValue& at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * grid.axis2.n + j];
  }
};

PhaseField phase_field(const PhaseEvaluator& eval, const GridSpec& grid, int workers);
PhaseField phase_field(const ModelEntry& entry, const GridSpec& grid, int workers);

void write_phase_field_csv(std::ostream& os, const std::string& model,
                           const std::vector<std::string>& state_names, const PhaseField& field);

}  // namespace isochron
