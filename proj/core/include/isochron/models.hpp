#pragma once
/**
 * @file models.hpp
 * @brief Catalog of the studied systems with their simulation defaults.
 *
 * Entries: van_der_pol, lorenz_r320, map_fig1b, map_eq5, ml_square_wave,
 * ml_elliptic, ml_parabolic, hindmarsh_rose, fitzhugh_rinzel, plant.
 */

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isochron/dynamics.hpp"
#include "isochron/grid.hpp"

namespace isochron {

struct ModelEntry {
  SystemDef system;
  /// Reference frequency (rad per unit time; 2*pi*rotation number for maps).
  double omega0 = 0.0;
  /// Horizon of the Fourier average.
  double horizon_T = 0.0;
  double rel_tol = 1e-6;
  /// Length of the trailing averaging window; 0 averages over the whole horizon.
  double phase_window = 0.0;
  bool bursting = false;
  SegmentSpec sensitivity_set;
  State sensitivity_direction;
  int n_pt_default = 1000;
  /// Point on the attractor with phase 0; empty until built or loaded.
  State reference_point;
  /// Default cross-section for field scans.
  GridSpec default_section;
  /// A point known to lie in the basin, and the time (or iterate count) to settle from it.
  State basin_seed;
  double settle_time = 0.0;

  [[nodiscard]] const std::string& name() const { return system.name; }
  [[nodiscard]] bool continuous() const { return system.kind == SystemKind::continuous; }
  [[nodiscard]] double period() const { return kTwoPi / omega0; }
  [[nodiscard]] bool has_reference() const { return reference_point.size() == system.dim; }
  [[nodiscard]] IntegratorOptions integrator() const {
    IntegratorOptions o;
    o.rel_tol = rel_tol;
    return o;
  }
};

/// Every catalog entry, with persisted reference points attached.
const std::vector<ModelEntry>& catalog();

/// Throws std::out_of_range for unknown names.
const ModelEntry& lookup(std::string_view name);

std::vector<std::string> model_names();

/// Bare system definitions (also used by tests with custom parameters).
SystemDef make_van_der_pol(double mu = 1.0);
SystemDef make_lorenz(double sigma = 10.0, double b = 8.0 / 3.0, double r = 320.0);
SystemDef make_map_fig1b();
SystemDef make_map_eq5();
enum class MorrisLecarRegime { square_wave, elliptic, parabolic };
SystemDef make_morris_lecar(MorrisLecarRegime regime);
SystemDef make_hindmarsh_rose();
SystemDef make_fitzhugh_rinzel();
/// tau_x is not part of the published parameter set; the default reproduces the listed frequency.
SystemDef make_plant(double tau_x = 283.177);

/// Rate functions of the Plant model, exposed for singularity tests.
namespace plant_rates {
double alpha_m(double vs);
double beta_m(double vs);
double alpha_n(double vs);
double beta_n(double vs);
double alpha_h(double vs);
double beta_h(double vs);
double shifted_voltage(double v);
}  // namespace plant_rates

/// x^gamma(theta): flow from the reference point for (theta / 2pi) * T0.
State eval_on_cycle(const ModelEntry& entry, double theta);
/// Batch version; one integration pass over the cycle.
std::vector<State> eval_on_cycle(const ModelEntry& entry, std::span<const double> thetas);

/**
 * Locate the point on the attractor whose Fourier-average phase is 0 (to 1e-7 for flows).
 * For maps the finite-sum phase is only piecewise continuous, so the best point of a
 * collapsed bracket is returned; `phase_residual` receives the remaining phase offset.
 */
State build_reference(const ModelEntry& entry, double* phase_residual = nullptr);

// Reference-point file: one record per line, `name T0 omega0 x1 ... xN`.
struct ReferenceRecord {
  std::string name;
  double period = 0.0;
  double omega0 = 0.0;
  State point;
};
std::map<std::string, ReferenceRecord> parse_reference_records(std::string_view text);
std::string format_reference_record(const ReferenceRecord& rec);
void write_reference_file(std::ostream& os, const std::vector<ReferenceRecord>& records);

}  // namespace isochron
