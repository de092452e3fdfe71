#pragma once
/**
 * @file lyapunov.hpp
 * @brief Finite-time Lyapunov exponents: log singular values of M(T), divided by T.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include "isochron/grid.hpp"
#include "isochron/models.hpp"

namespace isochron {

struct FTLEResult {
  std::vector<double> exponents;  ///< descending
  double horizon = 0.0;
};

struct FTLEOptions {
  /// Length of each propagated factor; <= 0 uses T0 / 4 (flows) or 5 iterates (maps).
  double interval = 0.0;
  /// rel_tol for the tangent integration; <= 0 uses the entry's tolerance.
  double rel_tol = 0.0;
};

/**
 * Singular values of a product P = A_m ... A_1 given as factors, without forming P.
 * Returns the log singular values in descending order.
 */
std::vector<double> log_singular_values(const std::vector<Matrix>& factors);

FTLEResult ftle(const ModelEntry& entry, const State& x, double T, const FTLEOptions& opts = {});

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;  ///< row-major; NaN where the computation failed
  [[nodiscard]] double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * grid.axis2.n + j];
  }
};

/// Largest exponent on every grid node.
ScalarField ftle_field(const ModelEntry& entry, const GridSpec& grid, double T, int workers,
                       const FTLEOptions& opts = {});

void write_ftle_field_csv(std::ostream& os, const std::string& model,
                          const std::vector<std::string>& state_names, const ScalarField& field);

}  // namespace isochron
