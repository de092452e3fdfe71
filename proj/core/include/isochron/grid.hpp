#pragma once
/**
 * @file grid.hpp
 * @brief Planar cross-sections of state space and axis-aligned sample segments.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include "isochron/types.hpp"

namespace isochron {

struct GridAxis {
  int index = 0;
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  [[nodiscard]] double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
  [[nodiscard]] double spacing() const { return n == 1 ? 0.0 : (hi - lo) / (n - 1); }
};

/// Two varying axes over a base point whose remaining coordinates stay fixed.
struct GridSpec {
  State base;
  GridAxis axis1;
  GridAxis axis2;

  [[nodiscard]] State node(int i, int j) const {
    State x = base;
    x[axis1.index] = axis1.at(i);
    x[axis2.index] = axis2.at(j);
    return x;
  }
  [[nodiscard]] long size() const { return static_cast<long>(axis1.n) * axis2.n; }
};

/// Axis-aligned segment {base} with coordinate `axis` ranging over [lo, hi].
struct SegmentSpec {
  State base;
  int axis = 0;
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double length() const { return hi - lo; }
  /// n equally spaced points including both endpoints.
  [[nodiscard]] std::vector<State> sample(int n) const {
    std::vector<State> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      State x = base;
      x[axis] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
      pts.push_back(x);
    }
    return pts;
  }
};

/**
 * Comment header shared by field CSV files:
 * `# model: <name>`, `# section: <fixed coordinates>`, `# axes: <name lo:hi n> <name lo:hi n>`.
 */
void write_section_header(std::ostream& os, const std::string& model,
                          const std::vector<std::string>& state_names, const GridSpec& grid);

}  // namespace isochron
