#include "isochron/grid.hpp"

#include <iomanip>
#include <ostream>

namespace isochron {

namespace {
std::string axis_name(const std::vector<std::string>& names, int i) {
  return i < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(i)]
                                            : "x" + std::to_string(i + 1);
}
}  // namespace

void write_section_header(std::ostream& os, const std::string& model,
                          const std::vector<std::string>& state_names, const GridSpec& grid) {
  os << std::setprecision(9) << "# model: " << model << "\n# section:";
  bool any = false;
  for (Eigen::Index k = 0; k < grid.base.size(); ++k) {
    if (k == grid.axis1.index || k == grid.axis2.index) continue;
    os << ' ' << axis_name(state_names, static_cast<int>(k)) << '=' << grid.base[k];
    any = true;
  }
  if (!any) os << " none";
  os << "\n# axes:";
  for (const GridAxis* a : {&grid.axis1, &grid.axis2}) {
    os << ' ' << axis_name(state_names, a->index) << ' ' << a->lo << ':' << a->hi << ' ' << a->n;
  }
  os << '\n';
}

}  // namespace isochron
