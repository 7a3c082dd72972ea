#ifndef CRN_SVG_HPP
#define CRN_SVG_HPP

#include <string>
#include <utility>
#include <vector>

namespace crn {

/// Minimal 2-D polyline plot: axes, ticks, one path. Enough to eyeball a
/// trajectory projection without pulling in a plotting dependency.
std::string svg_polyline_plot(const std::vector<std::pair<double, double>>& points, const std::string& x_label,
                              const std::string& y_label, int width = 640, int height = 480);

} // namespace crn

#endif
