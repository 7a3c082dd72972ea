#include "crn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crn {

std::string svg_polyline_plot(const std::vector<std::pair<double, double>>& points, const std::string& x_label,
                              const std::string& y_label, int width, int height) {
  const int margin = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!points.empty()) {
    xmin = xmax = points.front().first;
    ymin = ymax = points.front().second;
    for (const auto& [x, y] : points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;

  const auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
  const auto sy = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
     << "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<line x1=\"" << sx(xv) << "\" y1=\"" << height - margin << "\" x2=\"" << sx(xv) << "\" y2=\""
       << height - margin + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << sx(xv) << "\" y=\"" << height - margin + 18 << "\" font-size=\"10\" text-anchor=\"middle\">"
       << xv << "</text>\n";
    os << "<line x1=\"" << margin - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << margin << "\" y2=\"" << sy(yv)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << margin - 8 << "\" y=\"" << sy(yv) + 3 << "\" font-size=\"10\" text-anchor=\"end\">" << yv
       << "</text>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" font-size=\"12\" text-anchor=\"middle\">"
     << x_label << "</text>\n";
  os << "<text x=\"15\" y=\"" << height / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << height / 2 << ")\">" << y_label << "</text>\n";

  os << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
  for (const auto& [x, y] : points) os << sx(x) << "," << sy(y) << " ";
  os << "\"/>\n</svg>\n";
  return os.str();
}

} // namespace crn
