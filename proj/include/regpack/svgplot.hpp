#pragma once

#include <string>
#include <vector>

namespace regpack::svgplot {

struct Series {
    std::string label;
    std::vector<double> t;
    std::vector<double> y;
};

struct Panel {
    std::string title;
    std::vector<Series> series;
};

/// Dependency-light multi-panel line chart (verification aid, not
/// publication graphics). Panels stack vertically, time on the abscissa.
void write_figure(const std::string& path, const std::vector<Panel>& panels,
                  int width = 900, int panel_height = 260, size_t max_points = 2000);

} // namespace regpack::svgplot
