#pragma once

#include <string>
#include <utility>
#include <vector>

namespace loralab {

/// One polyline or scatter-with-line series.
struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool markers = false;  // draw circles at the points
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

/// Renders one panel as a standalone SVG 1.1 document.
std::string render_plot(const PlotSpec& spec, int width = 640, int height = 420);

/// Stacks panels vertically into one SVG document.
std::string render_panels(const std::vector<PlotSpec>& specs, int width = 640,
                          int panel_height = 420);

}  // namespace loralab
