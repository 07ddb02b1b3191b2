#include "loralab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace loralab {

namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void extend(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (lo > hi) {  // no data
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double margin = 0.05 * (hi - lo);
        lo -= margin;
        hi += margin;
    }
};

std::string fmt_tick(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

void render_panel(std::ostringstream& out, const PlotSpec& spec, int width, int height,
                  int y_offset) {
    const int left = 70, right = 20, top = 34, bottom = 46;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };

    Range rx, ry;
    for (const PlotSeries& s : spec.series) {
        for (const auto& [x, y] : s.points) {
            if (spec.log_x && !(x > 0)) continue;
            if (spec.log_y && !(y > 0)) continue;
            rx.extend(tx(x));
            ry.extend(ty(y));
        }
    }
    rx.pad();
    ry.pad();

    auto px = [&](double v) { return left + (tx(v) - rx.lo) / (rx.hi - rx.lo) * plot_w; };
    auto py = [&](double v) {
        return y_offset + top + plot_h - (ty(v) - ry.lo) / (ry.hi - ry.lo) * plot_h;
    };

    out << "<rect x=\"" << left << "\" y=\"" << y_offset + top << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << left << "\" y=\"" << y_offset + 20
        << "\" font-size=\"14\" font-family=\"sans-serif\">" << spec.title << "</text>\n";

    // 5 ticks per axis
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double sx = left + plot_w * i / 4.0;
        const double label_x = spec.log_x ? std::pow(10.0, fx) : fx;
        out << "<line x1=\"" << sx << "\" y1=\"" << y_offset + top + plot_h << "\" x2=\"" << sx
            << "\" y2=\"" << y_offset + top + plot_h + 4 << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << sx << "\" y=\"" << y_offset + top + plot_h + 18
            << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">"
            << fmt_tick(label_x) << "</text>\n";

        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        const double sy = y_offset + top + plot_h - plot_h * i / 4.0;
        const double label_y = spec.log_y ? std::pow(10.0, fy) : fy;
        out << "<line x1=\"" << left - 4 << "\" y1=\"" << sy << "\" x2=\"" << left << "\" y2=\""
            << sy << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << sy + 3
            << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">"
            << fmt_tick(label_y) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << y_offset + height - 8
        << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">"
        << spec.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << y_offset + top + plot_h / 2
        << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 "
        << y_offset + top + plot_h / 2 << ")\">" << spec.y_label << "</text>\n";

    int color_idx = 0;
    int legend_y = y_offset + top + 14;
    for (const PlotSeries& s : spec.series) {
        const char* color = kColors[color_idx % 8];
        ++color_idx;
        std::ostringstream pts;
        for (const auto& [x, y] : s.points) {
            if (spec.log_x && !(x > 0)) continue;
            if (spec.log_y && !(y > 0)) continue;
            pts << px(x) << ',' << py(y) << ' ';
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        if (s.markers) {
            for (const auto& [x, y] : s.points) {
                if (spec.log_x && !(x > 0)) continue;
                if (spec.log_y && !(y > 0)) continue;
                out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
                    << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
            }
        }
        if (!s.label.empty()) {
            out << "<line x1=\"" << left + plot_w - 150 << "\" y1=\"" << legend_y << "\" x2=\""
                << left + plot_w - 132 << "\" y2=\"" << legend_y << "\" stroke=\"" << color
                << "\" stroke-width=\"1.5\"/>\n";
            out << "<text x=\"" << left + plot_w - 128 << "\" y=\"" << legend_y + 3
                << "\" font-size=\"10\" font-family=\"sans-serif\">" << s.label << "</text>\n";
            legend_y += 14;
        }
    }
}

}  // namespace

std::string render_plot(const PlotSpec& spec, int width, int height) {
    return render_panels({spec}, width, height);
}

std::string render_panels(const std::vector<PlotSpec>& specs, int width, int panel_height) {
    const int total_height = panel_height * static_cast<int>(specs.size());
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << total_height << "\" viewBox=\"0 0 " << width << ' ' << total_height
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    int offset = 0;
    for (const PlotSpec& spec : specs) {
        render_panel(out, spec, width, panel_height, offset);
        offset += panel_height;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace loralab
