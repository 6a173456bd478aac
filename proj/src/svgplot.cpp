#include "regpack/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace regpack::svgplot {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                         "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(5);
    s << v;
    return s.str();
}

struct Bounds {
    double t0 = 0, t1 = 1, y0 = 0, y1 = 1;
};

Bounds bounds_of(const Panel& p) {
    Bounds b;
    bool first = true;
    for (const auto& s : p.series) {
        for (size_t i = 0; i < s.t.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (first) {
                b.t0 = b.t1 = s.t[i];
                b.y0 = b.y1 = s.y[i];
                first = false;
            }
            b.t0 = std::min(b.t0, s.t[i]);
            b.t1 = std::max(b.t1, s.t[i]);
            b.y0 = std::min(b.y0, s.y[i]);
            b.y1 = std::max(b.y1, s.y[i]);
        }
    }
    if (b.t1 <= b.t0) b.t1 = b.t0 + 1;
    if (b.y1 <= b.y0) {
        b.y0 -= 0.5;
        b.y1 += 0.5;
    }
    double pad = 0.05 * (b.y1 - b.y0);
    b.y0 -= pad;
    b.y1 += pad;
    return b;
}

} // namespace

void write_figure(const std::string& path, const std::vector<Panel>& panels, int width,
                  int panel_height, size_t max_points) {
    if (panels.empty()) throw std::runtime_error("write_figure: no panels");
    const int margin_l = 70, margin_r = 20, margin_t = 34, margin_b = 36;
    const int total_h = panel_height * static_cast<int>(panels.size());

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << total_h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (size_t pi = 0; pi < panels.size(); ++pi) {
        const Panel& p = panels[pi];
        Bounds b = bounds_of(p);
        const double x0 = margin_l, x1 = width - margin_r;
        const double y_top = pi * panel_height + margin_t;
        const double y_bot = (pi + 1) * panel_height - margin_b;
        auto X = [&](double t) { return x0 + (t - b.t0) / (b.t1 - b.t0) * (x1 - x0); };
        auto Y = [&](double y) { return y_bot - (y - b.y0) / (b.y1 - b.y0) * (y_bot - y_top); };

        svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << y_top - 14
            << "\" text-anchor=\"middle\" font-weight=\"bold\">" << p.title << "</text>\n";
        svg << "<rect x=\"" << x0 << "\" y=\"" << y_top << "\" width=\"" << x1 - x0
            << "\" height=\"" << y_bot - y_top << "\" fill=\"none\" stroke=\"#444\"/>\n";

        // axis ticks
        for (int k = 0; k <= 5; ++k) {
            double t = b.t0 + (b.t1 - b.t0) * k / 5.0;
            double y = b.y0 + (b.y1 - b.y0) * k / 5.0;
            svg << "<line x1=\"" << X(t) << "\" y1=\"" << y_bot << "\" x2=\"" << X(t) << "\" y2=\""
                << y_bot + 4 << "\" stroke=\"#444\"/>\n";
            svg << "<text x=\"" << X(t) << "\" y=\"" << y_bot + 16
                << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
            svg << "<line x1=\"" << x0 - 4 << "\" y1=\"" << Y(y) << "\" x2=\"" << x0 << "\" y2=\""
                << Y(y) << "\" stroke=\"#444\"/>\n";
            svg << "<text x=\"" << x0 - 7 << "\" y=\"" << Y(y) + 4
                << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
        }
        svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << y_bot + 30
            << "\" text-anchor=\"middle\">t [s]</text>\n";

        for (size_t si = 0; si < p.series.size(); ++si) {
            const Series& s = p.series[si];
            size_t stride = std::max<size_t>(1, s.t.size() / max_points);
            svg << "<polyline fill=\"none\" stroke=\"" << kColors[si % 10]
                << "\" stroke-width=\"1.1\" points=\"";
            for (size_t i = 0; i < s.t.size(); i += stride) {
                if (!std::isfinite(s.y[i])) continue;
                svg << fmt(X(s.t[i])) << ',' << fmt(Y(s.y[i])) << ' ';
            }
            svg << "\"/>\n";
            // legend entry
            double lx = x0 + 8 + 110.0 * static_cast<double>(si % 6);
            double ly = y_top + 14 + 16.0 * static_cast<double>(si / 6);
            svg << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 18
                << "\" y2=\"" << ly - 4 << "\" stroke=\"" << kColors[si % 10]
                << "\" stroke-width=\"2\"/>\n";
            svg << "<text x=\"" << lx + 22 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
        }
    }
    svg << "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_figure: cannot open " + path);
    f << svg.str();
}

} // namespace regpack::svgplot
