#include "flowlab/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "flowlab/csv.hpp"

namespace flowlab {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

double transform(double y, const PlotSpec& spec) {
    switch (spec.y_scale) {
        case AxisScale::linear: return y;
        case AxisScale::log10: return std::log10(std::max(y, 1e-300));
        case AxisScale::symlog: {
            const double s = y < 0 ? -1.0 : 1.0;
            return s * std::log10(1.0 + std::abs(y) / spec.symlog_threshold);
        }
    }
    return y;
}

std::string tick_label(double y, const PlotSpec& spec) {
    std::ostringstream ss;
    ss.precision(3);
    switch (spec.y_scale) {
        case AxisScale::linear: ss << y; break;
        case AxisScale::log10: ss << "1e" << y; break;
        case AxisScale::symlog: {
            const double v = (std::pow(10.0, std::abs(y)) - 1.0) * spec.symlog_threshold *
                             (y < 0 ? -1.0 : 1.0);
            ss << v;
            break;
        }
    }
    return ss.str();
}

}  // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<PlotSeries>& series) {
    const double ml = 70, mr = 20, mt = 36, mb = 48;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const PlotSeries& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            const double ty = transform(s.y[i], spec);
            ymin = std::min(ymin, ty);
            ymax = std::max(ymax, ty);
        }
    if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + pw * (x - xmin) / (xmax - xmin); };
    auto py = [&](double ty) { return mt + ph * (1.0 - (ty - ymin) / (ymax - ymin)); };

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("svgplot: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-size=\"14\">" << spec.title << "</text>\n";

    // frame + ticks
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
        << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / nticks;
        out << "<line x1=\"" << px(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(fx)
            << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << format_double(std::round(fx))
            << "</text>\n";
        const double fy = ymin + (ymax - ymin) * i / nticks;
        out << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml
            << "\" y2=\"" << py(fy) << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(fy, spec)
            << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 8
        << "\" text-anchor=\"middle\" font-size=\"12\">" << spec.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\""
        << " transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << spec.y_label
        << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
            out << px(series[s].x[i]) << "," << py(transform(series[s].y[i], spec)) << " ";
        }
        out << "\"/>\n";
        const double ly = mt + 16 + 16 * static_cast<double>(s);
        out << "<line x1=\"" << ml + pw - 130 << "\" y1=\"" << ly << "\" x2=\""
            << ml + pw - 110 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw - 104 << "\" y=\"" << ly + 4
            << "\" font-size=\"11\">" << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace flowlab
