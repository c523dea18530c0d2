#pragma once

#include <string>
#include <vector>

namespace flowlab {

// Minimal static line-plot writer; enough for convergence and diagnostic
// figures. CSVs remain the contract, plots are conveniences.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

enum class AxisScale { linear, log10, symlog };

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    AxisScale y_scale = AxisScale::linear;
    double symlog_threshold = 1e-3;
    int width = 720;
    int height = 440;
};

void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<PlotSeries>& series);

}  // namespace flowlab
