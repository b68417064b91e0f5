#pragma once

#include <string>
#include <vector>

namespace quantsig::svg {

struct LineSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Optional tick captions; when set, x values are indices into this list.
    std::vector<std::string> x_tick_labels;
    bool show_diagonal = false;  ///< y = x reference line, for ROC plots
    int width = 900;
    int height = 500;
};

/// Self-contained SVG line chart with axes and a legend. Coordinates are
/// printed with fixed precision so output is byte-stable.
std::string line_chart(const ChartSpec& spec, const std::vector<LineSeries>& series);

/// XML-escapes &, <, >, " and '.
std::string escape(std::string_view text);

}  // namespace quantsig::svg
