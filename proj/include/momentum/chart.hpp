#pragma once

#include <array>
#include <string>
#include <vector>

#include "momentum/topsis.hpp"

namespace momentum::chart {

struct Series {
    std::string label;
    std::string color;  // any SVG color
    std::vector<std::array<double, 2>> points;
};

struct ChartOptions {
    int width = 960;
    int height = 540;
    std::string title;
    std::string x_label;
    std::string y_label;
    bool x_time_format = false;  // tick labels as H:MM:SS
    bool y_fixed_unit = false;   // pin the y range to [0, 1]
};

// Deterministic byte output for identical input: fixed formatting, no
// timestamps. Vertex markers are drawn when a series has at most 50 points.
std::string render_line_chart(const std::vector<Series>& series,
                              const ChartOptions& options);

enum class ChartMode { Closeness, RawPoints };

// slice 0 renders the whole match, otherwise the given set only.
std::string momentum_chart(const topsis::MomentumSeries& series, int slice,
                           ChartMode mode = ChartMode::Closeness);

}  // namespace momentum::chart
