#include "momentum/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "momentum/errors.hpp"
#include "momentum/ingest.hpp"

namespace momentum::chart {
namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 44;
constexpr int kMarginBottom = 56;
constexpr int kTicks = 5;
constexpr std::size_t kMarkerLimit = 50;

std::string fixed2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_text(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string tick_label(double v, bool time_format) {
    if (time_format) {
        const long s = std::lround(std::max(0.0, v));
        return ingest::format_elapsed(static_cast<int>(s));
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range pad_range(double lo, double hi) {
    if (lo > hi) return {0.0, 1.0};
    if (lo == hi) return {lo - 0.5, hi + 0.5};
    return {lo, hi};
}

}  // namespace

std::string render_line_chart(const std::vector<Series>& series,
                              const ChartOptions& options) {
    if (options.width < 200 || options.height < 150) {
        throw DataError("chart dimensions too small");
    }
    const double x0 = kMarginLeft;
    const double y0 = kMarginTop;
    const double x1 = options.width - kMarginRight;
    const double y1 = options.height - kMarginBottom;

    bool any = false;
    double xlo = 0.0, xhi = 0.0, ylo = 0.0, yhi = 0.0;
    for (const auto& s : series) {
        for (const auto& pt : s.points) {
            if (!std::isfinite(pt[0]) || !std::isfinite(pt[1])) {
                throw NumericError("chart input contains non-finite values");
            }
            if (!any) {
                xlo = xhi = pt[0];
                ylo = yhi = pt[1];
                any = true;
            } else {
                xlo = std::min(xlo, pt[0]);
                xhi = std::max(xhi, pt[0]);
                ylo = std::min(ylo, pt[1]);
                yhi = std::max(yhi, pt[1]);
            }
        }
    }
    Range xr = pad_range(xlo, xhi);
    Range yr = options.y_fixed_unit ? Range{0.0, 1.0} : pad_range(ylo, yhi);
    if (!any) {
        xr = {0.0, 1.0};
        if (!options.y_fixed_unit) yr = {0.0, 1.0};
    }

    const auto sx = [&](double v) {
        return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0);
    };
    const auto sy = [&](double v) {
        return y1 - (v - yr.lo) / (yr.hi - yr.lo) * (y1 - y0);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
        << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width
        << ' ' << options.height << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\""
        << options.height << "\" fill=\"#ffffff\"/>\n";

    // Gridlines and tick labels.
    for (int t = 0; t < kTicks; ++t) {
        const double f = static_cast<double>(t) / (kTicks - 1);
        const double gx = x0 + f * (x1 - x0);
        const double gy = y1 - f * (y1 - y0);
        const double xv = xr.lo + f * (xr.hi - xr.lo);
        const double yv = yr.lo + f * (yr.hi - yr.lo);
        svg << "<line x1=\"" << fixed2(gx) << "\" y1=\"" << fixed2(y0) << "\" x2=\""
            << fixed2(gx) << "\" y2=\"" << fixed2(y1)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<line x1=\"" << fixed2(x0) << "\" y1=\"" << fixed2(gy) << "\" x2=\""
            << fixed2(x1) << "\" y2=\"" << fixed2(gy)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fixed2(gx) << "\" y=\"" << fixed2(y1 + 18)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" "
               "fill=\"#333333\">"
            << escape_text(tick_label(xv, options.x_time_format)) << "</text>\n";
        svg << "<text x=\"" << fixed2(x0 - 8) << "\" y=\"" << fixed2(gy + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" "
               "fill=\"#333333\">"
            << escape_text(tick_label(yv, false)) << "</text>\n";
    }

    // Axes on top of the grid.
    svg << "<line x1=\"" << fixed2(x0) << "\" y1=\"" << fixed2(y1) << "\" x2=\""
        << fixed2(x1) << "\" y2=\"" << fixed2(y1)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << fixed2(x0) << "\" y1=\"" << fixed2(y0) << "\" x2=\""
        << fixed2(x0) << "\" y2=\"" << fixed2(y1)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (const auto& s : series) {
        if (s.points.empty()) continue;
        svg << "<polyline fill=\"none\" stroke=\"" << escape_text(s.color)
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            if (i) svg << ' ';
            svg << fixed2(sx(s.points[i][0])) << ',' << fixed2(sy(s.points[i][1]));
        }
        svg << "\"/>\n";
        if (s.points.size() <= kMarkerLimit) {
            for (const auto& pt : s.points) {
                svg << "<circle cx=\"" << fixed2(sx(pt[0])) << "\" cy=\""
                    << fixed2(sy(pt[1])) << "\" r=\"3\" fill=\""
                    << escape_text(s.color) << "\"/>\n";
            }
        }
    }

    if (!any) {
        svg << "<text x=\"" << fixed2((x0 + x1) / 2) << "\" y=\""
            << fixed2((y0 + y1) / 2)
            << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
               "fill=\"#888888\">no data</text>\n";
    }

    if (!options.title.empty()) {
        svg << "<text x=\"" << fixed2(options.width / 2.0) << "\" y=\"24\" "
               "font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\" "
               "fill=\"#111111\">"
            << escape_text(options.title) << "</text>\n";
    }
    if (!options.x_label.empty()) {
        svg << "<text x=\"" << fixed2((x0 + x1) / 2) << "\" y=\""
            << fixed2(options.height - 14.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
               "fill=\"#333333\">"
            << escape_text(options.x_label) << "</text>\n";
    }
    if (!options.y_label.empty()) {
        svg << "<text x=\"18\" y=\"" << fixed2((y0 + y1) / 2)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
               "transform=\"rotate(-90 18 "
            << fixed2((y0 + y1) / 2) << ")\" fill=\"#333333\">"
            << escape_text(options.y_label) << "</text>\n";
    }

    // Legend, top-right corner of the plot area.
    double ly = y0 + 16;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        const double lx = x1 - 180;
        svg << "<line x1=\"" << fixed2(lx) << "\" y1=\"" << fixed2(ly - 4)
            << "\" x2=\"" << fixed2(lx + 24) << "\" y2=\"" << fixed2(ly - 4)
            << "\" stroke=\"" << escape_text(s.color) << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fixed2(lx + 30) << "\" y=\"" << fixed2(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">"
            << escape_text(s.label) << "</text>\n";
        ly += 16;
    }

    svg << "</svg>\n";
    return svg.str();
}

std::string momentum_chart(const topsis::MomentumSeries& series, int slice,
                           ChartMode mode) {
    const std::array<std::string, 2> colors{"#1f77b4", "#d62728"};
    std::vector<Series> lines;
    for (std::size_t side = 0; side < 2; ++side) {
        Series s;
        s.label = series.player_names[side].empty()
                      ? "player " + std::to_string(side + 1)
                      : series.player_names[side];
        s.color = colors[side];
        for (const auto& pt : series.players[side]) {
            if (slice != 0 && pt.set_no != slice) continue;
            const double y = mode == ChartMode::Closeness
                                 ? pt.closeness
                                 : static_cast<double>(pt.points_won);
            s.points.push_back({static_cast<double>(pt.elapsed_seconds), y});
        }
        lines.push_back(std::move(s));
    }

    ChartOptions options;
    options.title = (mode == ChartMode::Closeness ? "Momentum, match "
                                                  : "Points won, match ") +
                    series.match_id;
    if (slice != 0) {
        options.title += ", set " + std::to_string(slice);
    }
    options.x_label = "elapsed time";
    options.y_label = mode == ChartMode::Closeness ? "closeness" : "points won";
    options.x_time_format = true;
    options.y_fixed_unit = mode == ChartMode::Closeness;
    return render_line_chart(lines, options);
}

}  // namespace momentum::chart
