// Minimal SVG line charts of telemetry
#pragma once

#include <string>
#include <vector>

#include "rwctl/telemetry.hpp"

namespace rwctl {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Charts stacked vertically in one SVG document.
std::string render_svg(const std::vector<Chart> &charts, int width = 900, int chart_height = 260);

/// Error angle, |omega| and per-wheel applied torque against time.
std::vector<Chart> telemetry_charts(const std::vector<TelemetryRecord> &records,
                                    const std::string &title);

/// Throws std::runtime_error on I/O failure.
void write_svg(const std::string &svg, const std::string &path);

}  // namespace rwctl
