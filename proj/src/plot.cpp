#include "rwctl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rwctl {

namespace {

const char *const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

// Round-number tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
}

void draw_chart(std::ostringstream &svg, const Chart &c, double top, int width, int height) {
    const double left = 80, right = 150, pad_top = 30, pad_bottom = 45;
    const double pw = width - left - right;
    const double ph = height - pad_top - pad_bottom;
    const double y0 = top + pad_top;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Series &s : c.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) {
        const double d = ymin == 0.0 ? 1.0 : std::abs(ymin) * 0.1;
        ymin -= d;
        ymax += d;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return y0 + ph - (y - ymin) / (ymax - ymin) * ph; };

    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << top + 20
        << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(c.title) << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double t : ticks(xmin, xmax)) {
        svg << "<line x1=\"" << px(t) << "\" y1=\"" << y0 + ph << "\" x2=\"" << px(t) << "\" y2=\""
            << y0 + ph + 4 << "\" stroke=\"#444\"/>"
            << "<text x=\"" << px(t) << "\" y=\"" << y0 + ph + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << num(t) << "</text>\n";
    }
    for (double t : ticks(ymin, ymax, 5)) {
        svg << "<line x1=\"" << left << "\" y1=\"" << py(t) << "\" x2=\"" << left + pw << "\" y2=\""
            << py(t) << "\" stroke=\"#ddd\"/>"
            << "<text x=\"" << left - 6 << "\" y=\"" << py(t) + 3
            << "\" text-anchor=\"end\" font-size=\"10\">" << num(t) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << y0 + ph + 34
        << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(c.x_label) << "</text>\n";
    svg << "<text transform=\"translate(" << 18 << "," << y0 + ph / 2
        << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << escape(c.y_label)
        << "</text>\n";

    for (std::size_t k = 0; k < c.series.size(); ++k) {
        const Series &s = c.series[k];
        const char *color = kColors[k % (sizeof kColors / sizeof kColors[0])];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            svg << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        }
        svg << "\"/>\n";
        const double ly = y0 + 12 + 16 * static_cast<double>(k);
        svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
            << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
            << escape(s.label) << "</text>\n";
    }
}

}  // namespace

std::string render_svg(const std::vector<Chart> &charts, int width, int chart_height) {
    std::ostringstream svg;
    const int height = chart_height * static_cast<int>(std::max<std::size_t>(charts.size(), 1));
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < charts.size(); ++i) {
        draw_chart(svg, charts[i], static_cast<double>(i) * chart_height, width, chart_height);
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<Chart> telemetry_charts(const std::vector<TelemetryRecord> &records,
                                    const std::string &title) {
    std::vector<double> t;
    Series err{"error", {}, {}};
    Series rate{"|omega|", {}, {}};
    const int n = records.empty() ? 0 : records.front().wheels();
    std::vector<Series> torque(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) torque[static_cast<std::size_t>(i)].label = "RW" + std::to_string(i);
    for (const TelemetryRecord &r : records) {
        err.x.push_back(r.t);
        err.y.push_back(r.error_angle_deg);
        rate.x.push_back(r.t);
        rate.y.push_back(r.omega.norm());
        for (int i = 0; i < n; ++i) {
            torque[static_cast<std::size_t>(i)].x.push_back(r.t);
            torque[static_cast<std::size_t>(i)].y.push_back(r.tau_applied[i]);
        }
    }
    return {
        Chart{title + ": error angle", "time [s]", "error [deg]", {err}},
        Chart{title + ": angular velocity", "time [s]", "|omega| [rad/s]", {rate}},
        Chart{title + ": applied wheel torque", "time [s]", "torque [N m]", torque},
    };
}

void write_svg(const std::string &svg, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << svg;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace rwctl
