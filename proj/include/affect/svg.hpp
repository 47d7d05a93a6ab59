#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "affect/dyadic.hpp"
#include "affect/estimator.hpp"
#include "affect/format.hpp"

namespace affect {

namespace svg_detail {

struct Frame {
    double width = 760.0, height = 420.0, margin = 64.0;
    double x_min = 0.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;

    double x0() const { return margin - x_min * x_scale(); }
    double y0() const { return height - margin + y_min * y_scale(); }
    double x_scale() const { return (width - 2.0 * margin) / (x_max - x_min); }
    double y_scale() const { return (height - 2.0 * margin) / (y_max - y_min); }
    double px(double x) const { return x0() + x_scale() * x; }
    double py(double y) const { return y0() - y_scale() * y; }
};

inline std::string points_attr(const Frame& f, const std::vector<std::pair<double, double>>& pts) {
    std::string out;
    for (const auto& [x, y] : pts) {
        if (!out.empty()) out += " ";
        out += format_double(f.px(x)) + "," + format_double(f.py(y));
    }
    return out;
}

inline std::string open_tag(const Frame& f) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(f.width) +
           "\" height=\"" + format_double(f.height) + "\" data-x0=\"" + format_double(f.x0()) +
           "\" data-xscale=\"" + format_double(f.x_scale()) + "\" data-y0=\"" +
           format_double(f.y0()) + "\" data-yscale=\"" + format_double(f.y_scale()) + "\">\n";
}

inline std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
    std::string s;
    s += "  <rect x=\"" + format_double(f.margin) + "\" y=\"" + format_double(f.margin) +
         "\" width=\"" + format_double(f.width - 2 * f.margin) + "\" height=\"" +
         format_double(f.height - 2 * f.margin) +
         "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";
    if (f.y_min < 0.0 && f.y_max > 0.0)
        s += "  <line x1=\"" + format_double(f.margin) + "\" y1=\"" + format_double(f.py(0.0)) +
             "\" x2=\"" + format_double(f.width - f.margin) + "\" y2=\"" +
             format_double(f.py(0.0)) + "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
    s += "  <text x=\"" + format_double(f.width / 2) + "\" y=\"" +
         format_double(f.height - 12.0) + "\" text-anchor=\"middle\" font-size=\"13\">" + x_label +
         "</text>\n";
    s += "  <text x=\"16\" y=\"" + format_double(f.height / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
         format_double(f.height / 2) + ")\">" + y_label + "</text>\n";
    return s;
}

}  // namespace svg_detail

// Mean lines with +/- one standard deviation bands for both roles. Exactly
// two polylines (class "mean") and two polygons (class "band"); the root
// carries the data->pixel transform so tests can invert coordinates.
inline std::string trajectory_svg(const DyadTrajectories& t) {
    svg_detail::Frame f;
    double x_lo = 1e300, x_hi = -1e300, y_lo = -1.0, y_hi = 1.0;
    auto scan = [&](const Trajectory& traj) {
        for (const auto& p : traj.points) {
            double sd = std::sqrt(p.std_variance);
            x_lo = std::min(x_lo, static_cast<double>(p.turn));
            x_hi = std::max(x_hi, static_cast<double>(p.turn));
            y_lo = std::min(y_lo, p.std_mean - sd);
            y_hi = std::max(y_hi, p.std_mean + sd);
        }
    };
    scan(t.teacher);
    scan(t.student);
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    f.x_min = x_lo;
    f.x_max = x_hi;
    f.y_min = y_lo - 0.05;
    f.y_max = y_hi + 0.05;

    std::string s = svg_detail::open_tag(f);
    s += svg_detail::axes(f, "turn", "standardized affect");

    auto band = [&](const Trajectory& traj, const char* cls, const char* color) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : traj.points)
            pts.emplace_back(p.turn, p.std_mean + std::sqrt(p.std_variance));
        for (auto it = traj.points.rbegin(); it != traj.points.rend(); ++it)
            pts.emplace_back(it->turn, it->std_mean - std::sqrt(it->std_variance));
        return "  <polygon class=\"band " + std::string(cls) + "\" points=\"" +
               svg_detail::points_attr(f, pts) + "\" fill=\"" + color +
               "\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
    };
    auto mean_line = [&](const Trajectory& traj, const char* cls, const char* color) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : traj.points) pts.emplace_back(p.turn, p.std_mean);
        return "  <polyline class=\"mean " + std::string(cls) + "\" points=\"" +
               svg_detail::points_attr(f, pts) + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
    };
    s += band(t.teacher, "teacher", "#1f77b4");
    s += band(t.student, "student", "#ff7f0e");
    s += mean_line(t.teacher, "teacher", "#1f77b4");
    s += mean_line(t.student, "student", "#ff7f0e");
    s += "  <text x=\"" + format_double(f.margin + 8.0) + "\" y=\"" +
         format_double(f.margin - 10.0) + "\" font-size=\"13\">" + t.topic +
         " &#8212; <tspan fill=\"#1f77b4\">teacher</tspan> / <tspan fill=\"#ff7f0e\">student</tspan>"
         "</text>\n";
    s += "</svg>\n";
    return s;
}

// Bar chart of the correlogram; the optimal lag's bar carries class
// "optimal". Undefined lags render as hollow markers on the zero line.
inline std::string correlogram_svg(const Correlogram& gram) {
    svg_detail::Frame f;
    f.x_min = gram.lag_min - 0.5;
    f.x_max = gram.lag_max + 0.5;
    f.y_min = -1.05;
    f.y_max = 1.05;

    std::string s = svg_detail::open_tag(f);
    s += svg_detail::axes(f, "lag (turns)", "cross-correlation");
    for (const auto& e : gram.entries) {
        double cx = static_cast<double>(e.lag);
        if (!e.defined()) {
            s += "  <circle class=\"undefined\" cx=\"" + format_double(f.px(cx)) + "\" cy=\"" +
                 format_double(f.py(0.0)) +
                 "\" r=\"3\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";
            continue;
        }
        bool optimal = e.lag == gram.optimal_lag;
        double r = *e.r;
        double x_left = f.px(cx - 0.35);
        double y_top = f.py(std::max(r, 0.0));
        double h = std::abs(f.py(r) - f.py(0.0));
        s += "  <rect class=\"bar" + std::string(optimal ? " optimal" : "") + "\" x=\"" +
             format_double(x_left) + "\" y=\"" + format_double(y_top) + "\" width=\"" +
             format_double(f.px(cx + 0.35) - x_left) + "\" height=\"" + format_double(h) +
             "\" fill=\"" + (optimal ? "#d62728" : "#1f77b4") + "\" fill-opacity=\"0.8\"/>\n";
        s += "  <text x=\"" + format_double(f.px(cx)) + "\" y=\"" +
             format_double(f.height - f.margin + 18.0) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + std::to_string(e.lag) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace affect
