#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rie/bench.hpp"

namespace rie {

struct plot_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

// Renders a benchmark result CSV as a self-contained SVG line chart. Series
// are grouped by estimator name. Trace-residual scans are drawn on log-log
// axes against N with a 0.4 N^{-1/2} reference line; everything else is MSE
// against lambda on linear axes. Output bytes depend only on the input.
inline std::string render_results_svg(std::istream& csv) {
    std::string line;
    if (!std::getline(csv, line)) throw plot_error("empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string expected(ExperimentResult::csv_header());
    if (line + "\n" != expected)
        throw plot_error("unexpected CSV header: " + line);

    struct Pt {
        double x, y;
    };
    std::map<std::string, std::vector<Pt>> series;
    bool residual_scan = false;
    while (std::getline(csv, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 11) throw plot_error("bad CSV row: " + line);
        const std::string& estimator = f[4];
        const double lambda = std::stod(f[1]);
        const double n = std::stod(f[2]);
        const double mse = std::stod(f[5]);
        if (estimator == "theorem2_abs_residual") {
            residual_scan = true;
            series[estimator].push_back({n, mse});
        } else {
            series[estimator].push_back({lambda, mse});
        }
    }
    if (series.empty()) throw plot_error("no data rows");

    if (residual_scan) {
        // reference curve over the observed N range
        const auto& pts = series.at("theorem2_abs_residual");
        double lo = pts.front().x, hi = pts.front().x;
        for (const auto& p : pts) {
            lo = std::min(lo, p.x);
            hi = std::max(hi, p.x);
        }
        auto& ref = series["ref_0.4_N^-1/2"];
        for (int i = 0; i <= 32; ++i) {
            const double n = lo * std::pow(hi / lo, i / 32.0);
            ref.push_back({n, 0.4 / std::sqrt(n)});
        }
    }

    for (auto& [name, pts] : series)
        std::sort(pts.begin(), pts.end(),
                  [](const Pt& a, const Pt& b) { return a.x < b.x; });

    const bool logxy = residual_scan;
    auto tx = [&](double v) { return logxy ? std::log10(v) : v; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [name, pts] : series)
        for (const auto& p : pts) {
            if (logxy && (p.x <= 0.0 || p.y <= 0.0)) continue;
            xmin = std::min(xmin, tx(p.x));
            xmax = std::max(xmax, tx(p.x));
            ymin = std::min(ymin, tx(p.y));
            ymax = std::max(ymax, tx(p.y));
        }
    if (!(xmin <= xmax && ymin <= ymax)) throw plot_error("no plottable points");
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }

    const double W = 640, H = 480, ml = 70, mr = 20, mt = 30, mb = 50;
    auto px = [&](double x) {
        return ml + (tx(x) - xmin) / (xmax - xmin) * (W - ml - mr);
    };
    auto py = [&](double y) {
        return H - mb - (tx(y) - ymin) / (ymax - ymin) * (H - mt - mb);
    };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#e377c2", "#7f7f7f"};
    std::string svg;
    char buf[256];
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
           "height=\"480\" viewBox=\"0 0 640 480\">\n";
    svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    // axes
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                  "stroke=\"black\"/>\n",
                  ml, H - mb, W - mr, H - mb);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                  "stroke=\"black\"/>\n",
                  ml, mt, ml, H - mb);
    svg += buf;
    // ticks
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        const double vx = logxy ? std::pow(10.0, fx) : fx;
        const double vy = logxy ? std::pow(10.0, fy) : fy;
        const double sx = ml + (W - ml - mr) * i / 5.0;
        const double sy = H - mb - (H - mt - mb) * i / 5.0;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-size=\"11\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      sx, H - mb + 16, detail::fmt_num(vx).c_str());
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-size=\"11\" "
                      "text-anchor=\"end\">%s</text>\n",
                      ml - 6, sy + 4, detail::fmt_num(vy).c_str());
        svg += buf;
    }
    const char* xlabel = residual_scan ? "N" : "lambda";
    const char* ylabel = residual_scan ? "mean |residual|" : "MSE";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" font-size=\"13\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  (ml + W - mr) / 2, H - 12, xlabel);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"14\" y=\"%g\" font-size=\"13\" text-anchor="
                  "\"middle\" transform=\"rotate(-90 14 %g)\">%s</text>\n",
                  (mt + H - mb) / 2, (mt + H - mb) / 2, ylabel);
    svg += buf;

    int idx = 0;
    for (const auto& [name, pts] : series) {
        const char* color = kColors[idx % 8];
        std::string path;
        bool first = true;
        for (const auto& p : pts) {
            if (logxy && (p.x <= 0.0 || p.y <= 0.0)) continue;
            std::snprintf(buf, sizeof(buf), "%s%.3f %.3f", first ? "M" : " L",
                          px(p.x), py(p.y));
            path += buf;
            first = false;
        }
        std::snprintf(buf, sizeof(buf),
                      "<path d=\"%s\" fill=\"none\" stroke=\"%s\" "
                      "stroke-width=\"1.5\"/>\n",
                      path.c_str(), color);
        svg += buf;
        for (const auto& p : pts) {
            if (logxy && (p.x <= 0.0 || p.y <= 0.0)) continue;
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"2.5\" "
                          "fill=\"%s\"/>\n",
                          px(p.x), py(p.y), color);
            svg += buf;
        }
        // legend
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%g\" y=\"%g\" width=\"12\" height=\"12\" "
                      "fill=\"%s\"/><text x=\"%g\" y=\"%g\" "
                      "font-size=\"12\">%s</text>\n",
                      W - mr - 180.0, mt + 18.0 * idx, color,
                      W - mr - 163.0, mt + 18.0 * idx + 10.0, name.c_str());
        svg += buf;
        ++idx;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace rie
