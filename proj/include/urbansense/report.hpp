#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "urbansense/analysis.hpp"

namespace urbansense {

// Report artifacts: one SVG line plot per case study plus a per-device
// summary CSV.

struct SummaryRow {
    std::string device_id;
    std::size_t readings = 0;
    std::size_t losses = 0;  // frames lost to radio or overheat
    std::optional<double> k_hat_per_h;
    double battery_consumed_mah = 0.0;
    double lifetime_projection_h = 0.0;
};

inline void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw AnalysisError("cannot write " + path);
    f << "device_id,readings,losses,k_hat_per_h,battery_consumed_mah,lifetime_projection_h\n";
    char buf[96];
    for (const auto& r : rows) {
        if (r.k_hat_per_h)
            std::snprintf(buf, sizeof(buf), "%.4f", *r.k_hat_per_h);
        else
            std::snprintf(buf, sizeof(buf), "n/a");
        f << r.device_id << ',' << r.readings << ',' << r.losses << ',' << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.2f,%.1f", r.battery_consumed_mah,
                      r.lifetime_projection_h);
        f << buf << '\n';
    }
}

namespace detail {
inline std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}
}  // namespace detail

// Minimal time-vs-temperature SVG: one polyline per device, optional dashed
// weather overlay, labels in the top-left corner.
inline void write_svg_plot(const std::string& path, const std::vector<Series>& series,
                           const WeatherSeries* weather = nullptr) {
    const int width = 960, height = 480, margin = 50;
    double t0 = std::numeric_limits<double>::max(), t1 = std::numeric_limits<double>::lowest();
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    auto grow = [&](double t, double v) {
        t0 = std::min(t0, t);
        t1 = std::max(t1, t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    for (const auto& s : series)
        for (const auto& p : s.points) grow(static_cast<double>(p.timestamp_s), p.temp_c);
    if (weather)
        for (const auto& p : weather->points) grow(static_cast<double>(p.timestamp_s), p.dry_bulb_c);
    if (t0 >= t1 || lo > hi) throw AnalysisError("svg plot: nothing to draw");
    if (hi - lo < 1.0) hi = lo + 1.0;

    auto sx = [&](double t) {
        return margin + (t - t0) / (t1 - t0) * (width - 2 * margin);
    };
    auto sy = [&](double v) {
        return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin);
    };

    static const char* palette[] = {"#1b6ca8", "#d9534f", "#3a9d5d", "#8e5ba6",
                                    "#c98a2b", "#4a4a4a"};
    std::ofstream f(path, std::ios::binary);
    if (!f) throw AnalysisError("cannot write " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
      << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"#999\"/>\n";
    // y-axis labels
    for (int i = 0; i <= 4; ++i) {
        double v = lo + (hi - lo) * i / 4.0;
        f << "<text x=\"6\" y=\"" << detail::fmt1(sy(v) + 4) << "\" font-size=\"12\">"
          << detail::fmt1(v) << "</text>\n";
    }
    int color = 0, label_y = margin + 16;
    auto draw = [&](const std::string& name, const std::vector<std::pair<double, double>>& pts,
                    bool dashed) {
        const char* c = palette[color++ % 6];
        f << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\"";
        if (dashed) f << " stroke-dasharray=\"6 4\"";
        f << " points=\"";
        for (const auto& [t, v] : pts) f << detail::fmt1(sx(t)) << ',' << detail::fmt1(sy(v)) << ' ';
        f << "\"/>\n";
        f << "<text x=\"" << margin + 8 << "\" y=\"" << label_y << "\" font-size=\"13\" fill=\""
          << c << "\">" << name << "</text>\n";
        label_y += 16;
    };
    for (const auto& s : series) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : s.points)
            pts.emplace_back(static_cast<double>(p.timestamp_s), p.temp_c);
        draw(s.device_id, pts, false);
    }
    if (weather) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : weather->points)
            pts.emplace_back(static_cast<double>(p.timestamp_s), p.dry_bulb_c);
        draw("dry bulb", pts, true);
    }
    f << "</svg>\n";
}

}  // namespace urbansense
