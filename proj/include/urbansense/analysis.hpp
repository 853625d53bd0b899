#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urbansense/frame.hpp"
#include "urbansense/store.hpp"
#include "urbansense/time_util.hpp"

namespace urbansense {

// Post-run analysis: gross-error filtering, period slicing, cooling-rate
// fits, weather-station alignment.

struct SeriesPoint {
    std::int64_t timestamp_s = 0;
    double temp_c = 0.0;
    std::uint16_t lux = 0;
    std::uint8_t flags = 0;
};

struct Series {
    std::string device_id;
    std::vector<SeriesPoint> points;  // strictly increasing timestamps
};

inline Series series_from_readings(const std::string& device_id,
                                   const std::vector<Reading>& rows) {
    Series s;
    s.device_id = device_id;
    for (const auto& r : rows) s.points.push_back({r.timestamp_s, r.temp_c(), r.lux, r.flags});
    return s;
}

struct WeatherPoint {
    std::int64_t timestamp_s = 0;
    double dry_bulb_c = 0.0;
};

struct WeatherSeries {
    std::string station_name;
    int cadence_min = 30;
    std::vector<WeatherPoint> points;
};

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FilterResult {
    Series clean;
    std::size_t rejected = 0;
};

// Drops out-of-range points, jump discontinuities, and flagged lux errors.
inline FilterResult filter_gross(const Series& s, double min_c, double max_c,
                                 double max_jump_c_per_min) {
    if (!(min_c < max_c) || !(max_jump_c_per_min > 0.0))
        throw std::invalid_argument("filter_gross: bad thresholds");
    FilterResult out;
    out.clean.device_id = s.device_id;
    const SeriesPoint* prev_kept = nullptr;
    for (const auto& p : s.points) {
        bool bad = p.temp_c < min_c || p.temp_c > max_c || (p.flags & kFlagLuxGrossError);
        if (!bad && prev_kept) {
            double dt_min = (p.timestamp_s - prev_kept->timestamp_s) / 60.0;
            if (dt_min > 0.0 && std::abs(p.temp_c - prev_kept->temp_c) / dt_min > max_jump_c_per_min)
                bad = true;
        }
        if (bad) {
            ++out.rejected;
        } else {
            out.clean.points.push_back(p);
            prev_kept = &out.clean.points.back();
        }
    }
    return out;
}

// half-open [t0, t1)
inline Series slice_period(const Series& s, std::int64_t t0_s, std::int64_t t1_s) {
    if (t0_s > t1_s) throw std::invalid_argument("slice_period: t0 > t1");
    Series out;
    out.device_id = s.device_id;
    for (const auto& p : s.points)
        if (p.timestamp_s >= t0_s && p.timestamp_s < t1_s) out.points.push_back(p);
    return out;
}

// Least-squares slope of ln(T - floor) against time; k_hat = -slope in 1/h.
inline double cooling_fit(const Series& s, std::int64_t t0_s, std::int64_t t1_s,
                          double ambient_floor_c) {
    Series w = slice_period(s, t0_s, t1_s);
    if (w.points.size() < 10) throw AnalysisError("cooling_fit: fewer than 10 points in window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double t_ref = static_cast<double>(w.points.front().timestamp_s);
    for (const auto& p : w.points) {
        double excess = p.temp_c - ambient_floor_c;
        if (excess <= 0.0)
            throw AnalysisError("cooling_fit: temperature at or below the ambient floor");
        double x = (static_cast<double>(p.timestamp_s) - t_ref) / 3600.0;
        double y = std::log(excess);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(w.points.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

struct AlignedPair {
    SeriesPoint sensor;
    WeatherPoint weather;
};

// Nearest-in-time pairing within half the weather cadence.
inline std::vector<AlignedPair> merge_external(const Series& s, const WeatherSeries& w) {
    if (s.points.empty() || w.points.empty())
        throw AnalysisError("merge_external: empty input series");
    if (s.points.back().timestamp_s < w.points.front().timestamp_s ||
        w.points.back().timestamp_s < s.points.front().timestamp_s)
        throw AnalysisError("merge_external: time ranges do not overlap");
    const std::int64_t max_gap_s = w.cadence_min * 60 / 2;
    std::vector<AlignedPair> out;
    std::size_t j = 0;
    for (const auto& p : s.points) {
        while (j + 1 < w.points.size() &&
               std::llabs(w.points[j + 1].timestamp_s - p.timestamp_s) <=
                   std::llabs(w.points[j].timestamp_s - p.timestamp_s))
            ++j;
        if (std::llabs(w.points[j].timestamp_s - p.timestamp_s) <= max_gap_s)
            out.push_back({p, w.points[j]});
    }
    return out;
}

// Weather CSV: header "timestamp,dry_bulb_c", ISO-8601 UTC rows.
inline WeatherSeries load_weather_csv(const std::string& path, int cadence_min = 30) {
    std::ifstream f(path);
    if (!f) throw AnalysisError("cannot read weather file " + path);
    std::string line;
    if (!std::getline(f, line) || line != "timestamp,dry_bulb_c")
        throw AnalysisError("weather csv: bad header in " + path);
    WeatherSeries w;
    w.station_name = path;
    w.cadence_min = cadence_min;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw AnalysisError("weather csv: bad row: " + line);
        auto ts = parse_iso8601(line.substr(0, comma));
        if (!ts) throw AnalysisError("weather csv: bad timestamp: " + line);
        w.points.push_back({*ts, std::stod(line.substr(comma + 1))});
    }
    return w;
}

}  // namespace urbansense
