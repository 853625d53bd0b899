#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "urbansense/analysis.hpp"
#include "urbansense/scenario.hpp"
#include "urbansense/sim.hpp"

namespace urbansense {

// Expectation evaluation over run artifacts. Each named check reports
// pass/fail plus the measured value it judged.

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline int local_tod_min(std::int64_t timestamp_s, int tz_offset_min) {
    std::int64_t m = timestamp_s / 60 + tz_offset_min;
    return static_cast<int>(((m % 1440) + 1440) % 1440);
}

inline bool tod_in_window(int tod, std::pair<int, int> w) {
    if (w.first <= w.second) return tod >= w.first && tod < w.second;
    return tod >= w.first || tod < w.second;  // wraps midnight
}

inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

inline CheckOutcome evaluate_check(const Expectation& e, const Scenario& sc,
                                   const RunResult& run) {
    using detail::fmt;
    CheckOutcome out{e.name, false, ""};
    const auto fail = [&](const std::string& d) {
        out.pass = false;
        out.detail = d;
        return out;
    };
    const auto ok = [&](const std::string& d) {
        out.pass = true;
        out.detail = d;
        return out;
    };

    auto readings_in_window = [&](const std::string& device) {
        std::vector<Reading> rows = run.store.all_readings(device);
        std::vector<Reading> sel;
        for (const auto& r : rows) {
            if (e.window_local_min &&
                !detail::tod_in_window(detail::local_tod_min(r.timestamp_s, sc.timezone_offset_min),
                                       *e.window_local_min))
                continue;
            if (e.window_abs_min) {
                double abs_min = (r.timestamp_s - sc.start_epoch_s) / 60.0;
                if (abs_min < e.window_abs_min->first || abs_min >= e.window_abs_min->second)
                    continue;
            }
            sel.push_back(r);
        }
        return sel;
    };

    auto fit_k = [&](const std::string& device) {
        auto rows = readings_in_window(device);
        Series s = series_from_readings(device, rows);
        std::int64_t lo = std::numeric_limits<std::int64_t>::min();
        std::int64_t hi = std::numeric_limits<std::int64_t>::max();
        return cooling_fit(s, lo, hi, e.floor_c);
    };

    try {
        if (e.kind == "max_temp_below") {
            auto rows = readings_in_window(e.device);
            if (rows.empty()) return fail("no readings in window");
            double worst = std::numeric_limits<double>::lowest();
            for (const auto& r : rows) worst = std::max(worst, r.temp_c());
            out.pass = worst < e.value;
            out.detail = "max " + fmt(worst) + " vs bound " + fmt(e.value);
            return out;
        }
        if (e.kind == "min_temp_between") {
            auto rows = readings_in_window(e.device);
            if (rows.empty()) return fail("no readings in window");
            double best = std::numeric_limits<double>::max();
            for (const auto& r : rows) best = std::min(best, r.temp_c());
            out.pass = best >= e.lo && best <= e.hi;
            out.detail = "min " + fmt(best) + " vs [" + fmt(e.lo) + "," + fmt(e.hi) + "]";
            return out;
        }
        if (e.kind == "count_at_least") {
            std::size_t n = e.device.empty() ? run.store.reading_count()
                                             : run.store.all_readings(e.device).size();
            out.pass = static_cast<double>(n) >= e.value;
            out.detail = fmt(static_cast<double>(n)) + " readings vs floor " + fmt(e.value);
            return out;
        }
        if (e.kind == "lifetime_between_h") {
            auto it = run.nodes.find(e.device);
            if (it == run.nodes.end()) return fail("unknown device " + e.device);
            double hours = it->second.died_at_min >= 0.0 ? it->second.died_at_min / 60.0
                                                         : it->second.lifetime_estimate_h;
            out.pass = hours >= e.lo && hours <= e.hi;
            out.detail = "lifetime " + fmt(hours) + " h vs [" + fmt(e.lo) + "," + fmt(e.hi) + "]";
            return out;
        }
        if (e.kind == "k_order") {
            double ka = fit_k(e.device), kb = fit_k(e.device_b);
            out.pass = ka > kb;
            out.detail = "k(" + e.device + ")=" + fmt(ka) + " vs k(" + e.device_b + ")=" + fmt(kb);
            return out;
        }
        if (e.kind == "k_recover") {
            double k = fit_k(e.device);
            double rel = std::abs(k - e.expected_k) / e.expected_k * 100.0;
            out.pass = rel <= e.tol_pct;
            out.detail = "k_hat " + fmt(k) + " vs " + fmt(e.expected_k) + " (" + fmt(rel) + "%)";
            return out;
        }
        if (e.kind == "delivery_rate_between") {
            auto it = run.nodes.find(e.device);
            if (it == run.nodes.end()) return fail("unknown device " + e.device);
            if (it->second.frames_emitted == 0) return fail("no frames emitted");
            double rate = static_cast<double>(it->second.stored) /
                          static_cast<double>(it->second.frames_emitted);
            out.pass = rate >= e.lo && rate <= e.hi;
            out.detail = "rate " + fmt(rate) + " vs [" + fmt(e.lo) + "," + fmt(e.hi) + "]";
            return out;
        }
        if (e.kind == "skips_within_window") {
            auto it = run.nodes.find(e.device);
            if (it == run.nodes.end()) return fail("unknown device " + e.device);
            const auto& skips = it->second.skip_times_min;
            if (skips.empty()) return fail("no overheat skips recorded");
            if (!e.window_local_min) return fail("check needs window_local");
            int start_tod = sc.start_local_tod_min();
            std::size_t inside = 0;
            for (double s : skips) {
                int tod = (start_tod + static_cast<int>(s)) % 1440;
                if (detail::tod_in_window(tod, *e.window_local_min)) ++inside;
            }
            out.pass = inside == skips.size();
            out.detail = fmt(static_cast<double>(inside)) + "/" +
                         fmt(static_cast<double>(skips.size())) + " skips inside window";
            return out;
        }
        if (e.kind == "zero_skips") {
            auto it = run.nodes.find(e.device);
            if (it == run.nodes.end()) return fail("unknown device " + e.device);
            out.pass = it->second.skip_times_min.empty();
            out.detail = fmt(static_cast<double>(it->second.skip_times_min.size())) + " skips";
            return out;
        }
        return fail("unknown check kind '" + e.kind + "'");
    } catch (const std::exception& ex) {
        return fail(std::string("error: ") + ex.what());
    }
}

inline std::vector<CheckOutcome> evaluate_all(const Scenario& sc, const RunResult& run) {
    std::vector<CheckOutcome> out;
    for (const auto& e : sc.expectations) out.push_back(evaluate_check(e, sc, run));
    return out;
}

}  // namespace urbansense
