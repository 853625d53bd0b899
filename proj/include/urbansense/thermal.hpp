#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace urbansense {

// Ground-truth forcing and surface thermal response. Surfaces relax toward
// an insolation-shifted dry-bulb target; the probe above the surface reads a
// blend of ambient air and surface excess.

constexpr double kMinutesPerDay = 1440.0;

struct AmbientForcing {
    // piecewise-linear dry bulb over the day; minute-of-day -> degC, sorted,
    // wraps across midnight
    std::vector<std::pair<double, double>> knots;
    double sunrise_min = 330.0;  // 05:30
    double sunset_min = 1170.0;  // 19:30
    double insolation_peak = 1.0;

    void validate() const {
        if (knots.size() < 2) throw std::invalid_argument("forcing: need >= 2 knots");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (knots[i].first <= knots[i - 1].first)
                throw std::invalid_argument("forcing: knots must be strictly increasing");
        if (knots.front().first < 0.0 || knots.back().first >= kMinutesPerDay)
            throw std::invalid_argument("forcing: knot times must be in [0,1440)");
        if (!(sunrise_min < sunset_min))
            throw std::invalid_argument("forcing: sunrise must precede sunset");
        if (insolation_peak < 0.0 || insolation_peak > 1.0)
            throw std::invalid_argument("forcing: insolation_peak outside [0,1]");
    }
};

struct MaterialThermalModel {
    std::string name;
    double k_cool_per_h = 0.5;   // relaxation rate, 1/h
    double solar_gain_c = 0.0;   // max excess over dry bulb under full sun
    double probe_coupling = 1.0; // fraction of surface excess the probe feels

    void validate() const {
        if (!(k_cool_per_h > 0.0)) throw std::invalid_argument("material: k_cool must be > 0");
        if (solar_gain_c < 0.0) throw std::invalid_argument("material: solar_gain must be >= 0");
        if (probe_coupling < 0.0 || probe_coupling > 1.0)
            throw std::invalid_argument("material: probe_coupling outside [0,1]");
    }
};

struct SurfaceState {
    double surface_temp_c = 20.0;
    double time_min = 0.0;  // absolute minutes since scenario start
};

inline double ambient_at(const AmbientForcing& f, double tod_min) {
    const auto& k = f.knots;
    if (tod_min < k.front().first || tod_min >= k.back().first) {
        // wrap segment: last knot -> first knot across midnight
        double span = kMinutesPerDay - k.back().first + k.front().first;
        double off = tod_min >= k.back().first ? tod_min - k.back().first
                                               : tod_min + kMinutesPerDay - k.back().first;
        return k.back().second + (k.front().second - k.back().second) * off / span;
    }
    auto it = std::upper_bound(k.begin(), k.end(), tod_min,
                               [](double t, const auto& p) { return t < p.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    double u = (tod_min - lo.first) / (hi.first - lo.first);
    return lo.second + (hi.second - lo.second) * u;
}

inline double insolation_at(const AmbientForcing& f, double tod_min) {
    if (tod_min <= f.sunrise_min || tod_min >= f.sunset_min) return 0.0;
    double u = (tod_min - f.sunrise_min) / (f.sunset_min - f.sunrise_min);
    return f.insolation_peak * std::sin(std::numbers::pi * u);
}

inline double surface_target(const MaterialThermalModel& m, const AmbientForcing& f,
                             double tod_min) {
    return ambient_at(f, tod_min) + m.solar_gain_c * insolation_at(f, tod_min);
}

// One explicit-Euler step of dT/dt = -k (T - target(t)).
inline SurfaceState step_surface(const MaterialThermalModel& m, const SurfaceState& s,
                                 const AmbientForcing& f, double tod_min, double dt_min) {
    if (!(dt_min > 0.0) || dt_min > 5.0)
        throw std::invalid_argument("step_surface: dt must be in (0, 5] minutes");
    double target = surface_target(m, f, tod_min);
    double dt_h = dt_min / 60.0;
    SurfaceState next;
    next.surface_temp_c = s.surface_temp_c - m.k_cool_per_h * (s.surface_temp_c - target) * dt_h;
    next.time_min = s.time_min + dt_min;
    return next;
}

inline double probe_reading(const MaterialThermalModel& m, const SurfaceState& s,
                            const AmbientForcing& f, double tod_min) {
    double ambient = ambient_at(f, tod_min);
    return ambient + m.probe_coupling * (s.surface_temp_c - ambient);
}

}  // namespace urbansense
