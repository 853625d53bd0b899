#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "urbansense/thermal.hpp"

using namespace urbansense;

namespace {

AmbientForcing two_knot() {
    AmbientForcing f;
    f.knots = {{0.0, 15.0}, {720.0, 30.0}};
    return f;
}

AmbientForcing constant(double c) {
    AmbientForcing f;
    f.knots = {{0.0, c}, {720.0, c}};
    return f;
}

// brute-force piecewise-linear oracle: scan for the bracketing segment,
// independent of the binary-search implementation
double interp_oracle(const AmbientForcing& f, double t) {
    std::vector<std::pair<double, double>> pts = f.knots;
    pts.insert(pts.begin(), {f.knots.back().first - 1440.0, f.knots.back().second});
    pts.push_back({f.knots.front().first + 1440.0, f.knots.front().second});
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (t >= pts[i].first && t <= pts[i + 1].first) {
            double u = (t - pts[i].first) / (pts[i + 1].first - pts[i].first);
            return pts[i].second + u * (pts[i + 1].second - pts[i].second);
        }
    }
    FAIL("oracle: t out of range");
    return 0.0;
}

}  // namespace

TEST_CASE("ambient_at interpolates linearly") {
    auto f = two_knot();
    CHECK(ambient_at(f, 360.0) == Catch::Approx(22.5));
    CHECK(ambient_at(f, 0.0) == Catch::Approx(15.0));
}

TEST_CASE("ambient_at matches independent interpolation oracle") {
    AmbientForcing f;
    f.knots = {{0.0, 15.0}, {720.0, 30.0}, {1439.0, 15.0}};
    CHECK(ambient_at(f, 1080.0) == Catch::Approx(interp_oracle(f, 1080.0)));
    for (double t = 0.0; t < 1440.0; t += 7.3)
        CHECK(ambient_at(f, t) == Catch::Approx(interp_oracle(f, t)).margin(1e-9));
}

TEST_CASE("ambient_at wraps midnight") {
    AmbientForcing f;
    f.knots = {{300.0, 10.0}, {1200.0, 20.0}};
    // 1200 -> 300+1440: linear from 20 back to 10 over 540 minutes
    CHECK(ambient_at(f, 1380.0) == Catch::Approx(20.0 + (10.0 - 20.0) * 180.0 / 540.0));
    CHECK(ambient_at(f, 30.0) == Catch::Approx(20.0 + (10.0 - 20.0) * 270.0 / 540.0));
}

TEST_CASE("insolation is zero outside daylight and peaks at solar noon") {
    auto f = two_knot();
    CHECK(insolation_at(f, f.sunrise_min) == 0.0);
    CHECK(insolation_at(f, f.sunset_min) == 0.0);
    CHECK(insolation_at(f, 100.0) == 0.0);
    double noon = (f.sunrise_min + f.sunset_min) / 2.0;
    CHECK(insolation_at(f, noon) == Catch::Approx(1.0));
    double quarter = f.sunrise_min + 0.25 * (f.sunset_min - f.sunrise_min);
    CHECK(insolation_at(f, quarter) == Catch::Approx(std::sin(std::numbers::pi / 4.0)));
}

TEST_CASE("step_surface equilibrium is a fixed point") {
    auto f = constant(15.0);
    MaterialThermalModel m{"x", 0.5, 0.0, 1.0};
    SurfaceState s{15.0, 0.0};
    auto next = step_surface(m, s, f, 100.0, 1.0);
    CHECK(std::abs(next.surface_temp_c - 15.0) < 1e-9);
    CHECK(next.time_min == Catch::Approx(1.0));
}

TEST_CASE("step_surface rejects bad dt") {
    auto f = constant(15.0);
    MaterialThermalModel m{"x", 0.5, 0.0, 1.0};
    SurfaceState s{20.0, 0.0};
    CHECK_THROWS_AS(step_surface(m, s, f, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(step_surface(m, s, f, 0.0, 6.0), std::invalid_argument);
    CHECK_THROWS_AS(step_surface(m, s, f, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("stepped cooling matches the closed-form exponential") {
    auto f = constant(15.0);
    MaterialThermalModel m{"x", 0.5, 0.0, 1.0};
    SurfaceState s{28.0, 0.0};
    for (int i = 0; i < 240; ++i) s = step_surface(m, s, f, 0.0, 1.0);
    double expected = 15.0 + 13.0 * std::exp(-2.0);
    CHECK(std::abs(s.surface_temp_c - expected) < 0.1);
}

TEST_CASE("integration error matches first-order Euler theory over 12 h") {
    auto f = constant(10.0);
    MaterialThermalModel m{"x", 0.8, 0.0, 1.0};
    auto excess_after_12h = [&](double dt_min) {
        SurfaceState s{35.0, 0.0};
        for (double t = 0.0; t < 720.0 - 1e-9; t += dt_min) s = step_surface(m, s, f, 0.0, dt_min);
        return s.surface_temp_c - 10.0;
    };
    double exact = 25.0 * std::exp(-0.8 * 12.0);
    double err1 = std::abs(excess_after_12h(1.0) - exact) / exact;
    double err05 = std::abs(excess_after_12h(0.5) - exact) / exact;
    // explicit Euler: relative drift <= 1 - exp(-k^2 * dt_h * t_h / 2)
    double bound1 = 1.0 - std::exp(-0.8 * 0.8 * (1.0 / 60.0) * 12.0 / 2.0);
    CHECK(err1 < bound1 * 1.05);
    // halving dt halves the error (first-order convergence)
    CHECK(err1 / err05 == Catch::Approx(2.0).margin(0.25));
}

TEST_CASE("relaxation toward a constant target is monotone") {
    auto f = constant(18.0);
    MaterialThermalModel m{"x", 1.2, 0.0, 1.0};
    SurfaceState s{40.0, 0.0};
    double prev_gap = std::abs(s.surface_temp_c - 18.0);
    for (int i = 0; i < 600; ++i) {
        s = step_surface(m, s, f, 0.0, 1.0);
        double gap = std::abs(s.surface_temp_c - 18.0);
        CHECK(gap <= prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("faster-cooling material is never warmer at night") {
    AmbientForcing f;
    f.knots = {{0.0, 16.0}, {720.0, 15.0}};
    f.sunrise_min = 330.0;
    f.sunset_min = 1170.0;
    MaterialThermalModel fast{"fast", 1.0, 0.0, 1.0};
    MaterialThermalModel slow{"slow", 0.1, 0.0, 1.0};
    SurfaceState a{30.0, 0.0}, b{30.0, 0.0};
    for (int i = 0; i < 300; ++i) {
        double tod = 1200.0 + i;  // night, no insolation
        while (tod >= 1440.0) tod -= 1440.0;
        a = step_surface(fast, a, f, tod, 1.0);
        b = step_surface(slow, b, f, tod, 1.0);
        CHECK(a.surface_temp_c <= b.surface_temp_c + 1e-12);
    }
}

TEST_CASE("probe_reading blends ambient and surface") {
    auto f = constant(20.0);
    SurfaceState s{30.0, 0.0};
    CHECK(probe_reading({"x", 0.5, 0.0, 0.0}, s, f, 0.0) == Catch::Approx(20.0));
    CHECK(probe_reading({"x", 0.5, 0.0, 1.0}, s, f, 0.0) == Catch::Approx(30.0));
    CHECK(probe_reading({"x", 0.5, 0.0, 0.6}, s, f, 0.0) == Catch::Approx(26.0));
}

TEST_CASE("forcing validation") {
    AmbientForcing f;
    f.knots = {{0.0, 15.0}};
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    f = two_knot();
    f.sunrise_min = 1200.0;
    f.sunset_min = 600.0;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    f = two_knot();
    f.insolation_peak = 1.5;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}
