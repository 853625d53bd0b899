#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "urbansense/analysis.hpp"

using namespace urbansense;

namespace {

Series flat_series(int n, double temp = 20.0, std::int64_t t0 = 0, int step_s = 120) {
    Series s;
    s.device_id = "dev";
    for (int i = 0; i < n; ++i) s.points.push_back({t0 + i * step_s, temp, 100, 0});
    return s;
}

Series exponential_series(double k_per_h, double floor_c, double excess0, int n,
                          int step_s = 120) {
    Series s;
    s.device_id = "dev";
    for (int i = 0; i < n; ++i) {
        double h = i * step_s / 3600.0;
        s.points.push_back({static_cast<std::int64_t>(i) * step_s,
                            floor_c + excess0 * std::exp(-k_per_h * h), 0, 0});
    }
    return s;
}

}  // namespace

TEST_CASE("filter passes clean data untouched") {
    auto s = flat_series(50);
    auto res = filter_gross(s, -10.0, 60.0, 5.0);
    CHECK(res.rejected == 0);
    CHECK(res.clean.points.size() == 50);
}

TEST_CASE("filter removes a lone spike and keeps its neighbors") {
    auto s = flat_series(20);
    s.points[10].temp_c = 999.0;
    auto res = filter_gross(s, -10.0, 60.0, 5.0);
    CHECK(res.rejected == 1);
    CHECK(res.clean.points.size() == 19);
    for (const auto& p : res.clean.points) CHECK(p.temp_c == Catch::Approx(20.0));
}

TEST_CASE("filter drops jump discontinuities and flagged lux errors") {
    auto s = flat_series(20);
    s.points[5].temp_c = 45.0;  // 25 degC in 2 min > 5 degC/min
    s.points[12].flags = kFlagLuxGrossError;
    auto res = filter_gross(s, -10.0, 60.0, 5.0);
    CHECK(res.rejected == 2);
}

TEST_CASE("filter rejected count matches injected gross errors") {
    auto s = flat_series(200);
    int injected = 0;
    for (int i = 20; i < 200; i += 17) {
        s.points[i].flags = kFlagLuxGrossError;
        ++injected;
    }
    auto res = filter_gross(s, -10.0, 60.0, 5.0);
    CHECK(static_cast<int>(res.rejected) == injected);
}

TEST_CASE("filter is idempotent") {
    auto s = flat_series(60);
    s.points[7].temp_c = -40.0;
    s.points[30].flags = kFlagLuxGrossError;
    auto once = filter_gross(s, -10.0, 60.0, 5.0);
    auto twice = filter_gross(once.clean, -10.0, 60.0, 5.0);
    CHECK(twice.rejected == 0);
    CHECK(twice.clean.points.size() == once.clean.points.size());
}

TEST_CASE("slice_period is a half-open restriction") {
    auto s = flat_series(30, 20.0, 1000, 60);
    CHECK(slice_period(s, 500, 500).points.empty());
    CHECK(slice_period(s, 0, 100000).points.size() == 30);
    auto w = slice_period(s, 1000, 1060);
    REQUIRE(w.points.size() == 1);
    CHECK(w.points[0].timestamp_s == 1000);
}

TEST_CASE("slices compose by window intersection") {
    auto s = flat_series(100, 20.0, 0, 60);
    auto a = slice_period(slice_period(s, 600, 4000), 1200, 3000);
    auto b = slice_period(s, 1200, 3000);
    CHECK(a.points.size() == b.points.size());
}

TEST_CASE("an 18:30-22:30 window on a 2-min series holds exactly 120 points") {
    auto s = flat_series(1000, 20.0, 0, 120);
    auto w = slice_period(s, 0, 4 * 3600);
    CHECK(w.points.size() == 120);
}

TEST_CASE("cooling_fit recovers an exact exponential") {
    auto s = exponential_series(0.5, 15.0, 13.0, 120);
    double k = cooling_fit(s, 0, 1LL << 40, 15.0);
    CHECK(k == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("cooling_fit error paths") {
    auto s = exponential_series(0.5, 15.0, 13.0, 5);
    CHECK_THROWS_AS(cooling_fit(s, 0, 1LL << 40, 15.0), AnalysisError);
    auto cold = flat_series(20, 14.0);
    CHECK_THROWS_AS(cooling_fit(cold, 0, 1LL << 40, 15.0), AnalysisError);
}

TEST_CASE("merge pairs identical timestamps exactly") {
    auto s = flat_series(10, 21.0, 0, 1800);
    WeatherSeries w;
    w.cadence_min = 30;
    for (int i = 0; i < 10; ++i) w.points.push_back({i * 1800, 15.0 + i});
    auto pairs = merge_external(s, w);
    REQUIRE(pairs.size() == 10);
    for (int i = 0; i < 10; ++i) {
        CHECK(pairs[i].sensor.timestamp_s == pairs[i].weather.timestamp_s);
        CHECK(pairs[i].weather.dry_bulb_c == Catch::Approx(15.0 + i));
    }
}

TEST_CASE("merge never pairs beyond half the cadence") {
    auto s = flat_series(90, 21.0, 0, 120);  // 3 h of 2-min data
    WeatherSeries w;
    w.cadence_min = 30;
    w.points.push_back({5400, 18.0});  // single station point at 1.5 h
    auto pairs = merge_external(s, w);
    CHECK(pairs.size() <= 15);
    for (const auto& p : pairs)
        CHECK(std::llabs(p.sensor.timestamp_s - p.weather.timestamp_s) <= 900);
}

TEST_CASE("merge raises on disjoint ranges") {
    auto s = flat_series(10, 20.0, 0, 60);
    WeatherSeries w;
    w.cadence_min = 30;
    w.points.push_back({100000, 15.0});
    CHECK_THROWS_AS(merge_external(s, w), AnalysisError);
}
