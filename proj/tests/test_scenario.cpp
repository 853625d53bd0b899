#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "urbansense/scenario.hpp"

using namespace urbansense;

namespace {

const char* kMinimal = R"(
[scenario]
name = minimal
start_utc = 2021-01-26T10:30:00Z
duration_h = 1

[forcing]
knot = 00:00 15.0
knot = 12:00 30.0

[material]
name = grass
k_cool_per_h = 0.5

[gateway]
id = 105

[node]
device = n1
dev_eui = 0xA1
project = p
material = grass
distance = 105 300
)";

Scenario parse_str(const std::string& text) {
    std::istringstream is(text);
    return parse_scenario_text(is);
}

}  // namespace

TEST_CASE("minimal scenario gets documented defaults") {
    auto sc = parse_str(kMinimal);
    CHECK(sc.name == "minimal");
    CHECK(sc.seed == 1);
    CHECK(sc.timezone_offset_min == 0);
    CHECK(sc.dedup_window_ms == 2000);
    CHECK(sc.radio.spreading_factor == 7);
    CHECK(sc.radio.tx_power_dbm == Catch::Approx(14.0));
    CHECK(sc.path.reference_loss_db == Catch::Approx(40.0));
    CHECK(sc.battery_template.capacity_mah == Catch::Approx(2500.0));
    CHECK(sc.battery_template.sleep_ma == Catch::Approx(11.0));
    CHECK(sc.overheat.threshold_c == Catch::Approx(40.0));
    CHECK(sc.overheat.p_skip == Catch::Approx(0.8));
    CHECK(sc.forcing.sunrise_min == 330.0);
    CHECK(sc.forcing.sunset_min == 1170.0);
    REQUIRE(sc.nodes.size() == 1);
    CHECK(sc.nodes[0].config.tx_interval_min == 2);
    CHECK(sc.nodes[0].config.enclosure_shaded);
    CHECK_FALSE(sc.nodes[0].config.antenna_raised);
    CHECK(sc.start_local_tod_min() == 10 * 60 + 30);  // tz offset defaults to 0
}

TEST_CASE("unknown material reference is a named validation error") {
    std::string bad = kMinimal;
    bad.replace(bad.find("material = grass"), 16, "material = lava!");
    try {
        parse_str(bad);
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("lava!") != std::string::npos);
        CHECK(std::string(e.what()).find("n1") != std::string::npos);
    }
}

TEST_CASE("parse errors carry line numbers") {
    std::string bad = kMinimal;
    bad.replace(bad.find("duration_h = 1"), 14, "duration_h = xx");
    try {
        parse_str(bad);
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
        CHECK(std::string(e.what()).find("duration_h") != std::string::npos);
    }
}

TEST_CASE("structural validation") {
    CHECK_THROWS_AS(parse_str("[forcing]\nknot = 00:00 15.0\nknot = 12:00 30.0\n"),
                    ScenarioError);
    std::string no_gateway = kMinimal;
    auto pos = no_gateway.find("[gateway]");
    no_gateway.erase(pos, no_gateway.find("[node]") - pos);
    CHECK_THROWS_AS(parse_str(no_gateway), ScenarioError);
    std::string dup_eui = kMinimal;
    dup_eui += R"(
[node]
device = n2
dev_eui = 0xA1
project = p
material = grass
distance = 105 100
)";
    CHECK_THROWS_AS(parse_str(dup_eui), ScenarioError);
    std::string no_distance = kMinimal;
    no_distance.erase(no_distance.find("distance = 105 300"), 18);
    CHECK_THROWS_AS(parse_str(no_distance), ScenarioError);
}

TEST_CASE("expectation windows parse") {
    std::string s = kMinimal;
    s += R"(
[expect]
name = w
check = max_temp_below
device = n1
window_local = 22:30-23:30
value = 20

[expect]
name = a
check = k_recover
device = n1
window_abs_min = 150-300
expected_k = 0.5
floor_c = 15
)";
    auto sc = parse_str(s);
    REQUIRE(sc.expectations.size() == 2);
    REQUIRE(sc.expectations[0].window_local_min.has_value());
    CHECK(sc.expectations[0].window_local_min->first == 22 * 60 + 30);
    CHECK(sc.expectations[0].window_local_min->second == 23 * 60 + 30);
    REQUIRE(sc.expectations[1].window_abs_min.has_value());
    CHECK(sc.expectations[1].window_abs_min->first == Catch::Approx(150.0));
    CHECK(sc.expectations[1].tol_pct == Catch::Approx(10.0));
}

TEST_CASE("bundled concrete_vs_grass fixture parses to the documented shape") {
    auto sc = parse_scenario(std::string(SCENARIO_DIR) + "/concrete_vs_grass.scn");
    CHECK(sc.nodes.size() == 2);
    CHECK(sc.materials.size() == 2);
    CHECK(sc.duration_h == Catch::Approx(14.0));
    CHECK(sc.gateways.size() == 2);
    CHECK(sc.materials.count("grass") == 1);
    CHECK(sc.materials.count("concrete") == 1);
    CHECK_FALSE(sc.expectations.empty());
}

TEST_CASE("all bundled fixtures parse") {
    for (const char* name : {"concrete_vs_grass", "playground_materials",
                             "redbrick_week_with_weather", "tin_vs_concrete"}) {
        auto sc = parse_scenario(std::string(SCENARIO_DIR) + "/" + name + ".scn");
        CHECK(sc.name == name);
    }
}
