#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "urbansense/sim.hpp"
#include "urbansense/verify.hpp"

using namespace urbansense;

namespace {

// 2-node, 2-gateway plan with mild shadowing; small enough to run many times
std::string base_text(double sigma = 1.5, bool with_theft = false) {
    std::string s = R"(
[scenario]
name = sim_test
start_utc = 2021-01-26T10:30:00Z
timezone_offset_min = 480
duration_h = 6
seed = 5

[forcing]
knot = 00:00 15.0
knot = 05:00 15.0
knot = 14:00 36.0
knot = 20:30 15.0

[material]
name = grass
k_cool_per_h = 0.5
solar_gain_c = 4

[gateway]
id = 216

[gateway]
id = 105

[radio]
spreading_factor = 9

[path]
mode = OBSTRUCTED
exponent = 3.9
shadowing_sigma_db = )" + std::to_string(sigma) +
                    R"(

[node]
device = n1
dev_eui = 0xA1
project = p
material = grass
surface_temp0_c = 28
distance = 105 420
distance = 216 480

[node]
device = n2
dev_eui = 0xA2
project = p
material = grass
surface_temp0_c = 28
distance = 105 430
distance = 216 470
)";
    if (with_theft) s += "\n[event]\nat_min = 120\nnode = n2\nkind = loss\n";
    return s;
}

Scenario parse_str(const std::string& text) {
    std::istringstream is(text);
    return parse_scenario_text(is);
}

std::string store_dump(const Store& s) { return s.to_json().dump(); }

}  // namespace

TEST_CASE("identical seeds give byte-identical artifacts") {
    auto sc = parse_str(base_text());
    auto a = run_scenario(sc);
    auto b = run_scenario(sc);
    CHECK(store_dump(a.store) == store_dump(b.store));
    CHECK(a.trace == b.trace);
    CHECK(a.accounting.to_json() == b.accounting.to_json());
}

TEST_CASE("different seeds change radio outcomes") {
    auto sc = parse_str(base_text());
    auto a = run_scenario(sc);
    sc.seed = 6;
    auto b = run_scenario(sc);
    CHECK(a.trace != b.trace);
}

TEST_CASE("zero duration yields empty artifacts") {
    auto sc = parse_str(base_text());
    sc.duration_h = 0.0;
    auto r = run_scenario(sc);
    CHECK(r.store.reading_count() == 0);
    CHECK(r.trace.empty());
    CHECK(r.accounting.frames_emitted == 0);
    CHECK(r.accounting.conserved());
}

TEST_CASE("accounting conservation holds for a lossy run") {
    auto sc = parse_str(base_text(3.0));
    auto r = run_scenario(sc);
    CHECK(r.accounting.frames_emitted > 0);
    CHECK(r.accounting.dropped_radio > 0);
    CHECK(r.accounting.conserved());
}

TEST_CASE("emitted counters are strictly increasing per node") {
    auto sc = parse_str(base_text(0.0));
    auto r = run_scenario(sc);
    std::map<std::uint64_t, std::int64_t> last;
    for (const auto& line : r.trace) {
        auto hex = line.substr(line.rfind(' ') + 1);
        auto bytes = from_hex(hex);
        REQUIRE(bytes.has_value());
        auto f = decode_frame(*bytes);
        REQUIRE(f.has_value());
        auto it = last.find(f->dev_eui);
        if (it != last.end()) CHECK(static_cast<std::int64_t>(f->counter) >= it->second);
        last[f->dev_eui] = f->counter;
    }
    CHECK(last.size() == 2);
}

TEST_CASE("lossless run stores one row per emitted frame") {
    auto sc = parse_str(base_text(0.0));
    // short distances make the budget comfortable
    for (auto& n : sc.nodes)
        for (auto& [gw, d] : n.config.distance_to_gateway_m) d = 100.0;
    auto r = run_scenario(sc);
    CHECK(r.accounting.dropped_radio == 0);
    CHECK(r.accounting.stored == r.accounting.frames_emitted);
    // both gateways hear everything, so every frame folds one duplicate
    CHECK(r.accounting.dedup_folded == r.accounting.frames_emitted);
    CHECK(r.accounting.conserved());
}

TEST_CASE("a foreign node is counted as ignored, not stored") {
    auto text = base_text(0.0);
    text += R"(
[node]
device = foreign
dev_eui = 0xFF
project = other
material = grass
registered = false
distance = 105 100
distance = 216 100
)";
    auto sc = parse_str(text);
    for (auto& n : sc.nodes)
        for (auto& [gw, d] : n.config.distance_to_gateway_m) d = 100.0;
    auto r = run_scenario(sc);
    CHECK(r.accounting.ignored == 180);  // 6 h at 2-min interval
    CHECK(r.accounting.conserved());
    CHECK(r.store.reading_count() == r.accounting.stored);
}

TEST_CASE("theft stops a node's series without touching its neighbor") {
    auto clean = run_scenario(parse_str(base_text(1.5, false)));
    auto theft = run_scenario(parse_str(base_text(1.5, true)));
    // surviving node unaffected, bit for bit
    CHECK(clean.store.all_readings("n1") == theft.store.all_readings("n1"));
    // stolen node has nothing at or after the loss minute
    auto sc = parse_str(base_text());
    std::int64_t cutoff = sc.start_epoch_s + 120 * 60;
    for (const auto& r : theft.store.all_readings("n2")) CHECK(r.timestamp_s < cutoff);
    CHECK_FALSE(theft.store.all_readings("n2").empty());
    CHECK(theft.nodes.at("n2").status == NodeStatus::LOST);
}

TEST_CASE("immediate theft leaves zero readings") {
    auto text = base_text(0.0, false);
    text += "\n[event]\nat_min = 0\nnode = n2\nkind = loss\n";
    auto sc = parse_str(text);
    auto r = run_scenario(sc);
    CHECK(r.store.all_readings("n2").empty());
}

TEST_CASE("two gateways never deliver less than either alone") {
    auto both = parse_str(base_text(2.0));
    auto r_both = run_scenario(both);
    for (const char* keep : {"105", "216"}) {
        auto solo = parse_str(base_text(2.0));
        std::erase_if(solo.gateways, [&](const GatewayConfig& g) { return g.id != keep; });
        auto r_solo = run_scenario(solo);
        CHECK(r_both.accounting.stored >= r_solo.accounting.stored);
    }
}

TEST_CASE("trace replays to the same stored readings") {
    auto sc = parse_str(base_text(1.5));
    auto r = run_scenario(sc);
    DeviceRegistry registry;
    Store tmpl;
    bootstrap_store(sc, tmpl, registry);
    auto replayed = replay_trace(r.trace, registry, sc.start_epoch_s, tmpl, sc.dedup_window_ms);
    CHECK(store_dump(replayed.store) == store_dump(r.store));
    CHECK(replayed.accounting.stored == r.accounting.stored);
    CHECK(replayed.accounting.dedup_folded == r.accounting.dedup_folded);
}

TEST_CASE("expectation checks evaluate against a run") {
    auto text = base_text(0.0);
    text += R"(
[expect]
name = impossible
check = max_temp_below
device = n1
window_local = 19:00-20:00
value = -1000

[expect]
name = some_data
check = count_at_least
value = 10
)";
    auto sc = parse_str(text);
    auto r = run_scenario(sc);
    auto checks = evaluate_all(sc, r);
    REQUIRE(checks.size() == 2);
    CHECK_FALSE(checks[0].pass);
    CHECK(checks[0].detail.find("max") != std::string::npos);
    CHECK(checks[1].pass);
}
