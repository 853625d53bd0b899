#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urbansense/backhaul.hpp"
#include "urbansense/link.hpp"
#include "urbansense/node.hpp"
#include "urbansense/thermal.hpp"
#include "urbansense/time_util.hpp"

namespace urbansense {

// Deployment plan file: sectioned key-value text. "[section]" opens a block,
// "key = value" inside it; sections like [material], [gateway], [node],
// [event] and [expect] may repeat. "#" starts a comment. The full grammar is
// documented in the README.

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LossEvent {
    double at_min = 0.0;
    std::string device_id;
};

struct Expectation {
    std::string name;
    std::string kind;
    std::string device;
    std::string device_b;
    // local time-of-day window, applied on every day of the run
    std::optional<std::pair<int, int>> window_local_min;
    // absolute elapsed-minute window, for single-night fits
    std::optional<std::pair<double, double>> window_abs_min;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double floor_c = 0.0;
    double expected_k = 0.0;
    double tol_pct = 10.0;
};

struct NodeSpec {
    NodeConfig config;
    std::string project_id;
    double surface_temp0_c = 20.0;
};

struct Scenario {
    std::string name;
    std::int64_t start_epoch_s = 0;
    int timezone_offset_min = 0;
    double duration_h = 0.0;
    std::uint64_t seed = 1;
    std::string weather_csv;  // optional, resolved relative to the scenario file
    int weather_cadence_min = 30;
    std::int64_t dedup_window_ms = 2000;

    AmbientForcing forcing;
    std::map<std::string, MaterialThermalModel> materials;
    std::vector<GatewayConfig> gateways;
    RadioParams radio;
    PathEnvironment path;
    BatteryState battery_template;
    OverheatModel overheat;
    std::vector<NodeSpec> nodes;
    std::vector<LossEvent> events;
    std::vector<Expectation> expectations;

    double duration_min() const { return duration_h * 60.0; }

    int start_local_tod_min() const {
        std::int64_t m = start_epoch_s / 60 + timezone_offset_min;
        return static_cast<int>(((m % 1440) + 1440) % 1440);
    }
};

namespace detail {

struct Section {
    std::string kind;
    int line = 0;
    std::vector<std::tuple<std::string, std::string, int>> entries;  // key, value, line

    const std::string* find(const std::string& key) const {
        for (auto& [k, v, l] : entries)
            if (k == key) return &v;
        return nullptr;
    }
};

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline ScenarioError err(int line, const std::string& msg) {
    return ScenarioError("line " + std::to_string(line) + ": " + msg);
}

class SectionReader {
public:
    SectionReader(const Section& sec) : sec_(sec) {}

    std::string str(const std::string& key, std::optional<std::string> def = {}) {
        if (auto* v = sec_.find(key)) return *v;
        if (def) return *def;
        throw err(sec_.line, "[" + sec_.kind + "] missing required key '" + key + "'");
    }

    double num(const std::string& key, std::optional<double> def = {}) {
        if (auto* v = sec_.find(key)) {
            try {
                std::size_t pos;
                double d = std::stod(*v, &pos);
                if (pos != v->size()) throw std::invalid_argument("");
                return d;
            } catch (...) {
                throw err(sec_.line, "[" + sec_.kind + "] key '" + key + "': not a number: " + *v);
            }
        }
        if (def) return *def;
        throw err(sec_.line, "[" + sec_.kind + "] missing required key '" + key + "'");
    }

    bool flag(const std::string& key, std::optional<bool> def = {}) {
        if (auto* v = sec_.find(key)) {
            if (*v == "true" || *v == "yes" || *v == "1") return true;
            if (*v == "false" || *v == "no" || *v == "0") return false;
            throw err(sec_.line, "[" + sec_.kind + "] key '" + key + "': expected boolean, got " + *v);
        }
        if (def) return *def;
        throw err(sec_.line, "[" + sec_.kind + "] missing required key '" + key + "'");
    }

    const Section& sec() { return sec_; }

private:
    const Section& sec_;
};

}  // namespace detail

inline Scenario parse_scenario_text(std::istream& in) {
    using detail::Section;
    using detail::err;
    using detail::trim;

    std::vector<Section> sections;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw err(lineno, "unterminated section header");
            sections.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw err(lineno, "expected 'key = value'");
        if (sections.empty()) throw err(lineno, "entry before any [section]");
        sections.back().entries.emplace_back(trim(line.substr(0, eq)),
                                             trim(line.substr(eq + 1)), lineno);
    }

    Scenario sc;
    bool have_scenario = false, have_forcing = false;

    for (const auto& sec : sections) {
        detail::SectionReader r(sec);
        if (sec.kind == "scenario") {
            have_scenario = true;
            sc.name = r.str("name");
            auto epoch = parse_iso8601(r.str("start_utc"));
            if (!epoch) throw err(sec.line, "[scenario] start_utc: expected ISO-8601 UTC");
            sc.start_epoch_s = *epoch;
            sc.timezone_offset_min = static_cast<int>(r.num("timezone_offset_min", 0.0));
            sc.duration_h = r.num("duration_h");
            if (sc.duration_h < 0.0) throw err(sec.line, "[scenario] duration_h must be >= 0");
            sc.seed = static_cast<std::uint64_t>(r.num("seed", 1.0));
            sc.weather_csv = r.str("weather_csv", std::string{});
            sc.weather_cadence_min = static_cast<int>(r.num("weather_cadence_min", 30.0));
            sc.dedup_window_ms = static_cast<std::int64_t>(r.num("dedup_window_ms", 2000.0));
        } else if (sec.kind == "forcing") {
            have_forcing = true;
            for (const auto& [k, v, l] : sec.entries) {
                if (k != "knot") continue;
                std::istringstream ss(v);
                std::string hhmm;
                double temp;
                if (!(ss >> hhmm >> temp)) throw err(l, "knot: expected 'HH:MM temperature'");
                auto tod = parse_hhmm(hhmm);
                if (!tod) throw err(l, "knot: bad time of day: " + hhmm);
                sc.forcing.knots.emplace_back(static_cast<double>(*tod), temp);
            }
            auto rise = parse_hhmm(r.str("sunrise", std::string("05:30")));
            auto set = parse_hhmm(r.str("sunset", std::string("19:30")));
            if (!rise || !set) throw err(sec.line, "[forcing] bad sunrise/sunset");
            sc.forcing.sunrise_min = *rise;
            sc.forcing.sunset_min = *set;
            sc.forcing.insolation_peak = r.num("insolation_peak", 1.0);
        } else if (sec.kind == "material") {
            MaterialThermalModel m;
            m.name = r.str("name");
            m.k_cool_per_h = r.num("k_cool_per_h");
            m.solar_gain_c = r.num("solar_gain_c", 0.0);
            m.probe_coupling = r.num("probe_coupling", 1.0);
            try {
                m.validate();
            } catch (const std::exception& e) {
                throw err(sec.line, e.what());
            }
            sc.materials[m.name] = m;
        } else if (sec.kind == "gateway") {
            GatewayConfig g;
            g.id = r.str("id");
            g.name = r.str("name", g.id);
            g.x_m = r.num("x_m", 0.0);
            g.y_m = r.num("y_m", 0.0);
            for (const auto& other : sc.gateways)
                if (other.id == g.id) throw err(sec.line, "duplicate gateway id " + g.id);
            sc.gateways.push_back(g);
        } else if (sec.kind == "radio") {
            sc.radio.spreading_factor = static_cast<int>(r.num("spreading_factor", 7.0));
            sc.radio.bandwidth_hz = r.num("bandwidth_hz", 125000.0);
            sc.radio.coding_rate_index = static_cast<int>(r.num("coding_rate_index", 1.0));
            sc.radio.preamble_symbols = static_cast<int>(r.num("preamble_symbols", 8.0));
            sc.radio.explicit_header = r.flag("explicit_header", true);
            sc.radio.crc_on = r.flag("crc_on", true);
            sc.radio.tx_power_dbm = r.num("tx_power_dbm", 14.0);
            sc.radio.noise_floor_dbm = r.num("noise_floor_dbm", -117.0);
            for (const auto& [k, v, l] : sec.entries) {
                if (k != "sensitivity") continue;
                std::istringstream ss(v);
                int sf;
                double dbm;
                if (!(ss >> sf >> dbm)) throw err(l, "sensitivity: expected 'SF dBm'");
                sc.radio.sensitivity_dbm[sf] = dbm;
            }
        } else if (sec.kind == "path") {
            std::string mode = r.str("mode", std::string("LOS"));
            if (mode == "LOS")
                sc.path.mode = PathMode::LOS;
            else if (mode == "OBSTRUCTED")
                sc.path.mode = PathMode::OBSTRUCTED;
            else
                throw err(sec.line, "[path] mode must be LOS or OBSTRUCTED");
            sc.path.path_loss_exponent = r.num("exponent", 3.0);
            sc.path.reference_loss_db = r.num("reference_loss_db", 40.0);
            sc.path.shadowing_sigma_db = r.num("shadowing_sigma_db", 2.0);
            sc.path.antenna_bonus_db = r.num("antenna_bonus_db", 6.0);
        } else if (sec.kind == "battery") {
            sc.battery_template.capacity_mah = r.num("capacity_mah", 2500.0);
            sc.battery_template.voltage_v = r.num("voltage_v", 3.7);
            sc.battery_template.sleep_ma = r.num("sleep_ma", 11.0);
            sc.battery_template.sleep_ma_timer = r.num("sleep_ma_timer", 0.02);
            sc.battery_template.active_ma = r.num("active_ma", 45.0);
            sc.battery_template.active_seconds_per_cycle = r.num("active_s", 5.0);
            sc.battery_template.tx_ma = r.num("tx_ma", 120.0);
        } else if (sec.kind == "overheat") {
            sc.overheat.threshold_c = r.num("threshold_c", 40.0);
            sc.overheat.p_skip = r.num("p_skip", 0.8);
        } else if (sec.kind == "node") {
            NodeSpec n;
            n.config.device_id = r.str("device");
            std::string eui = r.str("dev_eui");
            try {
                n.config.dev_eui = std::stoull(eui, nullptr, 0);
            } catch (...) {
                throw err(sec.line, "[node] bad dev_eui: " + eui);
            }
            n.project_id = r.str("project");
            n.config.tx_interval_min = static_cast<int>(r.num("tx_interval_min", 2.0));
            n.config.material_ref = r.str("material");
            n.config.antenna_raised = r.flag("antenna_raised", false);
            n.config.low_power_timer = r.flag("low_power_timer", false);
            n.config.enclosure_shaded = r.flag("shaded", true);
            n.config.registered = r.flag("registered", true);
            n.surface_temp0_c = r.num("surface_temp0_c", 20.0);
            for (const auto& [k, v, l] : sec.entries) {
                if (k != "distance") continue;
                std::istringstream ss(v);
                std::string gw;
                double d;
                if (!(ss >> gw >> d)) throw err(l, "distance: expected 'gateway_id meters'");
                n.config.distance_to_gateway_m[gw] = d;
            }
            try {
                n.config.validate();
            } catch (const std::exception& e) {
                throw err(sec.line, e.what());
            }
            sc.nodes.push_back(std::move(n));
        } else if (sec.kind == "event") {
            LossEvent e;
            e.at_min = r.num("at_min");
            e.device_id = r.str("node");
            std::string kind = r.str("kind", std::string("loss"));
            if (kind != "loss") throw err(sec.line, "[event] unknown kind " + kind);
            sc.events.push_back(e);
        } else if (sec.kind == "expect") {
            Expectation e;
            e.name = r.str("name");
            e.kind = r.str("check");
            e.device = r.str("device", std::string{});
            e.device_b = r.str("device_b", std::string{});
            if (auto* w = sec.find("window_local")) {
                auto dash = w->find('-');
                auto a = dash == std::string::npos ? std::nullopt : parse_hhmm(w->substr(0, dash));
                auto b = dash == std::string::npos ? std::nullopt : parse_hhmm(w->substr(dash + 1));
                if (!a || !b) throw err(sec.line, "[expect] bad window_local: " + *w);
                e.window_local_min = {*a, *b};
            }
            if (auto* w = sec.find("window_abs_min")) {
                double a, b;
                char dash;
                std::istringstream ss(*w);
                if (!(ss >> a >> dash >> b) || dash != '-')
                    throw err(sec.line, "[expect] bad window_abs_min: " + *w);
                e.window_abs_min = {a, b};
            }
            e.value = r.num("value", 0.0);
            e.lo = r.num("lo", 0.0);
            e.hi = r.num("hi", 0.0);
            e.floor_c = r.num("floor_c", 0.0);
            e.expected_k = r.num("expected_k", 0.0);
            e.tol_pct = r.num("tol_pct", 10.0);
            sc.expectations.push_back(std::move(e));
        } else {
            throw err(sec.line, "unknown section [" + sec.kind + "]");
        }
    }

    if (!have_scenario) throw ScenarioError("missing [scenario] section");
    if (!have_forcing) throw ScenarioError("missing [forcing] section");
    std::sort(sc.forcing.knots.begin(), sc.forcing.knots.end());
    try {
        sc.forcing.validate();
        sc.radio.validate();
        sc.path.validate();
    } catch (const std::exception& e) {
        throw ScenarioError(std::string("validation: ") + e.what());
    }
    if (sc.nodes.empty()) throw ScenarioError("validation: scenario needs at least one node");
    if (sc.gateways.empty()) throw ScenarioError("validation: scenario needs at least one gateway");

    std::set<std::uint64_t> euis;
    std::set<std::string> devices;
    for (const auto& n : sc.nodes) {
        if (!sc.materials.count(n.config.material_ref))
            throw ScenarioError("validation: node " + n.config.device_id +
                                ": unknown material '" + n.config.material_ref + "'");
        if (!euis.insert(n.config.dev_eui).second)
            throw ScenarioError("validation: duplicate dev_eui on node " + n.config.device_id);
        if (!devices.insert(n.config.device_id).second)
            throw ScenarioError("validation: duplicate device id " + n.config.device_id);
        for (const auto& g : sc.gateways)
            if (!n.config.distance_to_gateway_m.count(g.id))
                throw ScenarioError("validation: node " + n.config.device_id +
                                    ": no distance to gateway '" + g.id + "'");
    }
    for (const auto& e : sc.events)
        if (!devices.count(e.device_id))
            throw ScenarioError("validation: event references unknown node '" + e.device_id + "'");
    return sc;
}

inline Scenario parse_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError("cannot read scenario file " + path);
    try {
        return parse_scenario_text(f);
    } catch (const ScenarioError& e) {
        throw ScenarioError(path + ": " + e.what());
    }
}

}  // namespace urbansense
