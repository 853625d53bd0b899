#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "urbansense/frame.hpp"
#include "urbansense/rng.hpp"
#include "urbansense/thermal.hpp"

namespace urbansense {

// One end node: read, encode, transmit, sleep. Battery budget in mAh,
// overheat shutdown at the enclosure threshold, lux gross errors in the sun.

struct NodeConfig {
    std::uint64_t dev_eui = 0;
    std::string device_id;             // registry name, e.g. "grass-01"
    int tx_interval_min = 2;           // [1,30]
    std::string material_ref;
    std::map<std::string, double> distance_to_gateway_m;
    bool antenna_raised = false;
    bool low_power_timer = false;
    bool enclosure_shaded = true;
    bool registered = true;            // false models a foreign project's node

    void validate() const {
        if (tx_interval_min < 1 || tx_interval_min > 30)
            throw std::invalid_argument("node: tx_interval outside [1,30] minutes");
    }
};

struct BatteryState {
    double capacity_mah = 2500.0;
    double voltage_v = 3.7;  // informational
    double consumed_mah = 0.0;
    double sleep_ma = 11.0;
    double sleep_ma_timer = 0.02;  // with the low-power timer fitted
    double active_ma = 45.0;
    double tx_ma = 120.0;
    double active_seconds_per_cycle = 5.0;

    bool exhausted() const { return consumed_mah >= capacity_mah; }

    double effective_sleep_ma(bool low_power_timer) const {
        return low_power_timer ? sleep_ma_timer : sleep_ma;
    }
};

struct OverheatModel {
    double threshold_c = 40.0;
    double p_skip = 0.8;  // otherwise the lux channel records a gross error
};

struct SensorSample {
    double timestamp_min = 0.0;  // absolute minutes
    std::int16_t temp_centi = 0;
    std::uint16_t lux = 0;
    bool overheat_skip = false;
    bool lux_gross_error = false;
};

enum class NodeStatus { ALIVE, DEAD, LOST };

struct NodeState {
    NodeConfig config;
    BatteryState battery;
    SurfaceState surface;  // the surface this node's probe trails onto
    std::uint32_t counter = 0;
    NodeStatus status = NodeStatus::ALIVE;
    double lost_at_min = -1.0;
};

inline std::int16_t to_temp_centi(double temp_c) {
    double c = std::clamp(std::round(temp_c * 100.0), -4000.0, 12000.0);
    return static_cast<std::int16_t>(c);
}

inline SensorSample sample_sensors(const NodeState& node, const MaterialThermalModel& m,
                                   const AmbientForcing& f, double tod_min, double t_abs_min,
                                   const OverheatModel& oh, RngStream& rng) {
    if (node.status != NodeStatus::ALIVE)
        throw std::logic_error("sample_sensors: node is not alive");
    SensorSample s;
    s.timestamp_min = t_abs_min;
    s.temp_centi = to_temp_centi(probe_reading(m, node.surface, f, tod_min));
    double inso = insolation_at(f, tod_min);
    s.lux = static_cast<std::uint16_t>(std::lround(inso * 40000.0));
    // enclosure tracks the surface when in direct sun, ambient when shaded
    double enclosure_c =
        node.config.enclosure_shaded ? ambient_at(f, tod_min) : node.surface.surface_temp_c;
    if (enclosure_c >= oh.threshold_c) {
        if (rng.bernoulli(oh.p_skip)) {
            s.overheat_skip = true;
        } else {
            s.lux = rng.bernoulli(0.5) ? 65535 : 0;
            s.lux_gross_error = true;
        }
    }
    return s;
}

enum class CycleResult { EMITTED, SKIPPED_OVERHEAT, NODE_DEAD, NODE_LOST };

struct CycleOutcome {
    CycleResult result = CycleResult::EMITTED;
    std::optional<FrameBytes> frame;
    SensorSample sample;
};

// One read/encode/transmit cycle at an interval grid point. Charges the
// battery for the sleep window since the previous cycle plus the active and
// transmit segments; a mid-cycle exhaustion consumes the remaining charge and
// emits nothing.
inline CycleOutcome run_cycle(NodeState& node, const MaterialThermalModel& m,
                              const AmbientForcing& f, double tod_min, double t_abs_min,
                              const OverheatModel& oh, RngStream& rng, double tx_airtime_ms) {
    CycleOutcome out;
    if (node.status == NodeStatus::LOST) {
        out.result = CycleResult::NODE_LOST;
        return out;
    }
    if (node.status == NodeStatus::DEAD || node.battery.exhausted()) {
        node.status = NodeStatus::DEAD;
        out.result = CycleResult::NODE_DEAD;
        return out;
    }
    auto& bat = node.battery;
    const double interval_h = node.config.tx_interval_min / 60.0;
    const double active_h = bat.active_seconds_per_cycle / 3600.0;
    const double tx_h = tx_airtime_ms / 3600.0 / 1000.0;
    const double sleep_h = std::max(interval_h - active_h - tx_h, 0.0);

    auto draw = [&bat](double mah) {
        bat.consumed_mah += mah;
        if (bat.consumed_mah >= bat.capacity_mah) {
            bat.consumed_mah = bat.capacity_mah;
            return false;
        }
        return true;
    };

    if (!draw(bat.effective_sleep_ma(node.config.low_power_timer) * sleep_h) ||
        !draw(bat.active_ma * active_h)) {
        node.status = NodeStatus::DEAD;
        out.result = CycleResult::NODE_DEAD;
        return out;
    }

    out.sample = sample_sensors(node, m, f, tod_min, t_abs_min, oh, rng);
    if (out.sample.overheat_skip) {
        out.result = CycleResult::SKIPPED_OVERHEAT;
        return out;
    }

    if (!draw(bat.tx_ma * tx_h)) {
        node.status = NodeStatus::DEAD;
        out.result = CycleResult::NODE_DEAD;
        return out;
    }

    UplinkFrame frame;
    frame.dev_eui = node.config.dev_eui;
    frame.counter = node.counter++;
    frame.temp_centi = out.sample.temp_centi;
    frame.lux = out.sample.lux;
    frame.flags = out.sample.lux_gross_error ? kFlagLuxGrossError : 0;
    out.frame = encode_frame(frame);
    out.result = CycleResult::EMITTED;
    return out;
}

// Closed-form lifetime: capacity over the duty-cycle average current.
inline double lifetime_estimate_h(const NodeConfig& cfg, const BatteryState& bat,
                                  double tx_airtime_ms) {
    const double interval_h = cfg.tx_interval_min / 60.0;
    const double active_h = bat.active_seconds_per_cycle / 3600.0;
    const double tx_h = tx_airtime_ms / 3600.0 / 1000.0;
    const double sleep_h = std::max(interval_h - active_h - tx_h, 0.0);
    const double avg_ma = (bat.effective_sleep_ma(cfg.low_power_timer) * sleep_h +
                           bat.active_ma * active_h + bat.tx_ma * tx_h) /
                          interval_h;
    return bat.capacity_mah / avg_ma;
}

inline void apply_loss_event(NodeState& node, double t_abs_min) {
    if (node.status != NodeStatus::ALIVE) return;
    node.status = NodeStatus::LOST;
    node.lost_at_min = t_abs_min;
}

}  // namespace urbansense
