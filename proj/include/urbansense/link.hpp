#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "urbansense/rng.hpp"

namespace urbansense {

// LoRa airtime, log-distance path loss, and link-budget delivery.

struct RadioParams {
    int spreading_factor = 7;       // 7..12
    double bandwidth_hz = 125000.0;
    int coding_rate_index = 1;      // 1..4 => 4/5..4/8
    int preamble_symbols = 8;
    bool explicit_header = true;
    bool crc_on = true;
    double tx_power_dbm = 14.0;
    // SX127x figures at 125 kHz; overridable from the scenario file
    std::map<int, double> sensitivity_dbm = {
        {7, -123.0}, {8, -126.0}, {9, -129.0},
        {10, -132.0}, {11, -134.5}, {12, -137.0},
    };
    double noise_floor_dbm = -117.0;

    bool low_datarate_optimize() const {
        return spreading_factor >= 11 && bandwidth_hz <= 125000.0;
    }

    void validate() const {
        if (spreading_factor < 7 || spreading_factor > 12)
            throw std::invalid_argument("radio: spreading_factor outside [7,12]");
        if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("radio: bandwidth must be > 0");
        if (coding_rate_index < 1 || coding_rate_index > 4)
            throw std::invalid_argument("radio: coding_rate_index outside [1,4]");
        if (!sensitivity_dbm.count(spreading_factor))
            throw std::invalid_argument("radio: no sensitivity entry for SF");
    }
};

enum class PathMode { LOS, OBSTRUCTED };

struct PathEnvironment {
    PathMode mode = PathMode::LOS;
    double path_loss_exponent = 3.0;
    double reference_loss_db = 40.0;  // at 1 m
    double shadowing_sigma_db = 2.0;
    double antenna_bonus_db = 6.0;    // applied when the antenna is raised

    void validate() const {
        if (path_loss_exponent < 1.6 || path_loss_exponent > 6.0)
            throw std::invalid_argument("path: exponent outside [1.6,6]");
        if (shadowing_sigma_db < 0.0)
            throw std::invalid_argument("path: sigma must be >= 0");
    }
};

struct DeliveryResult {
    bool received = false;
    double rssi_dbm = 0.0;
    double snr_db = 0.0;
    std::string gateway_id;
};

// Semtech symbol-count formula.
inline double airtime_ms(const RadioParams& r, int payload_len) {
    if (payload_len < 1 || payload_len > 255)
        throw std::invalid_argument("airtime: payload length outside [1,255]");
    const int sf = r.spreading_factor;
    const int de = r.low_datarate_optimize() ? 1 : 0;
    const int ih = r.explicit_header ? 0 : 1;
    const int crc = r.crc_on ? 1 : 0;
    const double t_sym_ms = std::pow(2.0, sf) / r.bandwidth_hz * 1000.0;
    const double num = 8.0 * payload_len - 4.0 * sf + 28.0 + 16.0 * crc - 20.0 * ih;
    const double n_payload =
        8.0 + std::max(std::ceil(num / (4.0 * (sf - 2 * de))) * (r.coding_rate_index + 4), 0.0);
    return (r.preamble_symbols + 4.25 + n_payload) * t_sym_ms;
}

inline double path_loss_db(const PathEnvironment& env, double distance_m, RngStream& rng) {
    if (distance_m < 1.0) throw std::invalid_argument("path_loss: distance must be >= 1 m");
    return env.reference_loss_db + 10.0 * env.path_loss_exponent * std::log10(distance_m) +
           rng.normal(env.shadowing_sigma_db);
}

inline DeliveryResult deliver(const RadioParams& radio, const PathEnvironment& env,
                              double distance_m, bool antenna_raised, RngStream& rng,
                              std::string gateway_id = {}) {
    double rssi = radio.tx_power_dbm - path_loss_db(env, distance_m, rng);
    if (antenna_raised) rssi += env.antenna_bonus_db;
    DeliveryResult res;
    res.rssi_dbm = rssi;
    res.snr_db = std::clamp(rssi - radio.noise_floor_dbm, -20.0, 10.0);
    // reception at exact sensitivity is inclusive
    res.received = rssi >= radio.sensitivity_dbm.at(radio.spreading_factor);
    res.gateway_id = std::move(gateway_id);
    return res;
}

}  // namespace urbansense
