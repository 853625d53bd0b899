#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "urbansense/backhaul.hpp"
#include "urbansense/link.hpp"
#include "urbansense/node.hpp"
#include "urbansense/scenario.hpp"
#include "urbansense/store.hpp"
#include "urbansense/thermal.hpp"
#include "urbansense/time_util.hpp"

namespace urbansense {

// Deterministic event loop: 1-minute master tick, sub-minute airtime handled
// analytically inside the tick. Thermal state advances every tick; nodes run
// read/transmit cycles on their interval grid; packets flow through the link,
// gateways, dedup, webhook and store.

struct NodeRunStats {
    std::string device_id;
    NodeStatus status = NodeStatus::ALIVE;
    double consumed_mah = 0.0;
    double died_at_min = -1.0;
    double lost_at_min = -1.0;
    std::size_t frames_emitted = 0;
    std::size_t stored = 0;
    std::vector<double> skip_times_min;
    double lifetime_estimate_h = 0.0;
    double final_surface_c = 0.0;
};

struct RunResult {
    Store store;
    Accounting accounting;
    std::vector<std::string> trace;
    std::map<std::string, NodeRunStats> nodes;
};

inline void bootstrap_store(const Scenario& sc, Store& store, DeviceRegistry& registry) {
    store.upsert_user({"field-team", "Field Team"});
    for (const auto& [name, m] : sc.materials)
        store.upsert_material({name, m.k_cool_per_h, m.solar_gain_c, m.probe_coupling});
    std::set<std::string> projects;
    for (const auto& n : sc.nodes)
        if (n.config.registered) projects.insert(n.project_id);
    for (const auto& p : projects) store.upsert_project({p, p, "field-team"});
    for (const auto& n : sc.nodes) {
        if (!n.config.registered) continue;
        Location loc;
        loc.id = n.config.device_id + "-site";
        loc.label = loc.id;
        loc.surface = n.config.material_ref;
        loc.distance_to_gateways_m = n.config.distance_to_gateway_m;
        store.upsert_location(loc);
        store.upsert_device({n.config.device_id, n.config.dev_eui, n.project_id,
                             n.config.material_ref, loc.id});
        registry.add(n.config.dev_eui, {n.project_id, n.config.device_id});
    }
}

inline std::string format_trace_line(std::int64_t epoch_base_s, const UplinkPacket& p) {
    char num[32];
    std::string line = format_iso8601_ms(epoch_base_s * 1000 + p.received_ms);
    line += ' ';
    line += p.gateway_id;
    std::snprintf(num, sizeof(num), " %.1f %.1f ", p.rssi_dbm, p.snr_db);
    line += num;
    line += to_hex(p.frame);
    return line;
}

inline RunResult run_scenario(const Scenario& sc) {
    RunResult res;
    DeviceRegistry registry;
    bootstrap_store(sc, res.store, registry);
    Router router([&store = res.store](const Reading& r) { return store.insert_reading(r); });
    Deduplicator dedup(sc.dedup_window_ms);

    const double frame_airtime_ms = airtime_ms(sc.radio, static_cast<int>(kFrameLen));
    const int start_tod = sc.start_local_tod_min();

    struct LiveNode {
        NodeState state;
        RngStream node_rng;
        std::map<std::string, RngStream> gw_rng;
    };
    std::vector<LiveNode> live;
    for (const auto& spec : sc.nodes) {
        LiveNode ln{NodeState{}, RngStream::derive(sc.seed, "node:" + spec.config.device_id), {}};
        ln.state.config = spec.config;
        ln.state.battery = sc.battery_template;
        ln.state.surface = {spec.surface_temp0_c, 0.0};
        for (const auto& gw : sc.gateways)
            ln.gw_rng.emplace(gw.id, RngStream::derive(sc.seed, "link:" + spec.config.device_id +
                                                                    ":" + gw.id));
        res.nodes[spec.config.device_id] = NodeRunStats{spec.config.device_id};
        res.nodes[spec.config.device_id].lifetime_estimate_h =
            lifetime_estimate_h(spec.config, sc.battery_template, frame_airtime_ms);
        live.push_back(std::move(ln));
    }

    auto consume_ready = [&](std::int64_t now_ms) {
        dedup.flush_older_than(now_ms);
        for (const auto& pkt : dedup.take_ready()) {
            Reading reading;
            switch (webhook_filter(registry, pkt, sc.start_epoch_s, reading)) {
                case WebhookResult::MALFORMED:
                    ++res.accounting.malformed;
                    break;
                case WebhookResult::IGNORED:
                    ++res.accounting.ignored;
                    break;
                case WebhookResult::ACCEPTED:
                    switch (router.route(reading)) {
                        case Router::Outcome::STORED:
                            ++res.accounting.stored;
                            ++res.nodes[reading.device_id].stored;
                            break;
                        case Router::Outcome::DUPLICATE:
                            ++res.accounting.duplicates_rejected;
                            break;
                        case Router::Outcome::QUEUED:
                            break;
                    }
                    break;
            }
        }
    };

    const auto total_min = static_cast<std::int64_t>(std::llround(sc.duration_min()));
    for (std::int64_t t = 0; t < total_min; ++t) {
        const double tod = static_cast<double>((start_tod + t) % 1440);

        for (const auto& ev : sc.events)
            if (std::llround(ev.at_min) == t)
                for (auto& ln : live)
                    if (ln.state.config.device_id == ev.device_id) {
                        apply_loss_event(ln.state, static_cast<double>(t));
                        res.nodes[ev.device_id].lost_at_min = ln.state.lost_at_min;
                    }

        for (auto& ln : live) {
            auto& stats = res.nodes[ln.state.config.device_id];
            const auto& material = sc.materials.at(ln.state.config.material_ref);

            if (t % ln.state.config.tx_interval_min == 0 && ln.state.status == NodeStatus::ALIVE) {
                auto outcome = run_cycle(ln.state, material, sc.forcing, tod,
                                         static_cast<double>(t), sc.overheat, ln.node_rng,
                                         frame_airtime_ms);
                switch (outcome.result) {
                    case CycleResult::EMITTED: {
                        ++res.accounting.frames_emitted;
                        ++stats.frames_emitted;
                        const std::int64_t rx_ms =
                            t * 60000 + static_cast<std::int64_t>(std::llround(frame_airtime_ms));
                        bool heard = false;
                        for (const auto& gw : sc.gateways) {
                            auto delivery = deliver(
                                sc.radio, sc.path,
                                ln.state.config.distance_to_gateway_m.at(gw.id),
                                ln.state.config.antenna_raised, ln.gw_rng.at(gw.id), gw.id);
                            // quantize to the 0.1 dB a gateway would report, so the
                            // trace replays bit-identically
                            delivery.rssi_dbm = std::round(delivery.rssi_dbm * 10.0) / 10.0;
                            delivery.snr_db = std::round(delivery.snr_db * 10.0) / 10.0;
                            auto pkt = gateway_receive(gw, *outcome.frame, delivery, rx_ms);
                            if (!pkt) continue;
                            heard = true;
                            ++res.accounting.packets_received;
                            res.trace.push_back(format_trace_line(sc.start_epoch_s, *pkt));
                            dedup.process(*pkt);
                        }
                        if (!heard) ++res.accounting.dropped_radio;
                        break;
                    }
                    case CycleResult::SKIPPED_OVERHEAT:
                        ++res.accounting.overheat_skips;
                        stats.skip_times_min.push_back(static_cast<double>(t));
                        break;
                    case CycleResult::NODE_DEAD:
                        if (stats.died_at_min < 0.0) stats.died_at_min = static_cast<double>(t);
                        break;
                    case CycleResult::NODE_LOST:
                        break;
                }
            }

            ln.state.surface = step_surface(material, ln.state.surface, sc.forcing, tod, 1.0);
        }

        consume_ready(t * 60000);
    }

    dedup.flush_all();
    consume_ready(0);  // already flushed, just drain
    res.accounting.dedup_folded = dedup.folded();
    res.accounting.replay_anomalies = dedup.replay_anomalies();

    for (const auto& ln : live) {
        auto& stats = res.nodes[ln.state.config.device_id];
        stats.status = ln.state.status;
        stats.consumed_mah = ln.state.battery.consumed_mah;
        stats.final_surface_c = ln.state.surface.surface_temp_c;
        if (ln.state.status == NodeStatus::LOST) stats.lost_at_min = ln.state.lost_at_min;
    }
    return res;
}

// Re-runs the server side (dedup -> webhook -> store) from a packet trace.
struct ReplayResult {
    Store store;
    Accounting accounting;
};

inline ReplayResult replay_trace(const std::vector<std::string>& lines,
                                 const DeviceRegistry& registry, std::int64_t epoch_base_s,
                                 Store store_template, std::int64_t dedup_window_ms = 2000) {
    ReplayResult res;
    res.store = std::move(store_template);
    Router router([&store = res.store](const Reading& r) { return store.insert_reading(r); });
    Deduplicator dedup(dedup_window_ms);

    for (const auto& line : lines) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string ts, gw, hex;
        double rssi, snr;
        if (!(ss >> ts >> gw >> rssi >> snr >> hex))
            throw StoreError(StoreErrorCode::IO, "trace: bad line: " + line);
        auto epoch_ms = parse_iso8601_ms(ts);
        if (!epoch_ms) throw StoreError(StoreErrorCode::IO, "trace: bad timestamp: " + ts);
        auto bytes = from_hex(hex);
        if (!bytes) throw StoreError(StoreErrorCode::IO, "trace: bad frame hex: " + hex);
        UplinkPacket pkt;
        pkt.frame = *bytes;
        pkt.gateway_id = gw;
        pkt.rssi_dbm = rssi;
        pkt.snr_db = snr;
        pkt.received_ms = *epoch_ms - epoch_base_s * 1000;
        ++res.accounting.packets_received;
        dedup.process(pkt);
    }
    dedup.flush_all();
    for (const auto& pkt : dedup.take_ready()) {
        Reading reading;
        switch (webhook_filter(registry, pkt, epoch_base_s, reading)) {
            case WebhookResult::MALFORMED:
                ++res.accounting.malformed;
                break;
            case WebhookResult::IGNORED:
                ++res.accounting.ignored;
                break;
            case WebhookResult::ACCEPTED:
                if (router.route(reading) == Router::Outcome::STORED)
                    ++res.accounting.stored;
                else
                    ++res.accounting.duplicates_rejected;
                break;
        }
    }
    res.accounting.dedup_folded = dedup.folded();
    res.accounting.replay_anomalies = dedup.replay_anomalies();
    return res;
}

}  // namespace urbansense
