#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "urbansense/scenario.hpp"
#include "urbansense/sim.hpp"
#include "urbansense/verify.hpp"

namespace urbansense {

// Run directory layout:
//   scenario.scn   copy of the input deployment plan
//   store.json     application store (entities + readings)
//   registry.json  dev_eui -> project/device map
//   trace.log      per-packet reception log, replayable
//   run.json       accounting, per-node stats, expectation results

inline void save_run(const std::filesystem::path& dir, const std::string& scenario_path,
                     const Scenario& sc, const RunResult& run,
                     const std::vector<CheckOutcome>& checks) {
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(scenario_path, dir / "scenario.scn",
                               std::filesystem::copy_options::overwrite_existing);
    if (!sc.weather_csv.empty()) {
        auto src = std::filesystem::path(scenario_path).parent_path() / sc.weather_csv;
        if (std::filesystem::exists(src))
            std::filesystem::copy_file(src, dir / sc.weather_csv,
                                       std::filesystem::copy_options::overwrite_existing);
    }
    run.store.save((dir / "store.json").string());

    DeviceRegistry registry;
    Store scratch;
    bootstrap_store(sc, scratch, registry);
    registry.save((dir / "registry.json").string());

    {
        std::ofstream f(dir / "trace.log", std::ios::binary);
        if (!f) throw StoreError(StoreErrorCode::IO, "cannot write trace.log");
        for (const auto& line : run.trace) f << line << '\n';
    }

    nlohmann::ordered_json j;
    j["scenario"] = sc.name;
    j["accounting"] = run.accounting.to_json();
    j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& [id, n] : run.nodes) {
        const char* status = n.status == NodeStatus::ALIVE ? "ALIVE"
                             : n.status == NodeStatus::DEAD ? "DEAD"
                                                            : "LOST";
        j["nodes"].push_back({{"device_id", id},
                              {"status", status},
                              {"consumed_mah", n.consumed_mah},
                              {"died_at_min", n.died_at_min},
                              {"lost_at_min", n.lost_at_min},
                              {"frames_emitted", n.frames_emitted},
                              {"stored", n.stored},
                              {"skip_times_min", n.skip_times_min},
                              {"lifetime_estimate_h", n.lifetime_estimate_h},
                              {"final_surface_c", n.final_surface_c}});
    }
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    std::ofstream f(dir / "run.json", std::ios::binary);
    if (!f) throw StoreError(StoreErrorCode::IO, "cannot write run.json");
    f << j.dump(2) << '\n';
}

struct LoadedRun {
    Scenario scenario;
    RunResult run;
};

inline LoadedRun load_run(const std::filesystem::path& dir) {
    LoadedRun lr;
    lr.scenario = parse_scenario((dir / "scenario.scn").string());
    lr.run.store = Store::load((dir / "store.json").string());

    std::ifstream tf(dir / "trace.log");
    std::string line;
    while (std::getline(tf, line))
        if (!line.empty()) lr.run.trace.push_back(line);

    std::ifstream rf(dir / "run.json");
    if (!rf) throw StoreError(StoreErrorCode::IO, "cannot read run.json");
    nlohmann::json j = nlohmann::json::parse(rf);
    const auto& a = j.at("accounting");
    auto& acc = lr.run.accounting;
    acc.frames_emitted = a.at("frames_emitted");
    acc.dropped_radio = a.at("dropped_radio");
    acc.packets_received = a.at("packets_received");
    acc.dedup_folded = a.at("dedup_folded");
    acc.replay_anomalies = a.at("replay_anomalies");
    acc.ignored = a.at("ignored");
    acc.malformed = a.at("malformed");
    acc.stored = a.at("stored");
    acc.duplicates_rejected = a.at("duplicates_rejected");
    acc.overheat_skips = a.at("overheat_skips");
    for (const auto& n : j.at("nodes")) {
        NodeRunStats s;
        s.device_id = n.at("device_id");
        std::string status = n.at("status");
        s.status = status == "ALIVE" ? NodeStatus::ALIVE
                   : status == "DEAD" ? NodeStatus::DEAD
                                      : NodeStatus::LOST;
        s.consumed_mah = n.at("consumed_mah");
        s.died_at_min = n.at("died_at_min");
        s.lost_at_min = n.at("lost_at_min");
        s.frames_emitted = n.at("frames_emitted");
        s.stored = n.at("stored");
        s.skip_times_min = n.at("skip_times_min").get<std::vector<double>>();
        s.lifetime_estimate_h = n.at("lifetime_estimate_h");
        s.final_surface_c = n.at("final_surface_c");
        lr.run.nodes[s.device_id] = std::move(s);
    }
    return lr;
}

}  // namespace urbansense
