#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "urbansense/time_util.hpp"

namespace urbansense {

// Application-tier store: devices, projects, users, materials, locations and
// the readings themselves. Single JSON file on disk, deterministic layout.

enum class StoreErrorCode { REF_INTEGRITY, NOT_FOUND, IO };

struct StoreError : std::runtime_error {
    StoreErrorCode code;
    StoreError(StoreErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct Project {
    std::string id;
    std::string name;
    std::string owner_user;
};

struct User {
    std::string id;
    std::string name;
};

struct Material {
    std::string id;
    double k_cool_per_h = 0.0;
    double solar_gain_c = 0.0;
    double probe_coupling = 1.0;
};

struct Location {
    std::string id;
    std::string label;
    std::string surface;
    std::map<std::string, double> distance_to_gateways_m;
};

struct Device {
    std::string id;
    std::uint64_t dev_eui = 0;
    std::string project_id;
    std::string material_id;
    std::string location_id;
};

struct Reading {
    std::string device_id;
    std::uint32_t counter = 0;
    std::int64_t timestamp_s = 0;  // epoch seconds
    std::int16_t temp_centi = 0;
    std::uint16_t lux = 0;
    std::uint8_t flags = 0;
    std::string gateway_id;
    int rssi_ddbm = 0;  // tenths of dBm, gateway-reported resolution
    int snr_ddb = 0;    // tenths of dB

    double temp_c() const { return temp_centi / 100.0; }
    bool operator==(const Reading&) const = default;
};

enum class InsertResult { STORED, DUPLICATE };

class Store {
public:
    void upsert_user(const User& u) { users_[u.id] = u; }

    void upsert_project(const Project& p) {
        if (!p.owner_user.empty() && !users_.count(p.owner_user))
            throw StoreError(StoreErrorCode::REF_INTEGRITY,
                             "project " + p.id + ": unknown owner_user " + p.owner_user);
        projects_[p.id] = p;
    }

    void upsert_material(const Material& m) { materials_[m.id] = m; }

    void upsert_location(const Location& l) { locations_[l.id] = l; }

    void upsert_device(const Device& d) {
        if (!projects_.count(d.project_id))
            throw StoreError(StoreErrorCode::REF_INTEGRITY,
                             "device " + d.id + ": unknown project " + d.project_id);
        if (!d.material_id.empty() && !materials_.count(d.material_id))
            throw StoreError(StoreErrorCode::REF_INTEGRITY,
                             "device " + d.id + ": unknown material " + d.material_id);
        if (!d.location_id.empty() && !locations_.count(d.location_id))
            throw StoreError(StoreErrorCode::REF_INTEGRITY,
                             "device " + d.id + ": unknown location " + d.location_id);
        devices_[d.id] = d;
        eui_index_[d.dev_eui] = d.id;
    }

    // at-most-once on (device_id, counter)
    InsertResult insert_reading(const Reading& r) {
        if (!devices_.count(r.device_id))
            throw StoreError(StoreErrorCode::REF_INTEGRITY,
                             "reading: unknown device " + r.device_id);
        auto& per_dev = readings_[r.device_id];
        if (!per_dev.keys.insert(r.counter).second) return InsertResult::DUPLICATE;
        per_dev.rows.push_back(r);
        return InsertResult::STORED;
    }

    // half-open [t0, t1), ascending timestamps
    std::vector<Reading> query_readings(const std::string& device_id, std::int64_t t0_s,
                                        std::int64_t t1_s) const {
        if (t0_s > t1_s) throw std::invalid_argument("query: t0 > t1");
        if (!devices_.count(device_id))
            throw StoreError(StoreErrorCode::NOT_FOUND, "query: unknown device " + device_id);
        std::vector<Reading> out;
        auto it = readings_.find(device_id);
        if (it == readings_.end()) return out;
        for (const auto& r : it->second.rows)
            if (r.timestamp_s >= t0_s && r.timestamp_s < t1_s) out.push_back(r);
        std::sort(out.begin(), out.end(),
                  [](const Reading& a, const Reading& b) { return a.timestamp_s < b.timestamp_s; });
        return out;
    }

    std::size_t reading_count() const {
        std::size_t n = 0;
        for (const auto& [_, per_dev] : readings_) n += per_dev.rows.size();
        return n;
    }

    std::vector<std::string> device_ids() const {
        std::vector<std::string> out;
        for (const auto& [id, _] : devices_) out.push_back(id);
        return out;
    }

    const Device* find_device(const std::string& id) const {
        auto it = devices_.find(id);
        return it == devices_.end() ? nullptr : &it->second;
    }

    const Device* find_device_by_eui(std::uint64_t eui) const {
        auto it = eui_index_.find(eui);
        return it == eui_index_.end() ? nullptr : find_device(it->second);
    }

    const Material* find_material(const std::string& id) const {
        auto it = materials_.find(id);
        return it == materials_.end() ? nullptr : &it->second;
    }

    std::size_t project_count() const { return projects_.size(); }
    std::size_t device_count() const { return devices_.size(); }
    std::size_t material_count() const { return materials_.size(); }
    std::size_t user_count() const { return users_.size(); }
    std::size_t location_count() const { return locations_.size(); }

    std::string material_of(const std::string& device_id) const {
        auto d = find_device(device_id);
        return d ? d->material_id : std::string{};
    }

    // --- CSV ---------------------------------------------------------------

    static std::string csv_header() {
        return "timestamp,device_id,material,temp_c,lux,flags,gateway_id,rssi,snr";
    }

    void export_csv(std::ostream& os, const std::vector<Reading>& rows) const {
        os << csv_header() << '\n';
        char buf[64];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "%.2f", r.temp_c());
            os << format_iso8601(r.timestamp_s) << ',' << r.device_id << ','
               << material_of(r.device_id) << ',' << buf << ',' << r.lux << ','
               << static_cast<int>(r.flags) << ',' << r.gateway_id << ',';
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f", r.rssi_ddbm / 10.0, r.snr_ddb / 10.0);
            os << buf << '\n';
        }
    }

    void export_csv_file(const std::string& path, const std::vector<Reading>& rows) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw StoreError(StoreErrorCode::IO, "cannot write " + path);
        export_csv(f, rows);
    }

    // Reimports what export_csv wrote; counters are not part of the CSV, so
    // they are assigned sequentially per device.
    static std::vector<Reading> import_csv(std::istream& is) {
        std::string line;
        if (!std::getline(is, line) || line != csv_header())
            throw StoreError(StoreErrorCode::IO, "csv: bad header");
        std::vector<Reading> rows;
        std::map<std::string, std::uint32_t> counters;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cols;
            std::stringstream ss(line);
            std::string col;
            while (std::getline(ss, col, ',')) cols.push_back(col);
            if (cols.size() != 9) throw StoreError(StoreErrorCode::IO, "csv: bad row: " + line);
            Reading r;
            auto ts = parse_iso8601(cols[0]);
            if (!ts) throw StoreError(StoreErrorCode::IO, "csv: bad timestamp: " + cols[0]);
            r.timestamp_s = *ts;
            r.device_id = cols[1];
            r.temp_centi = static_cast<std::int16_t>(std::lround(std::stod(cols[3]) * 100.0));
            r.lux = static_cast<std::uint16_t>(std::stoul(cols[4]));
            r.flags = static_cast<std::uint8_t>(std::stoul(cols[5]));
            r.gateway_id = cols[6];
            r.rssi_ddbm = static_cast<int>(std::lround(std::stod(cols[7]) * 10.0));
            r.snr_ddb = static_cast<int>(std::lround(std::stod(cols[8]) * 10.0));
            r.counter = counters[r.device_id]++;
            rows.push_back(r);
        }
        return rows;
    }

    // --- persistence -------------------------------------------------------

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["users"] = nlohmann::ordered_json::array();
        for (const auto& [_, u] : users_) j["users"].push_back({{"id", u.id}, {"name", u.name}});
        j["projects"] = nlohmann::ordered_json::array();
        for (const auto& [_, p] : projects_)
            j["projects"].push_back({{"id", p.id}, {"name", p.name}, {"owner_user", p.owner_user}});
        j["materials"] = nlohmann::ordered_json::array();
        for (const auto& [_, m] : materials_)
            j["materials"].push_back({{"id", m.id},
                                      {"k_cool_per_h", m.k_cool_per_h},
                                      {"solar_gain_c", m.solar_gain_c},
                                      {"probe_coupling", m.probe_coupling}});
        j["locations"] = nlohmann::ordered_json::array();
        for (const auto& [_, l] : locations_)
            j["locations"].push_back({{"id", l.id},
                                      {"label", l.label},
                                      {"surface", l.surface},
                                      {"distance_to_gateways_m", l.distance_to_gateways_m}});
        j["devices"] = nlohmann::ordered_json::array();
        for (const auto& [_, d] : devices_)
            j["devices"].push_back({{"id", d.id},
                                    {"dev_eui", d.dev_eui},
                                    {"project_id", d.project_id},
                                    {"material_id", d.material_id},
                                    {"location_id", d.location_id}});
        j["readings"] = nlohmann::ordered_json::array();
        for (const auto& [dev, per_dev] : readings_)
            for (const auto& r : per_dev.rows)
                j["readings"].push_back({{"device_id", r.device_id},
                                         {"counter", r.counter},
                                         {"timestamp_s", r.timestamp_s},
                                         {"temp_centi", r.temp_centi},
                                         {"lux", r.lux},
                                         {"flags", r.flags},
                                         {"gateway_id", r.gateway_id},
                                         {"rssi_ddbm", r.rssi_ddbm},
                                         {"snr_ddb", r.snr_ddb}});
        return j;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw StoreError(StoreErrorCode::IO, "cannot write " + path);
        f << to_json().dump(2) << '\n';
    }

    static Store load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw StoreError(StoreErrorCode::IO, "cannot read " + path);
        nlohmann::json j = nlohmann::json::parse(f);
        Store s;
        for (const auto& u : j.at("users")) s.upsert_user({u.at("id"), u.at("name")});
        for (const auto& p : j.at("projects"))
            s.upsert_project({p.at("id"), p.at("name"), p.at("owner_user")});
        for (const auto& m : j.at("materials"))
            s.upsert_material({m.at("id"), m.at("k_cool_per_h"), m.at("solar_gain_c"),
                               m.at("probe_coupling")});
        for (const auto& l : j.at("locations")) {
            Location loc{l.at("id"), l.at("label"), l.at("surface"), {}};
            for (auto& [k, v] : l.at("distance_to_gateways_m").items())
                loc.distance_to_gateways_m[k] = v;
            s.upsert_location(loc);
        }
        for (const auto& d : j.at("devices"))
            s.upsert_device({d.at("id"), d.at("dev_eui"), d.at("project_id"), d.at("material_id"),
                             d.at("location_id")});
        for (const auto& r : j.at("readings")) {
            Reading rd;
            rd.device_id = r.at("device_id");
            rd.counter = r.at("counter");
            rd.timestamp_s = r.at("timestamp_s");
            rd.temp_centi = r.at("temp_centi");
            rd.lux = r.at("lux");
            rd.flags = r.at("flags");
            rd.gateway_id = r.at("gateway_id");
            rd.rssi_ddbm = r.at("rssi_ddbm");
            rd.snr_ddb = r.at("snr_ddb");
            s.insert_reading(rd);
        }
        return s;
    }

    std::vector<Reading> all_readings(const std::string& device_id) const {
        auto it = readings_.find(device_id);
        if (it == readings_.end()) return {};
        return it->second.rows;
    }

private:
    struct PerDevice {
        std::vector<Reading> rows;
        std::set<std::uint32_t> keys;
    };
    std::map<std::string, User> users_;
    std::map<std::string, Project> projects_;
    std::map<std::string, Material> materials_;
    std::map<std::string, Location> locations_;
    std::map<std::string, Device> devices_;
    std::map<std::uint64_t, std::string> eui_index_;
    std::map<std::string, PerDevice> readings_;
};

}  // namespace urbansense
