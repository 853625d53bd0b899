#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "urbansense/frame.hpp"
#include "urbansense/link.hpp"
#include "urbansense/store.hpp"

namespace urbansense {

// Gateways stamp receptions; the network server folds cross-gateway copies,
// drops frames from foreign projects, and routes the rest to the store.

struct GatewayConfig {
    std::string id;
    std::string name;
    double x_m = 0.0;
    double y_m = 0.0;
};

struct UplinkPacket {
    std::vector<std::uint8_t> frame;
    std::string gateway_id;
    double rssi_dbm = 0.0;
    double snr_db = 0.0;
    std::int64_t received_ms = 0;  // absolute ms since scenario start
};

inline std::optional<UplinkPacket> gateway_receive(const GatewayConfig& gw,
                                                   std::span<const std::uint8_t> frame,
                                                   const DeliveryResult& delivery,
                                                   std::int64_t received_ms) {
    if (!delivery.received) return std::nullopt;
    UplinkPacket p;
    p.frame.assign(frame.begin(), frame.end());
    p.gateway_id = gw.id;
    p.rssi_dbm = delivery.rssi_dbm;
    p.snr_db = delivery.snr_db;
    p.received_ms = received_ms;
    return p;
}

struct RegistryEntry {
    std::string project_id;
    std::string device_id;
};

// dev_eui -> owning project and device name; the webhook's membership test
class DeviceRegistry {
public:
    void add(std::uint64_t eui, RegistryEntry e) { entries_[eui] = std::move(e); }

    const RegistryEntry* lookup(std::uint64_t eui) const {
        auto it = entries_.find(eui);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const std::map<std::uint64_t, RegistryEntry>& entries() const { return entries_; }

    void save(const std::string& path) const {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& [eui, e] : entries_)
            j.push_back({{"dev_eui", eui}, {"project_id", e.project_id}, {"device_id", e.device_id}});
        std::ofstream f(path, std::ios::binary);
        if (!f) throw StoreError(StoreErrorCode::IO, "cannot write " + path);
        f << j.dump(2) << '\n';
    }

    static DeviceRegistry load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw StoreError(StoreErrorCode::IO, "cannot read " + path);
        nlohmann::json j = nlohmann::json::parse(f);
        DeviceRegistry r;
        for (const auto& e : j)
            r.add(e.at("dev_eui"), {e.at("project_id"), e.at("device_id")});
        return r;
    }

private:
    std::map<std::uint64_t, RegistryEntry> entries_;
};

// Collapses cross-gateway copies of one uplink. Key is (dev_eui, counter);
// the first copy opens a window, later copies inside it fold into the record
// with the strongest rssi (ties to the lexicographically smaller gateway id).
// A copy of an already-flushed key is a replay anomaly.
class Deduplicator {
public:
    explicit Deduplicator(std::int64_t window_ms = 2000) : window_ms_(window_ms) {}

    // returns false for a replay anomaly
    bool process(const UplinkPacket& p) {
        auto f = decode_frame(p.frame);
        Key key = f ? Key{f->dev_eui, f->counter} : Key{0, 0};
        // undecodable frames pass straight through for the webhook to count
        if (!f) {
            ready_.push_back(p);
            return true;
        }
        if (flushed_.count(key)) {
            ++replay_anomalies_;
            return false;
        }
        auto it = pending_.find(key);
        if (it == pending_.end()) {
            pending_.emplace(key, Pending{p, p.received_ms});
            return true;
        }
        ++folded_;
        UplinkPacket& best = it->second.best;
        if (p.rssi_dbm > best.rssi_dbm ||
            (p.rssi_dbm == best.rssi_dbm && p.gateway_id < best.gateway_id))
            best = p;
        return true;
    }

    // moves windows that closed before now_ms to the ready queue
    void flush_older_than(std::int64_t now_ms) {
        for (auto it = pending_.begin(); it != pending_.end();) {
            if (now_ms > it->second.opened_ms + window_ms_) {
                ready_.push_back(it->second.best);
                flushed_.insert(it->first);
                it = pending_.erase(it);
            } else {
                ++it;
            }
        }
        std::sort(ready_.begin(), ready_.end(),
                  [](const UplinkPacket& a, const UplinkPacket& b) {
                      return a.received_ms < b.received_ms;
                  });
    }

    void flush_all() { flush_older_than(std::numeric_limits<std::int64_t>::max()); }

    std::vector<UplinkPacket> take_ready() {
        auto out = std::move(ready_);
        ready_.clear();
        return out;
    }

    std::size_t folded() const { return folded_; }
    std::size_t replay_anomalies() const { return replay_anomalies_; }

private:
    using Key = std::pair<std::uint64_t, std::uint32_t>;
    struct Pending {
        UplinkPacket best;
        std::int64_t opened_ms;
    };
    std::int64_t window_ms_;
    std::map<Key, Pending> pending_;
    std::set<Key> flushed_;
    std::vector<UplinkPacket> ready_;
    std::size_t folded_ = 0;
    std::size_t replay_anomalies_ = 0;
};

enum class WebhookResult { ACCEPTED, IGNORED, MALFORMED };

// Resolves a deduplicated packet against the registry and decodes it.
inline WebhookResult webhook_filter(const DeviceRegistry& registry, const UplinkPacket& p,
                                    std::int64_t epoch_base_s, Reading& out) {
    auto f = decode_frame(p.frame);
    if (!f) return WebhookResult::MALFORMED;
    const RegistryEntry* e = registry.lookup(f->dev_eui);
    if (!e) return WebhookResult::IGNORED;
    out.device_id = e->device_id;
    out.counter = f->counter;
    out.timestamp_s = epoch_base_s + p.received_ms / 1000;
    out.temp_centi = f->temp_centi;
    out.lux = f->lux;
    out.flags = f->flags;
    out.gateway_id = p.gateway_id;
    out.rssi_ddbm = static_cast<int>(std::lround(p.rssi_dbm * 10.0));
    out.snr_ddb = static_cast<int>(std::lround(p.snr_db * 10.0));
    return WebhookResult::ACCEPTED;
}

// Terminal hop into the store; failed inserts park in a bounded retry queue.
class Router {
public:
    using InsertFn = std::function<InsertResult(const Reading&)>;

    explicit Router(InsertFn insert, std::size_t retry_capacity = 1000)
        : insert_(std::move(insert)), retry_capacity_(retry_capacity) {}

    enum class Outcome { STORED, DUPLICATE, QUEUED };

    Outcome route(const Reading& r) {
        try {
            return insert_(r) == InsertResult::STORED ? Outcome::STORED : Outcome::DUPLICATE;
        } catch (const StoreError&) {
            if (retry_.size() >= retry_capacity_) {
                retry_.pop_front();
                ++retry_dropped_;
            }
            retry_.push_back(r);
            return Outcome::QUEUED;
        }
    }

    // drains the queue; entries that fail again go back to the tail
    std::size_t retry() {
        std::size_t stored = 0;
        std::size_t n = retry_.size();
        for (std::size_t i = 0; i < n; ++i) {
            Reading r = retry_.front();
            retry_.pop_front();
            try {
                if (insert_(r) == InsertResult::STORED) ++stored;
            } catch (const StoreError&) {
                retry_.push_back(r);
            }
        }
        return stored;
    }

    std::size_t retry_queue_size() const { return retry_.size(); }
    std::size_t retry_dropped() const { return retry_dropped_; }

private:
    InsertFn insert_;
    std::size_t retry_capacity_;
    std::deque<Reading> retry_;
    std::size_t retry_dropped_ = 0;
};

// Per-run bookkeeping. frames_emitted splits exactly into the radio-dropped
// frames plus the post-dedup outcomes; folded copies are counted in packet
// space (packets_received = delivered frames + dedup_folded).
struct Accounting {
    std::size_t frames_emitted = 0;
    std::size_t dropped_radio = 0;  // frames no gateway heard
    std::size_t packets_received = 0;
    std::size_t dedup_folded = 0;
    std::size_t replay_anomalies = 0;
    std::size_t ignored = 0;
    std::size_t malformed = 0;
    std::size_t stored = 0;
    std::size_t duplicates_rejected = 0;
    std::size_t overheat_skips = 0;

    bool conserved() const {
        return frames_emitted == dropped_radio + stored + ignored + malformed +
                                     replay_anomalies + duplicates_rejected &&
               packets_received == (frames_emitted - dropped_radio) + dedup_folded;
    }

    nlohmann::ordered_json to_json() const {
        return {{"frames_emitted", frames_emitted},
                {"dropped_radio", dropped_radio},
                {"packets_received", packets_received},
                {"dedup_folded", dedup_folded},
                {"replay_anomalies", replay_anomalies},
                {"ignored", ignored},
                {"malformed", malformed},
                {"stored", stored},
                {"duplicates_rejected", duplicates_rejected},
                {"overheat_skips", overheat_skips}};
    }
};

}  // namespace urbansense
