// simctl: scenario-driven LoRaWAN telemetry simulator.
//   run     execute a deployment plan and write run artifacts
//   verify  re-evaluate a run directory's expectations
//   report  emit the SVG plot and summary CSV for a run directory
//   replay  feed a packet trace back through dedup/webhook/store
//   export  query a store file to CSV

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "urbansense/analysis.hpp"
#include "urbansense/artifacts.hpp"
#include "urbansense/report.hpp"
#include "urbansense/scenario.hpp"
#include "urbansense/sim.hpp"
#include "urbansense/verify.hpp"

namespace fs = std::filesystem;
using namespace urbansense;

namespace {

int print_checks(const std::vector<CheckOutcome>& checks) {
    bool all = true;
    for (const auto& c : checks) {
        std::printf("%s %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        all = all && c.pass;
    }
    if (checks.empty()) std::printf("no expectations declared\n");
    return all ? 0 : 1;
}

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
    Scenario sc = parse_scenario(scenario_path);
    if (seed) sc.seed = *seed;
    RunResult run = run_scenario(sc);
    if (!run.accounting.conserved()) {
        std::fprintf(stderr, "accounting identity violated:\n%s\n",
                     run.accounting.to_json().dump(2).c_str());
        return 2;
    }
    auto checks = evaluate_all(sc, run);
    fs::path dir = out_dir.empty() ? fs::path("runs") / sc.name : fs::path(out_dir);
    save_run(dir, scenario_path, sc, run, checks);
    std::printf("run '%s': %zu stored / %zu emitted, artifacts in %s\n", sc.name.c_str(),
                run.accounting.stored, run.accounting.frames_emitted, dir.string().c_str());
    return print_checks(checks);
}

int cmd_verify(const std::string& run_dir) {
    LoadedRun lr = load_run(run_dir);
    return print_checks(evaluate_all(lr.scenario, lr.run));
}

int cmd_report(const std::string& run_dir) {
    LoadedRun lr = load_run(run_dir);
    const Scenario& sc = lr.scenario;
    std::vector<Series> series;
    std::vector<SummaryRow> rows;
    for (const auto& [id, stats] : lr.run.nodes) {
        auto readings = lr.run.store.all_readings(id);
        if (!readings.empty()) series.push_back(series_from_readings(id, readings));
        SummaryRow row;
        row.device_id = id;
        row.readings = readings.size();
        row.losses = stats.frames_emitted - stats.stored + stats.skip_times_min.size();
        row.battery_consumed_mah = stats.consumed_mah;
        row.lifetime_projection_h = stats.lifetime_estimate_h;
        // fit over the night hours if a usable cooldown exists
        for (const auto& e : sc.expectations) {
            if ((e.kind == "k_recover" || e.kind == "k_order") && e.device == id) {
                try {
                    auto full = series_from_readings(id, readings);
                    std::int64_t t0 = sc.start_epoch_s, t1 = sc.start_epoch_s + (1LL << 40);
                    if (e.window_abs_min) {
                        t0 = sc.start_epoch_s +
                             static_cast<std::int64_t>(e.window_abs_min->first * 60);
                        t1 = sc.start_epoch_s +
                             static_cast<std::int64_t>(e.window_abs_min->second * 60);
                    }
                    row.k_hat_per_h = cooling_fit(full, t0, t1, e.floor_c);
                } catch (const AnalysisError&) {
                }
                break;
            }
        }
        rows.push_back(std::move(row));
    }
    std::optional<WeatherSeries> weather;
    if (!sc.weather_csv.empty()) {
        fs::path wp = fs::path(run_dir) / ".." / sc.weather_csv;
        fs::path direct = fs::path(sc.weather_csv);
        weather = load_weather_csv(fs::exists(direct) ? direct.string()
                                                      : (fs::path(run_dir) / sc.weather_csv).string(),
                                   sc.weather_cadence_min);
    }
    fs::path svg = fs::path(run_dir) / (sc.name + ".svg");
    fs::path csv = fs::path(run_dir) / "summary.csv";
    if (!series.empty())
        write_svg_plot(svg.string(), series, weather ? &*weather : nullptr);
    write_summary_csv(csv.string(), rows);
    std::printf("wrote %s and %s\n", svg.string().c_str(), csv.string().c_str());
    return 0;
}

int cmd_replay(const std::string& trace_path, const std::string& registry_path,
               const std::string& store_template_path, const std::string& out_store,
               const std::string& start_utc) {
    auto epoch = parse_iso8601(start_utc);
    if (!epoch) {
        std::fprintf(stderr, "--start-utc: expected ISO-8601 UTC\n");
        return 2;
    }
    std::ifstream tf(trace_path);
    if (!tf) {
        std::fprintf(stderr, "cannot read %s\n", trace_path.c_str());
        return 2;
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(tf, line)) lines.push_back(line);
    DeviceRegistry registry = DeviceRegistry::load(registry_path);
    Store tmpl;
    if (!store_template_path.empty()) {
        tmpl = Store::load(store_template_path);
    } else {
        // no template: build the minimal entity graph the registry implies
        for (const auto& [eui, e] : registry.entries()) {
            tmpl.upsert_project({e.project_id, e.project_id, ""});
            tmpl.upsert_device({e.device_id, eui, e.project_id, "", ""});
        }
    }
    ReplayResult res = replay_trace(lines, registry, *epoch, std::move(tmpl));
    res.store.save(out_store);
    std::printf(
        "replayed %zu packets: %zu stored, %zu folded, %zu duplicate, %zu ignored, %zu malformed\n",
        res.accounting.packets_received, res.accounting.stored, res.accounting.dedup_folded,
        res.accounting.duplicates_rejected, res.accounting.ignored, res.accounting.malformed);
    return 0;
}

int cmd_export(const std::string& store_path, const std::string& device, const std::string& from,
               const std::string& to, const std::string& out_csv) {
    Store store = Store::load(store_path);
    auto t0 = parse_iso8601(from);
    auto t1 = parse_iso8601(to);
    if (!t0 || !t1) {
        std::fprintf(stderr, "--from/--to: expected ISO-8601 UTC\n");
        return 2;
    }
    auto rows = store.query_readings(device, *t0, *t1);
    if (out_csv.empty())
        store.export_csv(std::cout, rows);
    else
        store.export_csv_file(out_csv, rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"urbansense telemetry simulator"};
    app.require_subcommand(1);

    std::string scenario_path, run_dir, out_dir;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "run a scenario");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "artifact directory (default runs/<name>)");

    auto* verify = app.add_subcommand("verify", "re-check a run directory");
    verify->add_option("run_dir", run_dir, "run directory")->required();

    auto* report = app.add_subcommand("report", "plot + summary for a run directory");
    report->add_option("run_dir", run_dir, "run directory")->required();

    std::string trace_path, registry_path, store_template, out_store, start_utc;
    auto* replay = app.add_subcommand("replay", "replay a packet trace");
    replay->add_option("trace", trace_path, "trace.log file")->required();
    replay->add_option("--registry", registry_path, "registry.json file")->required();
    replay->add_option("--store-template", store_template, "store with entities, no readings");
    replay->add_option("--out", out_store, "output store file")->default_val("replayed_store.json");
    replay->add_option("--start-utc", start_utc, "epoch base of the trace")->required();

    std::string store_path, device, from_ts, to_ts, out_csv;
    auto* exp = app.add_subcommand("export", "query a store to CSV");
    exp->add_option("store", store_path, "store.json file")->required();
    exp->add_option("--device", device, "device id")->required();
    exp->add_option("--from", from_ts, "ISO-8601 start (inclusive)")->required();
    exp->add_option("--to", to_ts, "ISO-8601 end (exclusive)")->required();
    exp->add_option("--out", out_csv, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(scenario_path, seed, out_dir);
        if (*verify) return cmd_verify(run_dir);
        if (*report) return cmd_report(run_dir);
        if (*replay) return cmd_replay(trace_path, registry_path, store_template, out_store, start_utc);
        if (*exp) return cmd_export(store_path, device, from_ts, to_ts, out_csv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
