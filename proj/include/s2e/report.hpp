#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2e/scenario.hpp"

#ifndef S2E_VERSION
#define S2E_VERSION "0.0.0"
#endif

namespace s2e::report {

inline constexpr int kSchemaVersion = 1;

enum class Format { json, csv };

struct Metadata {
    std::vector<std::uint64_t> seeds;
    bool deterministic = false;
};

/// Histogram panels in the layout of the measurement figure: wired IO-Link, IOLW air
/// interface, W-Master to PLC output, and the whole response.
struct Panels {
    LatencyStats iol;
    LatencyStats iolw;
    LatencyStats wmaster_to_plc;
    LatencyStats end_to_end;
};

inline Panels panels_of(const RunStats& s) {
    Panels p;
    for (std::size_t i = 0; i < s.stages.size(); ++i) {
        if (!s.stages[i].forward) continue;
        if (s.stages[i].kind == SegmentKind::iol_wire) p.iol.merge(s.per_stage[i]);
        if (s.stages[i].kind == SegmentKind::iolw_air) p.iolw.merge(s.per_stage[i]);
    }
    p.wmaster_to_plc = s.wmaster_to_plc;
    p.end_to_end = s.end_to_end;
    return p;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string config_hash(std::string_view text) { return "fnv1a64:" + hex64(fnv1a64(text)); }

inline std::string timestamp(bool deterministic) {
    if (deterministic) return "1970-01-01T00:00:00Z";
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::ordered_json stats_json(const LatencyStats& s) {
    nlohmann::ordered_json j;
    j["count"] = s.count();
    j["losses"] = s.losses();
    if (s.empty()) return j;
    j["mean_us"] = s.mean_us();
    j["min_us"] = s.min().count();
    j["max_us"] = s.max().count();
    j["p50_us"] = s.percentile(50).count();
    j["p99_us"] = s.percentile(99).count();
    return j;
}

inline nlohmann::ordered_json histogram_json(const LatencyStats& s) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [edge, n] : s.histogram()) {
        rows.push_back({edge.count(), static_cast<double>(n) / static_cast<double>(s.count())});
    }
    return rows;
}

inline nlohmann::ordered_json cdf_json(const LatencyStats& s) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    if (s.empty()) return rows;
    for (const auto& p : s.cdf()) rows.push_back({p.upper_edge.count(), p.cumulative});
    return rows;
}

inline nlohmann::ordered_json safety_json(const Scenario& sc, const RunStats& stats) {
    const SafetyParams budget = safety_params(sc);
    const Duration sfrt = worst_case_sfrt(budget);
    const SafetyDistance dist = safety_distance(sfrt, budget.approach_speed_mps);
    nlohmann::ordered_json j;
    j["approach_speed_mps"] = budget.approach_speed_mps;
    j["worst_case_sfrt_us"] = sfrt.count();
    j["safety_distance_m"] = dist.meters;
    j["safety_distance_mm"] = dist.millimeters;
    j["safety_distance_presented_m"] = dist.presented_m;
    nlohmann::ordered_json maxima = nlohmann::ordered_json::array();
    for (const auto& [id, max] : budget.segment_maxima) maxima.push_back({{"segment", id}, {"max_us", max.count()}});
    j["segment_maxima"] = maxima;
    if (!stats.end_to_end.empty()) {
        j["observed_sum_of_maxima_us"] = worst_case_sfrt(observed_safety_params(sc, stats)).count();
        j["observed_max_us"] = stats.end_to_end.max().count();
    }
    return j;
}

inline nlohmann::ordered_json summary_json(const Scenario& sc, const RunStats& stats) {
    const Panels p = panels_of(stats);
    nlohmann::ordered_json j;
    j["toggles"] = stats.toggles;
    j["samples"] = stats.end_to_end.count();
    j["losses"] = stats.losses;
    j["truncation_clamps"] = stats.clamps;
    j["iol"] = stats_json(p.iol);
    j["iolw"] = stats_json(p.iolw);
    j["wmaster_to_plc"] = stats_json(p.wmaster_to_plc);
    j["end_to_end"] = stats_json(p.end_to_end);
    if (!p.end_to_end.empty()) j["end_to_end"]["cdf_at_99ms"] = p.end_to_end.cdf_at(99ms);
    nlohmann::ordered_json segs;
    for (const auto& [id, s] : stats.per_segment) segs[id] = stats_json(s);
    j["segments"] = segs;
    j["safety"] = safety_json(sc, stats);
    return j;
}

inline nlohmann::ordered_json scenario_metadata(const Scenario& sc) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json plans;
    for (const auto& [track, plan] : sc.cell.hop_plans) plans[std::to_string(track)] = plan.channels;
    j["hop_plans"] = plans;
    nlohmann::ordered_json links;
    for (const auto& seg : sc.segments) {
        if (!seg.link) continue;
        links[seg.id] = {{"scs_khz", seg.link->scs_khz},
                         {"downlink_mbps", seg.link->downlink_mbps},
                         {"uplink_mbps", seg.link->uplink_mbps},
                         {"rssi_floor_dbm", seg.link->rssi_floor_dbm}};
    }
    j["links"] = links;
    j["assumptions"] = {
        "5G latency shape and bounds are calibrated, not measured",
        "PLC samples inputs at task-cycle start and publishes outputs at cycle end",
        "segment maxima in the safety budget are a calibrated breakdown of the total",
    };
    return j;
}

/// Full report for a single run or a merged sweep.
inline nlohmann::ordered_json build(const Scenario& sc, const RunStats& stats, const Metadata& meta,
                                    const std::vector<RunResult>* per_seed = nullptr) {
    const Panels p = panels_of(stats);
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["tool"] = {{"name", "s2esim"}, {"version", S2E_VERSION}};
    j["generated_at"] = timestamp(meta.deterministic);
    j["config"] = {{"hash", config_hash(sc.text)}, {"text", sc.text}};
    j["seeds"] = meta.seeds;
    j["summary"] = summary_json(sc, stats);
    j["histograms"] = {{"iol", histogram_json(p.iol)},
                       {"iolw", histogram_json(p.iolw)},
                       {"wmaster_to_plc", histogram_json(p.wmaster_to_plc)},
                       {"end_to_end", histogram_json(p.end_to_end)}};
    j["end_to_end_cdf"] = cdf_json(p.end_to_end);
    j["metadata"] = scenario_metadata(sc);
    if (per_seed) {
        nlohmann::ordered_json runs = nlohmann::ordered_json::array();
        for (const auto& r : *per_seed) {
            nlohmann::ordered_json e;
            e["seed"] = r.seed;
            e["iolw_phase_us"] = r.iolw_phase.count();
            e["plc_phase_us"] = r.plc_phase.count();
            e["summary"] = summary_json(sc, summarize(r));
            runs.push_back(std::move(e));
        }
        j["per_seed"] = std::move(runs);
    }
    return j;
}

// -- writers ---------------------------------------------------------------------------

class WriteError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw WriteError("write failed for '" + path.string() + "'");
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8f", v);
    return buf;
}

inline std::string histogram_csv(const LatencyStats& s) {
    std::string out = "time_us,frequency\n";
    for (const auto& [edge, n] : s.histogram()) {
        out += std::to_string(edge.count()) + "," +
               fmt_double(static_cast<double>(n) / static_cast<double>(s.count())) + "\n";
    }
    return out;
}

inline std::string cdf_csv(const LatencyStats& s) {
    std::string out = "time_us,cumulative\n";
    if (s.empty()) return out;
    for (const auto& p : s.cdf()) out += std::to_string(p.upper_edge.count()) + "," + fmt_double(p.cumulative) + "\n";
    return out;
}

/// Flattens the summary object into key,value rows ("end_to_end.mean_us,66812.3").
inline std::string summary_csv(const nlohmann::ordered_json& summary) {
    std::string out = "key,value\n";
    auto walk = [&](auto&& self, const nlohmann::ordered_json& node, const std::string& prefix) -> void {
        if (node.is_object()) {
            for (const auto& [k, v] : node.items()) self(self, v, prefix.empty() ? k : prefix + "." + k);
        } else if (node.is_array()) {
            for (std::size_t i = 0; i < node.size(); ++i) self(self, node[i], prefix + "." + std::to_string(i));
        } else {
            out += prefix + "," + (node.is_string() ? node.get<std::string>() : node.dump()) + "\n";
        }
    };
    walk(walk, summary, "");
    return out;
}

/// Writes report files into `dir` and returns their names.
inline std::vector<std::string> write(const std::filesystem::path& dir, Format format, const Scenario& sc,
                                      const RunStats& stats, const Metadata& meta,
                                      const std::vector<RunResult>* per_seed = nullptr) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw WriteError("cannot create '" + dir.string() + "': " + ec.message());
    const auto doc = build(sc, stats, meta, per_seed);
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        written.push_back(name);
    };
    if (format == Format::json) {
        put("report.json", doc.dump(2) + "\n");
        return written;
    }
    const Panels p = panels_of(stats);
    put("panel_a_iol.csv", histogram_csv(p.iol));
    put("panel_b_iolw.csv", histogram_csv(p.iolw));
    put("panel_c_wmaster_to_plc.csv", histogram_csv(p.wmaster_to_plc));
    put("panel_d_end_to_end.csv", histogram_csv(p.end_to_end));
    put("panel_d_end_to_end_cdf.csv", cdf_csv(p.end_to_end));
    for (const auto& [id, s] : stats.per_segment) put("segment_" + id + ".csv", histogram_csv(s));
    nlohmann::ordered_json head = doc;
    for (const char* k : {"histograms", "end_to_end_cdf", "config"}) head.erase(k);
    head["config_hash"] = config_hash(sc.text);
    put("summary.csv", summary_csv(head));
    put("scenario.echo", sc.text);
    return written;
}

}  // namespace s2e::report
