#pragma once

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "s2e/config.hpp"
#include "s2e/fiveg.hpp"
#include "s2e/iolw.hpp"
#include "s2e/kernel.hpp"
#include "s2e/latency_model.hpp"
#include "s2e/plc.hpp"
#include "s2e/rng.hpp"
#include "s2e/safety.hpp"
#include "s2e/stats.hpp"

namespace s2e {

enum class SegmentKind { iol_wire, iolw_air, ethernet, fiveg, plc };
enum class Direction { forward, ret, both };

inline const char* to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::iol_wire: return "iol-wire";
        case SegmentKind::iolw_air: return "iolw-air";
        case SegmentKind::ethernet: return "ethernet";
        case SegmentKind::fiveg: return "fiveg";
        case SegmentKind::plc: return "plc";
    }
    return "?";
}

inline std::optional<SegmentKind> segment_kind_from(std::string_view s) {
    for (auto k : {SegmentKind::iol_wire, SegmentKind::iolw_air, SegmentKind::ethernet, SegmentKind::fiveg,
                   SegmentKind::plc}) {
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

struct SegmentSpec {
    std::string id;
    SegmentKind kind = SegmentKind::ethernet;
    Direction direction = Direction::both;
    LatencyModel model = Constant{0us};  // iol-wire, ethernet, fiveg
    iolw::TransferModel transfer;        // iolw-air
    unsigned track = 1;                  // iolw-air
    std::optional<fiveg::LinkBudgetMeta> link;  // fiveg, report metadata only
};

struct PathSpec {
    std::vector<std::string> forward;
    std::vector<std::string> ret;
};

struct SignalSource {
    std::string device;
    std::string actuator;
    Duration toggle_period = 200ms;
    unsigned sequences = 540;
    Duration sequence_length = 5s;
    std::optional<Duration> sequence_offset;  // nullopt: random per sequence

    unsigned toggles_per_sequence() const {
        return static_cast<unsigned>(ceil_div(sequence_length.count(), toggle_period.count()));
    }
    std::uint64_t total_toggles() const { return std::uint64_t{toggles_per_sequence()} * sequences; }
};

struct CellSpec {
    iolw::CellConfig config;
    std::optional<Duration> phase;  // nullopt: random per run
    std::map<unsigned, std::vector<std::string>> tracks;  // 1-based track index -> devices
    unsigned channels = iolw::kDefaultChannelCount;
    std::set<unsigned> blocklist;
    unsigned min_hop_distance = iolw::kDefaultMinHopDistance;
    std::size_t hop_plan_length = 24;
    std::uint64_t hop_seed = 1;
    std::map<unsigned, iolw::HopPlan> hop_plans;

    std::size_t device_count() const {
        std::size_t n = 0;
        for (const auto& [t, devs] : tracks) n += devs.size();
        return n;
    }
};

struct PlcSpec {
    plc::PlcConfig config;
    bool random_phase = true;
};

struct SafetySpec {
    double approach_speed_mps = 2.0;
    std::map<std::string, Duration> budget;  // per segment id, per traversal
};

struct Scenario {
    std::string text;  // exact input bytes
    CellSpec cell;
    std::vector<SegmentSpec> segments;
    PathSpec path;
    SignalSource source;
    PlcSpec plc;
    SafetySpec safety;

    const SegmentSpec& segment(std::string_view id) const {
        for (const auto& s : segments) {
            if (s.id == id) return s;
        }
        throw std::out_of_range("unknown segment '" + std::string(id) + "'");
    }
    SegmentSpec& segment(std::string_view id) {
        return const_cast<SegmentSpec&>(std::as_const(*this).segment(id));
    }
};

// -- loading ----------------------------------------------------------------------

namespace detail {

using config::DiagKind;
using config::Diagnostic;

/// Typed access to one section; remembers which keys were consumed so leftovers are reported.
class SectionReader {
public:
    SectionReader(const config::Section& s, std::vector<Diagnostic>& diags) : section_(s), diags_(diags) {}

    const config::Entry* find(std::string_view key) {
        for (const auto& e : section_.entries) {
            if (e.key == key) {
                used_.insert(e.key);
                return &e;
            }
        }
        return nullptr;
    }

    const config::Entry* require(std::string_view key) {
        const auto* e = find(key);
        if (!e) {
            diags_.push_back({section_.at, DiagKind::missing_key,
                              "[" + section_.name + "] is missing required key '" + std::string(key) + "'"});
        }
        return e;
    }

    template <typename Parse>
    auto get(std::string_view key, Parse parse, bool required) -> decltype(parse(std::string_view{}, std::declval<std::string&>())) {
        const auto* e = required ? require(key) : find(key);
        if (!e) return std::nullopt;
        std::string err;
        auto v = parse(e->value, err);
        if (!v) diags_.push_back({e->value_at, DiagKind::bad_value, std::string(key) + ": " + err});
        return v;
    }

    std::optional<Duration> duration(std::string_view key, bool required = false) {
        return get(key, config::parse_duration, required);
    }
    std::optional<std::uint64_t> uint(std::string_view key, bool required = false) {
        return get(key, config::parse_uint, required);
    }
    std::optional<double> number(std::string_view key, bool required = false) {
        return get(key, config::parse_double, required);
    }
    std::optional<LatencyModel> model(std::string_view key, bool required = false) {
        const auto* e = required ? require(key) : find(key);
        if (!e) return std::nullopt;
        std::string err;
        auto m = config::parse_model(e->value, err);
        if (!m) {
            diags_.push_back({e->value_at, DiagKind::distribution, std::string(key) + ": " + err});
            return std::nullopt;
        }
        for (const auto& problem : validate_model(*m)) {
            diags_.push_back({e->value_at, DiagKind::distribution, std::string(key) + ": " + problem});
        }
        return m;
    }

    /// "random" or a duration.
    std::optional<std::optional<Duration>> phase(std::string_view key) {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        if (e->value == "random") return std::optional<Duration>{};
        std::string err;
        auto d = config::parse_duration(e->value, err);
        if (!d) {
            diags_.push_back({e->value_at, DiagKind::bad_value, std::string(key) + ": expected 'random' or " + err});
            return std::nullopt;
        }
        return std::optional<Duration>{*d};
    }

    void mark_used(const std::string& key) { used_.insert(key); }

    void report_unknown() {
        for (const auto& e : section_.entries) {
            if (!used_.contains(e.key)) {
                diags_.push_back({e.key_at, DiagKind::unknown_key,
                                  "unknown key '" + e.key + "' in [" + section_.name + "]"});
            }
        }
    }

    const config::Section& section() const { return section_; }

private:
    const config::Section& section_;
    std::vector<Diagnostic>& diags_;
    std::set<std::string> used_;
};

inline void load_cell(SectionReader& r, CellSpec& cell, std::vector<Diagnostic>& diags) {
    auto& c = cell.config;
    if (auto v = r.uint("masters")) c.masters = static_cast<unsigned>(*v);
    if (auto v = r.uint("tracks_per_master")) c.tracks_per_master = static_cast<unsigned>(*v);
    if (auto v = r.uint("slots_per_track")) c.slots_per_track = static_cast<unsigned>(*v);
    if (auto v = r.duration("cycle")) c.cycle = *v;
    if (auto v = r.uint("subcycles_per_cycle")) c.subcycles_per_cycle = static_cast<unsigned>(*v);
    if (auto v = r.duration("subcycle")) c.subcycle = *v;
    if (auto v = r.phase("phase")) cell.phase = *v;
    if (auto v = r.uint("channels")) cell.channels = static_cast<unsigned>(*v);
    if (auto v = r.get("blocklist", config::parse_index_set, false)) cell.blocklist = *v;
    if (auto v = r.uint("min_hop_distance")) cell.min_hop_distance = static_cast<unsigned>(*v);
    if (auto v = r.uint("hop_plan_length")) cell.hop_plan_length = *v;
    if (auto v = r.uint("hop_seed")) cell.hop_seed = *v;

    for (const auto& e : r.section().entries) {
        if (!e.key.starts_with("track.")) continue;
        r.mark_used(e.key);
        std::string err;
        auto idx = config::parse_uint(std::string_view(e.key).substr(6), err);
        if (!idx || *idx == 0) {
            diags.push_back({e.key_at, DiagKind::bad_value, "track key must be 'track.<n>' with n >= 1"});
            continue;
        }
        cell.tracks[static_cast<unsigned>(*idx)] = config::split_list(e.value);
    }

    const config::Location at = r.section().at;
    for (const auto& v : iolw::validate_cell(c)) {
        diags.push_back({at, DiagKind::capacity, "[cell] " + v.message});
    }
    const unsigned total_tracks = c.masters * c.tracks_per_master;
    std::set<std::string> names;
    for (const auto& [idx, devs] : cell.tracks) {
        if (idx > total_tracks) {
            diags.push_back({at, DiagKind::capacity, "track." + std::to_string(idx) + " exceeds the " +
                                                         std::to_string(total_tracks) + " configured track(s)"});
        }
        if (devs.size() > c.slots_per_track) {
            diags.push_back({at, DiagKind::capacity, "track." + std::to_string(idx) + " lists " +
                                                         std::to_string(devs.size()) + " devices but has " +
                                                         std::to_string(c.slots_per_track) + " slots"});
        }
        for (const auto& d : devs) {
            if (d.empty() || !names.insert(d).second) {
                diags.push_back({at, DiagKind::bad_value, "device name '" + d + "' is empty or duplicated"});
            }
        }
    }
    if (cell.device_count() > iolw::kMaxDevices) {
        diags.push_back({at, DiagKind::capacity, "cell lists more than 120 devices"});
    }
    for (unsigned b : cell.blocklist) {
        if (b >= cell.channels) {
            diags.push_back({at, DiagKind::bad_value, "blocklisted channel " + std::to_string(b) + " is outside the grid"});
            break;
        }
    }
    for (unsigned t = 1; t <= std::min(total_tracks, 15u); ++t) {
        try {
            cell.hop_plans[t] = iolw::generate_hop_plan(cell.hop_plan_length, cell.blocklist, cell.min_hop_distance,
                                                        cell.hop_seed, t, cell.channels);
        } catch (const iolw::HopPlanError& ex) {
            diags.push_back({at, DiagKind::bad_value, ex.what()});
            break;
        }
    }
}

inline void load_segment(SectionReader& r, SegmentSpec& seg, const CellSpec& cell, std::vector<Diagnostic>& diags) {
    const auto* kind_entry = r.require("kind");
    if (!kind_entry) return;
    const auto kind = segment_kind_from(kind_entry->value);
    if (!kind) {
        diags.push_back({kind_entry->value_at, DiagKind::unknown_kind,
                         "unknown segment kind '" + kind_entry->value +
                             "' (iol-wire, iolw-air, ethernet, fiveg, plc)"});
        r.report_unknown();
        return;
    }
    seg.kind = *kind;
    if (const auto* d = r.find("direction")) {
        if (d->value == "forward") {
            seg.direction = Direction::forward;
        } else if (d->value == "return") {
            seg.direction = Direction::ret;
        } else if (d->value == "both") {
            seg.direction = Direction::both;
        } else {
            diags.push_back({d->value_at, DiagKind::bad_value, "direction must be forward, return or both"});
        }
    }
    switch (seg.kind) {
        case SegmentKind::iol_wire:
        case SegmentKind::ethernet:
            if (auto m = r.model("model", true)) seg.model = *m;
            break;
        case SegmentKind::fiveg: {
            if (auto m = r.model("model", true)) seg.model = *m;
            fiveg::LinkBudgetMeta meta;
            bool any = false;
            if (auto v = r.number("downlink_mbps")) meta.downlink_mbps = *v, any = true;
            if (auto v = r.number("uplink_mbps")) meta.uplink_mbps = *v, any = true;
            if (auto v = r.number("rssi_floor_dbm")) meta.rssi_floor_dbm = *v, any = true;
            if (const auto* e = r.find("scs_khz")) {
                std::string err;
                auto v = config::parse_uint(e->value, err);
                if (!v || !fiveg::is_supported(static_cast<unsigned>(*v))) {
                    diags.push_back({e->value_at, DiagKind::bad_value,
                                     "scs_khz must be one of 15, 30, 60, 120, 240"});
                } else {
                    meta.scs_khz = static_cast<unsigned>(*v);
                }
                any = true;
            }
            if (meta.downlink_mbps < 0 || meta.uplink_mbps < 0) {
                diags.push_back({r.section().at, DiagKind::bad_value, "throughput must be non-negative"});
            }
            if (any) seg.link = meta;
            break;
        }
        case SegmentKind::iolw_air: {
            seg.transfer.max_attempts = cell.config.subcycles_per_cycle;
            if (auto v = r.duration("completion_offset", true)) seg.transfer.completion_offset = *v;
            if (auto v = r.number("error_prob")) seg.transfer.per_subcycle_error_prob = *v;
            if (auto v = r.uint("max_attempts")) seg.transfer.max_attempts = static_cast<unsigned>(*v);
            if (auto v = r.uint("track")) seg.track = static_cast<unsigned>(*v);
            for (const auto& m : iolw::validate_transfer(seg.transfer, cell.config)) {
                diags.push_back({r.section().at, DiagKind::bad_value, "[segment." + seg.id + "] " + m});
            }
            const unsigned total_tracks = cell.config.masters * cell.config.tracks_per_master;
            if (seg.track < 1 || seg.track > total_tracks) {
                diags.push_back({r.section().at, DiagKind::capacity,
                                 "[segment." + seg.id + "] track " + std::to_string(seg.track) +
                                     " does not exist in the cell"});
            }
            break;
        }
        case SegmentKind::plc:
            break;  // timing lives in [plc]
    }
    r.report_unknown();
}

inline void load_path(SectionReader& r, Scenario& sc, std::vector<Diagnostic>& diags) {
    const auto* fwd = r.require("forward");
    const auto* ret = r.require("return");
    r.report_unknown();
    auto resolve = [&](const config::Entry* e, std::vector<std::string>& out, bool forward) {
        if (!e) return;
        out = config::split_list(e->value);
        if (out.empty()) diags.push_back({e->value_at, DiagKind::path, e->key + " path is empty"});
        for (const auto& id : out) {
            const auto it = std::find_if(sc.segments.begin(), sc.segments.end(),
                                         [&](const SegmentSpec& s) { return s.id == id; });
            if (it == sc.segments.end()) {
                diags.push_back({e->value_at, DiagKind::unresolved_id, "path references unknown segment '" + id + "'"});
                continue;
            }
            if (forward && it->direction == Direction::ret) {
                diags.push_back({e->value_at, DiagKind::path, "segment '" + id + "' is return-only"});
            }
            if (!forward && it->direction == Direction::forward) {
                diags.push_back({e->value_at, DiagKind::path, "segment '" + id + "' is forward-only"});
            }
            if (it->kind == SegmentKind::plc && (!forward || &id != &out.back())) {
                diags.push_back({e->value_at, DiagKind::path,
                                 "plc segment '" + id + "' may only appear as the last forward hop"});
            }
        }
        if (forward && !out.empty()) {
            const auto it = std::find_if(sc.segments.begin(), sc.segments.end(),
                                         [&](const SegmentSpec& s) { return s.id == out.back(); });
            if (it != sc.segments.end() && it->kind != SegmentKind::plc) {
                diags.push_back({e->value_at, DiagKind::path, "forward path must end in a plc segment"});
            }
        }
    };
    resolve(fwd, sc.path.forward, true);
    resolve(ret, sc.path.ret, false);
}

inline void load_source(SectionReader& r, Scenario& sc, std::vector<Diagnostic>& diags) {
    auto& src = sc.source;
    if (const auto* e = r.find("device")) src.device = e->value;
    if (const auto* e = r.find("actuator")) src.actuator = e->value;
    if (auto v = r.duration("toggle_period")) src.toggle_period = *v;
    if (auto v = r.uint("sequences")) src.sequences = static_cast<unsigned>(*v);
    if (auto v = r.duration("sequence_length")) src.sequence_length = *v;
    if (auto v = r.phase("sequence_offset")) src.sequence_offset = *v;
    r.report_unknown();
    const auto at = r.section().at;
    if (src.toggle_period <= 0us) diags.push_back({at, DiagKind::bad_value, "toggle_period must be positive"});
    if (src.sequences < 1) diags.push_back({at, DiagKind::bad_value, "sequences must be at least 1"});
    if (src.sequence_length <= 0us) diags.push_back({at, DiagKind::bad_value, "sequence_length must be positive"});
    auto known = [&](const std::string& name) {
        for (const auto& [t, devs] : sc.cell.tracks) {
            if (std::find(devs.begin(), devs.end(), name) != devs.end()) return true;
        }
        return false;
    };
    for (const auto* name : {&src.device, &src.actuator}) {
        if (!name->empty() && !known(*name)) {
            diags.push_back({at, DiagKind::unresolved_id, "device '" + *name + "' is not listed in [cell]"});
        }
    }
}

inline void load_plc(SectionReader& r, PlcSpec& p, std::vector<Diagnostic>& diags) {
    if (auto v = r.duration("task_cycle")) p.config.task_cycle = *v;
    if (auto v = r.duration("query_cycle")) p.config.query_cycle = *v;
    if (auto v = r.model("jitter")) p.config.processing_jitter = *v;
    if (auto v = r.phase("phase")) {
        p.random_phase = !v->has_value();
        if (*v) p.config.phase = **v;
    }
    r.report_unknown();
    for (const auto& m : plc::validate(p.config)) diags.push_back({r.section().at, DiagKind::bad_value, "[plc] " + m});
}

inline void load_safety(SectionReader& r, Scenario& sc, std::vector<Diagnostic>& diags) {
    if (auto v = r.number("approach_speed")) sc.safety.approach_speed_mps = *v;
    if (!(sc.safety.approach_speed_mps > 0.0)) {
        diags.push_back({r.section().at, DiagKind::bad_value, "approach_speed must be positive"});
    }
    for (const auto& e : r.section().entries) {
        if (!e.key.starts_with("max.")) continue;
        r.mark_used(e.key);
        const std::string id = e.key.substr(4);
        std::string err;
        auto d = config::parse_duration(e.value, err);
        if (!d) {
            diags.push_back({e.value_at, DiagKind::bad_value, e.key + ": " + err});
            continue;
        }
        if (std::none_of(sc.segments.begin(), sc.segments.end(), [&](const auto& s) { return s.id == id; })) {
            diags.push_back({e.key_at, DiagKind::unresolved_id, "budget for unknown segment '" + id + "'"});
            continue;
        }
        sc.safety.budget[id] = *d;
    }
    r.report_unknown();
}

}  // namespace detail

/// Largest latency one traversal of `seg` can contribute under this scenario.
inline Duration segment_bound(const Scenario& sc, const SegmentSpec& seg) {
    switch (seg.kind) {
        case SegmentKind::iolw_air:
            return iolw::max_transfer_latency(seg.transfer, sc.cell.config);
        case SegmentKind::plc:
            // Poll wait < query_cycle, then publication at most two task cycles later.
            return sc.plc.config.query_cycle - 1us + 2 * sc.plc.config.task_cycle +
                   support(sc.plc.config.processing_jitter).second;
        default:
            return support(seg.model).second;
    }
}

/// Loads and validates a scenario; throws config::ConfigError carrying every diagnostic.
inline Scenario load_scenario(std::string_view text) {
    using config::DiagKind;
    std::vector<config::Diagnostic> diags;
    const config::Document doc = config::parse_document(text, diags);

    Scenario sc;
    sc.text = std::string(text);

    auto find_section = [&](std::string_view name) -> const config::Section* {
        for (const auto& s : doc.sections) {
            if (s.name == name) return &s;
        }
        return nullptr;
    };
    for (const auto& s : doc.sections) {
        static const std::set<std::string> known{"cell", "path", "source", "plc", "safety"};
        if (!known.contains(s.name) && !s.name.starts_with("segment.")) {
            diags.push_back({s.at, DiagKind::unknown_section, "unknown section [" + s.name + "]"});
        }
    }

    if (const auto* s = find_section("cell")) {
        detail::SectionReader r(*s, diags);
        detail::load_cell(r, sc.cell, diags);
        r.report_unknown();
    } else {
        diags.push_back({{0, 0}, DiagKind::missing_key, "missing [cell] section"});
    }
    for (const auto& s : doc.sections) {
        if (!s.name.starts_with("segment.")) continue;
        SegmentSpec seg;
        seg.id = s.name.substr(8);
        if (seg.id.empty()) {
            diags.push_back({s.at, DiagKind::syntax, "segment section needs an id: [segment.<id>]"});
            continue;
        }
        detail::SectionReader r(s, diags);
        detail::load_segment(r, seg, sc.cell, diags);
        sc.segments.push_back(std::move(seg));
    }
    if (const auto* s = find_section("plc")) {
        detail::SectionReader r(*s, diags);
        detail::load_plc(r, sc.plc, diags);
    }
    if (const auto* s = find_section("path")) {
        detail::SectionReader r(*s, diags);
        detail::load_path(r, sc, diags);
    } else {
        diags.push_back({{0, 0}, DiagKind::missing_key, "missing [path] section"});
    }
    if (const auto* s = find_section("source")) {
        detail::SectionReader r(*s, diags);
        detail::load_source(r, sc, diags);
    }
    if (const auto* s = find_section("safety")) {
        detail::SectionReader r(*s, diags);
        detail::load_safety(r, sc, diags);
        if (diags.empty()) {
            for (const auto& [id, max] : sc.safety.budget) {
                const Duration bound = segment_bound(sc, sc.segment(id));
                if (max < bound) {
                    diags.push_back({s->at, DiagKind::budget,
                                     "budget max." + id + " = " + std::to_string(max.count()) +
                                         "us is below the segment's reachable maximum of " +
                                         std::to_string(bound.count()) + "us"});
                }
            }
        }
    }

    if (!diags.empty()) {
        std::stable_sort(diags.begin(), diags.end(), [](const auto& a, const auto& b) {
            return a.where.line != b.where.line ? a.where.line < b.where.line : a.where.column < b.where.column;
        });
        throw config::ConfigError(std::move(diags));
    }
    return sc;
}

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Scenario load_scenario_file(const std::string& path) { return load_scenario(read_file(path)); }

// -- running ------------------------------------------------------------------------

struct Stage {
    std::string segment;
    SegmentKind kind;
    bool forward;
    friend bool operator==(const Stage&, const Stage&) = default;
};

struct Sample {
    std::uint32_t toggle = 0;  // global toggle index
    SimTime toggle_time;
    Duration end_to_end{0};
    std::vector<Duration> stages;  // one per hop, same order as RunResult::stages
    friend bool operator==(const Sample&, const Sample&) = default;
};

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<Stage> stages;
    std::vector<Sample> samples;  // in toggle order, losses excluded
    std::uint64_t toggles = 0;
    std::uint64_t losses = 0;
    std::uint64_t clamps = 0;
    std::uint64_t events = 0;
    std::uint64_t trace_hash = 0;
    Duration iolw_phase{0};
    Duration plc_phase{0};
    std::string config_text;
    friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct RunOptions {
    bool bypass_plc = false;  // diagnostic: forward path without PLC polling and task alignment
    bool keep_trace = false;
};

/// The stage list for a scenario: forward hops then return hops.
inline std::vector<Stage> stages_of(const Scenario& sc) {
    std::vector<Stage> out;
    for (const auto& id : sc.path.forward) out.push_back({id, sc.segment(id).kind, true});
    for (const auto& id : sc.path.ret) out.push_back({id, sc.segment(id).kind, false});
    return out;
}

/// Index of the first forward hop after the W-Master holds the data (after the last
/// forward iolw-air hop); the PLC poll happens there.
inline std::size_t poll_point(const std::vector<Stage>& stages) {
    std::size_t at = 0;
    for (std::size_t i = 0; i < stages.size() && stages[i].forward; ++i) {
        if (stages[i].kind == SegmentKind::iolw_air) at = i + 1;
    }
    return at;
}

namespace detail {

class Runner {
public:
    Runner(const Scenario& sc, std::uint64_t seed, RunOptions opts)
        : sc_(sc), opts_(opts), kernel_(opts.keep_trace), plc_(sc.plc.config) {
        result_.seed = seed;
        result_.stages = stages_of(sc);
        result_.config_text = sc.text;
        poll_at_ = poll_point(result_.stages);
        for (const auto& st : result_.stages) {
            if (!streams_.contains(st.segment)) {
                streams_.emplace(st.segment, RngStream(seed, stream_id_for("segment:" + st.segment)));
            }
        }
        RngStream phases(seed, stream_id_for("phase"));
        result_.iolw_phase = sc.cell.phase ? *sc.cell.phase : Duration{phases.between(0, sc.cell.config.cycle.count() - 1)};
        if (sc.plc.random_phase) plc_.phase = Duration{phases.between(0, plc_.query_cycle.count() - 1)};
        result_.plc_phase = plc_.phase;
    }

    RunResult run() {
        const auto& src = sc_.source;
        RngStream offsets(result_.seed, stream_id_for("source"));
        const unsigned per_seq = src.toggles_per_sequence();
        tokens_.resize(src.total_toggles());
        std::uint32_t index = 0;
        for (unsigned s = 0; s < src.sequences; ++s) {
            const Duration offset =
                src.sequence_offset ? *src.sequence_offset : Duration{offsets.between(0, src.toggle_period.count() - 1)};
            const SimTime start = SimTime{(src.sequence_length + src.toggle_period) * static_cast<std::int64_t>(s) + offset};
            for (unsigned k = 0; k < per_seq; ++k, ++index) {
                const SimTime t = start + src.toggle_period * static_cast<std::int64_t>(k);
                tokens_[index].toggle_time = t;
                kernel_.schedule(t, EventKind::source_toggle, tag(index, 0),
                                 [this, index](Kernel& k) { advance(index, 0, k.now()); });
            }
        }
        result_.toggles = tokens_.size();
        kernel_.run();
        result_.events = kernel_.dispatched();
        result_.trace_hash = kernel_.trace_hash();
        trace_ = kernel_.trace();

        result_.samples.reserve(tokens_.size());
        for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
            auto& tok = tokens_[i];
            if (tok.lost) continue;
            Duration total{0};
            for (auto d : tok.stages) total += d;
            result_.samples.push_back({i, tok.toggle_time, total, std::move(tok.stages)});
        }
        return std::move(result_);
    }

    const std::vector<TraceEntry>& trace() const { return trace_; }

private:
    struct Token {
        SimTime toggle_time;
        std::vector<Duration> stages;
        Duration poll_wait{0};
        bool polled = false;
        bool lost = false;
    };

    static std::uint64_t tag(std::uint32_t token, std::size_t hop) { return std::uint64_t{token} << 8 | hop; }

    // Data reaches hop `hop` at `now`.
    void advance(std::uint32_t index, std::size_t hop, SimTime now) {
        auto& tok = tokens_[index];
        if (tok.stages.empty()) tok.stages.reserve(result_.stages.size());
        if (hop == result_.stages.size()) return;  // delivered at the actuator

        if (hop == poll_at_ && !opts_.bypass_plc && !tok.polled) {
            tok.polled = true;
            const SimTime poll = plc::next_poll(now, plc_);
            tok.poll_wait = poll - now;
            kernel_.schedule(poll, EventKind::poll_pickup, tag(index, hop) | 0x80,
                             [this, index, hop](Kernel& k) { advance(index, hop, k.now()); });
            return;
        }

        const Stage& st = result_.stages[hop];
        const SegmentSpec& seg = sc_.segment(st.segment);
        auto& rng = streams_.at(st.segment);
        Duration d{0};
        EventKind kind = EventKind::segment_arrival;
        switch (seg.kind) {
            case SegmentKind::iolw_air: {
                auto lat = iolw::transfer_latency(now, seg.transfer, sc_.cell.config, rng, result_.iolw_phase);
                if (!lat) {
                    tok.lost = true;
                    ++result_.losses;
                    return;
                }
                d = *lat;
                kind = EventKind::cycle_boundary;
                break;
            }
            case SegmentKind::plc:
                if (opts_.bypass_plc) {
                    d = 0us;
                } else {
                    d = tok.poll_wait + (plc::align_to_task_cycle(now, plc_, rng) - now);
                }
                kind = EventKind::plc_cycle;
                break;
            default:
                d = sample(seg.model, rng, &result_.clamps);
                break;
        }
        tok.stages.push_back(d);
        // The plc stage carries the earlier poll wait, so its event fires at now + (d - poll_wait).
        const Duration step = seg.kind == SegmentKind::plc ? d - tok.poll_wait : d;
        kernel_.schedule(now + step, kind, tag(index, hop + 1),
                         [this, index, hop](Kernel& k) { advance(index, hop + 1, k.now()); });
    }

    const Scenario& sc_;
    RunOptions opts_;
    Kernel kernel_;
    plc::PlcConfig plc_;
    std::size_t poll_at_ = 0;
    std::map<std::string, RngStream> streams_;
    std::vector<Token> tokens_;
    RunResult result_;
    std::vector<TraceEntry> trace_;
};

}  // namespace detail

inline RunResult run(const Scenario& sc, std::uint64_t seed, RunOptions opts = {}) {
    return detail::Runner(sc, seed, opts).run();
}

/// Run and also return the kernel's full dispatch trace.
inline std::pair<RunResult, std::vector<TraceEntry>> run_traced(const Scenario& sc, std::uint64_t seed) {
    detail::Runner runner(sc, seed, {false, true});
    RunResult r = runner.run();
    return {std::move(r), runner.trace()};
}

// -- aggregation ----------------------------------------------------------------------

struct RunStats {
    std::vector<Stage> stages;
    std::vector<LatencyStats> per_stage;
    std::map<std::string, LatencyStats> per_segment;
    LatencyStats wmaster_to_plc;  // poll wait + network + PLC, i.e. W-Master to PLC output
    LatencyStats end_to_end;
    std::uint64_t toggles = 0;
    std::uint64_t losses = 0;
    std::uint64_t clamps = 0;

    RunStats& merge(const RunStats& o) {
        if (o.stages != stages) throw std::invalid_argument("RunStats::merge: different stage layouts");
        for (std::size_t i = 0; i < per_stage.size(); ++i) per_stage[i].merge(o.per_stage[i]);
        for (const auto& [id, s] : o.per_segment) per_segment.at(id).merge(s);
        wmaster_to_plc.merge(o.wmaster_to_plc);
        end_to_end.merge(o.end_to_end);
        toggles += o.toggles;
        losses += o.losses;
        clamps += o.clamps;
        return *this;
    }

    friend bool operator==(const RunStats&, const RunStats&) = default;
};

inline RunStats summarize(const RunResult& r) {
    RunStats s;
    s.stages = r.stages;
    s.per_stage.assign(r.stages.size(), LatencyStats{});
    for (const auto& st : r.stages) s.per_segment.try_emplace(st.segment);
    const std::size_t poll_at = poll_point(r.stages);
    for (const auto& sample : r.samples) {
        Duration block{0};
        for (std::size_t i = 0; i < sample.stages.size(); ++i) {
            s.per_stage[i].add(sample.stages[i]);
            s.per_segment.at(r.stages[i].segment).add(sample.stages[i]);
            if (r.stages[i].forward && i >= poll_at) block += sample.stages[i];
        }
        s.wmaster_to_plc.add(block);
        s.end_to_end.add(sample.end_to_end);
    }
    s.end_to_end.add_loss(r.losses);
    s.toggles = r.toggles;
    s.losses = r.losses;
    s.clamps = r.clamps;
    return s;
}

struct SweepResult {
    std::vector<RunResult> runs;  // one per seed, in the order given
    RunStats merged;
};

/// Independent runs per seed, executed on up to `parallelism` threads.
inline SweepResult sweep(const Scenario& sc, std::span<const std::uint64_t> seeds, unsigned parallelism = 1) {
    if (seeds.empty()) throw std::invalid_argument("sweep: at least one seed required");
    SweepResult out;
    out.runs.resize(seeds.size());
    parallelism = std::clamp<unsigned>(parallelism, 1, static_cast<unsigned>(seeds.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) out.runs[i] = run(sc, seeds[i]);
    };
    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < parallelism; ++t) pool.emplace_back(worker);
    }
    out.merged = summarize(out.runs.front());
    for (std::size_t i = 1; i < out.runs.size(); ++i) out.merged.merge(summarize(out.runs[i]));
    return out;
}

// -- safety -----------------------------------------------------------------------------

/// Per-traversal maxima for the full path, from the [safety] budget where given and
/// otherwise from the segment's reachable maximum.
inline SafetyParams safety_params(const Scenario& sc) {
    SafetyParams p;
    p.approach_speed_mps = sc.safety.approach_speed_mps;
    for (const auto& st : stages_of(sc)) {
        const auto it = sc.safety.budget.find(st.segment);
        p.segment_maxima.emplace_back(st.segment,
                                      it != sc.safety.budget.end() ? it->second : segment_bound(sc, sc.segment(st.segment)));
    }
    return p;
}

/// Same calculus over what a run actually observed: per-stage maxima.
inline SafetyParams observed_safety_params(const Scenario& sc, const RunStats& stats) {
    SafetyParams p;
    p.approach_speed_mps = sc.safety.approach_speed_mps;
    for (std::size_t i = 0; i < stats.stages.size(); ++i) {
        p.segment_maxima.emplace_back(stats.stages[i].segment,
                                      stats.per_stage[i].empty() ? 0us : stats.per_stage[i].max());
    }
    return p;
}

}  // namespace s2e
