#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2e/rng.hpp"
#include "s2e/time.hpp"

namespace s2e::iolw {

inline constexpr unsigned kMaxMasters = 3;
inline constexpr unsigned kMaxTracksPerMaster = 5;
inline constexpr unsigned kMaxSlotsPerTrack = 8;
inline constexpr unsigned kMaxDevices = kMaxMasters * kMaxTracksPerMaster * kMaxSlotsPerTrack;  // 120

struct CellConfig {
    unsigned masters = 1;
    unsigned tracks_per_master = 1;
    unsigned slots_per_track = 8;
    Duration cycle = 5000us;
    unsigned subcycles_per_cycle = 3;
    Duration subcycle = 1664us;

    unsigned device_capacity() const { return masters * tracks_per_master * slots_per_track; }
};

struct CellViolation {
    std::string field;
    std::string message;
};

/// Returns every violated capacity or timing constraint; empty means the cell is valid.
inline std::vector<CellViolation> validate_cell(const CellConfig& cfg) {
    std::vector<CellViolation> out;
    auto range = [&](const char* field, unsigned value, unsigned max) {
        if (value < 1 || value > max) {
            out.push_back({field, std::string(field) + " = " + std::to_string(value) + " outside 1.." +
                                      std::to_string(max)});
        }
    };
    range("masters", cfg.masters, kMaxMasters);
    range("tracks_per_master", cfg.tracks_per_master, kMaxTracksPerMaster);
    range("slots_per_track", cfg.slots_per_track, kMaxSlotsPerTrack);
    if (cfg.device_capacity() > kMaxDevices) {
        out.push_back({"devices", "cell provides " + std::to_string(cfg.device_capacity()) +
                                      " device slots, limit is " + std::to_string(kMaxDevices)});
    }
    if (cfg.cycle <= 0us) out.push_back({"cycle", "cycle must be positive"});
    if (cfg.subcycle <= 0us) out.push_back({"subcycle", "subcycle must be positive"});
    if (cfg.subcycles_per_cycle < 1) out.push_back({"subcycles_per_cycle", "at least one sub-cycle required"});
    if (cfg.subcycle * static_cast<std::int64_t>(cfg.subcycles_per_cycle) > cfg.cycle) {
        out.push_back({"subcycle", std::to_string(cfg.subcycles_per_cycle) + " x " +
                                       std::to_string(cfg.subcycle.count()) + "us exceeds cycle of " +
                                       std::to_string(cfg.cycle.count()) + "us"});
    }
    return out;
}

/// First sub-cycle boundary at or after t. Sub-cycles sit contiguously from each cycle start,
/// so boundaries are phase + k*cycle + j*subcycle for j < subcycles_per_cycle.
inline SimTime next_subcycle_start(SimTime t, const CellConfig& cfg, Duration phase = 0us) {
    const std::int64_t cycle = cfg.cycle.count();
    const std::int64_t rel = t.us() - phase.count();
    const std::int64_t k = floor_div(rel, cycle);
    const std::int64_t within = rel - k * cycle;
    const std::int64_t j = ceil_div(within, cfg.subcycle.count());
    const std::int64_t base = phase.count() + k * cycle;
    if (j < static_cast<std::int64_t>(cfg.subcycles_per_cycle)) {
        return SimTime::from_us(base + j * cfg.subcycle.count());
    }
    return SimTime::from_us(base + cycle);
}

/// Exact mean of next_subcycle_start(t) - t for t uniform over the integer ticks of one cycle.
inline double mean_boundary_wait(const CellConfig& cfg) {
    // Each gap of length L between boundaries contributes waits 0, L-1, ..., 1.
    double total = 0.0;
    const std::int64_t sub = cfg.subcycle.count();
    for (unsigned j = 0; j + 1 < cfg.subcycles_per_cycle; ++j) total += static_cast<double>(sub * (sub - 1) / 2);
    const std::int64_t last = cfg.cycle.count() - sub * (cfg.subcycles_per_cycle - 1);
    total += static_cast<double>(last * (last - 1) / 2);
    return total / static_cast<double>(cfg.cycle.count());
}

/// Completion offset that makes the zero-error mean transfer latency equal `target_mean`.
inline Duration calibrate_completion_offset(const CellConfig& cfg, Duration target_mean) {
    return Duration{std::llround(static_cast<double>(target_mean.count()) - mean_boundary_wait(cfg))};
}

struct TransferModel {
    Duration completion_offset = 667us;
    double per_subcycle_error_prob = 0.0;
    unsigned max_attempts = 3;
};

inline std::vector<std::string> validate_transfer(const TransferModel& m, const CellConfig& cfg) {
    std::vector<std::string> out;
    if (m.completion_offset < 0us || m.completion_offset >= cfg.subcycle) {
        out.push_back("completion_offset must lie in [0, subcycle)");
    }
    if (!(m.per_subcycle_error_prob >= 0.0 && m.per_subcycle_error_prob <= 1.0)) {
        out.push_back("error_prob must lie in [0, 1]");
    }
    if (m.max_attempts < 1) out.push_back("max_attempts must be at least 1");
    return out;
}

/// Latency from a process-data change to its delivery over the air, or nullopt when every
/// attempt failed. Attempt k uses the k-th sub-cycle boundary at or after the change and
/// may run past the end of the current cycle.
inline std::optional<Duration> transfer_latency(SimTime t_change, const TransferModel& m, const CellConfig& cfg,
                                                RngStream& rng, Duration phase = 0us) {
    SimTime boundary = next_subcycle_start(t_change, cfg, phase);
    for (unsigned attempt = 1; attempt <= m.max_attempts; ++attempt) {
        if (attempt > 1) boundary = next_subcycle_start(boundary + 1us, cfg, phase);
        const bool failed = m.per_subcycle_error_prob > 0.0 && rng.bernoulli(m.per_subcycle_error_prob);
        if (!failed) return (boundary - t_change) + m.completion_offset;
    }
    return std::nullopt;
}

/// Largest latency transfer_latency can return for this cell, found by scanning one cycle.
inline Duration max_transfer_latency(const TransferModel& m, const CellConfig& cfg) {
    std::int64_t worst = 0;
    for (std::int64_t t = 0; t < cfg.cycle.count(); ++t) {
        SimTime b = next_subcycle_start(SimTime::from_us(t), cfg);
        for (unsigned a = 1; a < m.max_attempts; ++a) b = next_subcycle_start(b + 1us, cfg);
        worst = std::max(worst, b.us() - t);
    }
    return Duration{worst} + m.completion_offset;
}

/// Probability that all attempts fail, assuming independent attempts.
inline double residual_error_prob(double per_subcycle_error_prob, unsigned max_attempts) {
    if (per_subcycle_error_prob < 0.0 || per_subcycle_error_prob > 1.0) {
        throw std::invalid_argument("residual_error_prob: probability outside [0, 1]");
    }
    double r = 1.0;
    for (unsigned i = 0; i < max_attempts; ++i) r *= per_subcycle_error_prob;
    return r;
}

// -- frequency hopping --------------------------------------------------------

inline constexpr unsigned kDefaultChannelCount = 40;  // 2 MHz grid in the 2.4 GHz band
inline constexpr unsigned kDefaultMinHopDistance = 12;

struct HopPlan {
    std::vector<unsigned> channels;
    std::set<unsigned> blocklist;
    unsigned min_hop_distance = 0;
    friend bool operator==(const HopPlan&, const HopPlan&) = default;
};

class HopPlanError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Hop sequence over the allowed channels. Consecutive channels are distinct and at least
/// `min_hop_distance` apart; the sequence is a pure function of (seed, track_id).
inline HopPlan generate_hop_plan(std::size_t length, const std::set<unsigned>& blocklist, unsigned min_hop_distance,
                                 std::uint64_t seed, unsigned track_id,
                                 unsigned channel_count = kDefaultChannelCount) {
    const unsigned step = std::max(min_hop_distance, 1u);
    auto far_enough = [step](unsigned a, unsigned b) { return (a > b ? a - b : b - a) >= step; };

    std::vector<unsigned> allowed;
    for (unsigned c = 0; c < channel_count; ++c) {
        if (!blocklist.contains(c)) allowed.push_back(c);
    }
    // A channel is usable only if some other allowed channel can follow it.
    std::vector<unsigned> usable;
    for (unsigned c : allowed) {
        if (std::any_of(allowed.begin(), allowed.end(), [&](unsigned o) { return far_enough(c, o); })) {
            usable.push_back(c);
        }
    }
    if (usable.size() < 2) {
        throw HopPlanError("hop plan infeasible: " + std::to_string(allowed.size()) +
                           " allowed channel(s), none pair at distance >= " + std::to_string(step));
    }

    RngStream rng(seed, 0x484f50ULL << 32 | track_id);
    HopPlan plan{{}, blocklist, min_hop_distance};
    plan.channels.reserve(length);
    std::vector<unsigned> candidates;
    for (std::size_t i = 0; i < length; ++i) {
        candidates.clear();
        for (unsigned c : usable) {
            if (plan.channels.empty() || far_enough(c, plan.channels.back())) candidates.push_back(c);
        }
        plan.channels.push_back(candidates[rng.below(candidates.size())]);
    }
    return plan;
}

}  // namespace s2e::iolw
