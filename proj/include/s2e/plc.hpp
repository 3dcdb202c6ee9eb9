#pragma once

#include <string>
#include <vector>

#include "s2e/latency_model.hpp"
#include "s2e/rng.hpp"
#include "s2e/time.hpp"

namespace s2e::plc {

struct PlcConfig {
    Duration task_cycle = 5000us;
    Duration query_cycle = 10000us;
    LatencyModel processing_jitter = Constant{0us};
    Duration phase = 0us;  // first task-cycle and poll start
};

inline std::vector<std::string> validate(const PlcConfig& cfg) {
    std::vector<std::string> out;
    if (cfg.task_cycle <= 0us) out.emplace_back("task_cycle must be positive");
    if (cfg.query_cycle <= 0us) out.emplace_back("query_cycle must be positive");
    if (cfg.task_cycle > 0us && cfg.query_cycle > 0us && cfg.query_cycle % cfg.task_cycle != 0us) {
        out.emplace_back("query_cycle must be an integer multiple of task_cycle");
    }
    if (cfg.phase < 0us) out.emplace_back("phase must be non-negative");
    for (auto& m : validate_model(cfg.processing_jitter)) out.push_back("jitter: " + m);
    return out;
}

/// Start of the task cycle containing `t` (the greatest cycle start <= t).
inline SimTime cycle_start(SimTime t, const PlcConfig& cfg) {
    const std::int64_t period = cfg.task_cycle.count();
    const std::int64_t k = floor_div(t.us() - cfg.phase.count(), period);
    return SimTime::from_us(cfg.phase.count() + k * period);
}

/// Deterministic part of output publication: inputs are sampled at cycle start and outputs
/// published at cycle end, so a value that misses the sampling instant waits one more cycle.
inline SimTime publish_time(SimTime arrival, const PlcConfig& cfg) {
    const SimTime b = cycle_start(arrival, cfg);
    return arrival == b ? b + cfg.task_cycle : b + 2 * cfg.task_cycle;
}

inline SimTime align_to_task_cycle(SimTime arrival, const PlcConfig& cfg, RngStream& rng) {
    return publish_time(arrival, cfg) + sample(cfg.processing_jitter, rng);
}

/// First poll of the W-Master process image at or after `available`.
inline SimTime next_poll(SimTime available, const PlcConfig& cfg) {
    const std::int64_t period = cfg.query_cycle.count();
    const std::int64_t k = ceil_div(available.us() - cfg.phase.count(), period);
    return SimTime::from_us(cfg.phase.count() + k * period);
}

inline std::vector<SimTime> poll_schedule(const PlcConfig& cfg, SimTime t_end) {
    std::vector<SimTime> polls;
    for (SimTime t = SimTime{cfg.phase}; t <= t_end; t += cfg.query_cycle) polls.push_back(t);
    return polls;
}

}  // namespace s2e::plc
