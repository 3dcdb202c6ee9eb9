#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "s2e/time.hpp"

namespace s2e {

struct SafetyParams {
    double approach_speed_mps = 2.0;
    std::vector<std::pair<std::string, Duration>> segment_maxima;
};

/// Worst-case safety function response time: the sum of per-segment maximum latencies.
inline Duration worst_case_sfrt(const SafetyParams& params) {
    if (params.segment_maxima.empty()) throw std::invalid_argument("worst_case_sfrt: no segments");
    Duration total{0};
    for (const auto& [id, max] : params.segment_maxima) total += max;
    return total;
}

struct SafetyDistance {
    double meters;            // exact product speed x time
    std::int64_t millimeters;  // rounded up to 1 mm
    double presented_m;       // rounded up to 0.1 m
};

/// Minimum separation between a person approaching at `speed_mps` and the hazard.
/// Both rounded forms go up, never to nearest.
inline SafetyDistance safety_distance(Duration sfrt, double speed_mps) {
    if (!(speed_mps > 0.0)) throw std::invalid_argument("safety_distance: speed must be positive");
    if (sfrt < 0us) throw std::invalid_argument("safety_distance: negative response time");
    const double meters = speed_mps * static_cast<double>(sfrt.count()) * 1e-6;
    // Guard against representation error pushing an exact value over a rounding edge.
    constexpr double eps = 1e-9;
    const auto mm = static_cast<std::int64_t>(std::ceil(meters * 1000.0 - eps));
    const double tenths = std::ceil(meters * 10.0 - eps);
    return {meters, std::max<std::int64_t>(mm, 0), std::max(tenths, 0.0) / 10.0};
}

}  // namespace s2e
