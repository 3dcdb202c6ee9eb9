#pragma once

#include <array>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace s2e::fiveg {

inline constexpr std::array<unsigned, 5> kAllowedScsKhz{15, 30, 60, 120, 240};
inline constexpr unsigned kSubcarriersPerResourceBlock = 12;

class NumerologyError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Numerology {
    unsigned scs_khz = 30;
    unsigned subcarriers = kSubcarriersPerResourceBlock;
};

inline bool is_supported(unsigned scs_khz) {
    return std::find(kAllowedScsKhz.begin(), kAllowedScsKhz.end(), scs_khz) != kAllowedScsKhz.end();
}

inline void require_supported(const Numerology& n) {
    if (!is_supported(n.scs_khz)) {
        throw NumerologyError("unsupported subcarrier spacing " + std::to_string(n.scs_khz) + " kHz");
    }
}

/// Bandwidth of one OFDM symbol across a resource block: 12 subcarriers x SCS.
inline unsigned symbol_bandwidth_khz(const Numerology& n) {
    require_supported(n);
    return n.scs_khz * n.subcarriers;
}

/// Factor by which a symbol at `slower` spacing lasts longer than one at `faster`
/// (symbol duration is inversely proportional to SCS).
inline double symbol_duration_scaling(const Numerology& faster, const Numerology& slower) {
    require_supported(faster);
    require_supported(slower);
    return static_cast<double>(faster.scs_khz) / static_cast<double>(slower.scs_khz);
}

/// Report-only link description; none of these values feed the latency simulation.
struct LinkBudgetMeta {
    double downlink_mbps = 0.0;
    double uplink_mbps = 0.0;
    double rssi_floor_dbm = 0.0;
    unsigned scs_khz = 30;
};

}  // namespace s2e::fiveg
