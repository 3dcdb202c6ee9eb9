#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <ostream>

namespace s2e {

// All scheduling arithmetic is done in integer microseconds.
using Duration = std::chrono::microseconds;

using namespace std::chrono_literals;

/// Point on the simulation clock, in microseconds since simulation start.
class SimTime {
public:
    constexpr SimTime() = default;
    constexpr explicit SimTime(Duration since_start) : since_start_(since_start) {}

    static constexpr SimTime from_us(std::int64_t us) { return SimTime{Duration{us}}; }

    constexpr Duration since_start() const { return since_start_; }
    constexpr std::int64_t us() const { return since_start_.count(); }

    constexpr SimTime& operator+=(Duration d) {
        since_start_ += d;
        return *this;
    }

    friend constexpr SimTime operator+(SimTime t, Duration d) { return SimTime{t.since_start_ + d}; }
    friend constexpr SimTime operator-(SimTime t, Duration d) { return SimTime{t.since_start_ - d}; }
    friend constexpr Duration operator-(SimTime a, SimTime b) { return a.since_start_ - b.since_start_; }
    friend constexpr auto operator<=>(SimTime, SimTime) = default;

    friend std::ostream& operator<<(std::ostream& os, SimTime t) { return os << t.us() << "us"; }

private:
    Duration since_start_{0};
};

// Floor division for possibly negative offsets; used by every periodic-grid computation.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace s2e
