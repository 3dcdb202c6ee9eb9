#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "s2e/rng.hpp"
#include "s2e/time.hpp"

namespace s2e {

struct Constant {
    Duration value{0};
    friend bool operator==(const Constant&, const Constant&) = default;
};

/// Integer microseconds drawn uniformly from [lo, hi].
struct Uniform {
    Duration lo{0};
    Duration hi{0};
    friend bool operator==(const Uniform&, const Uniform&) = default;
};

/// Normal(mean, stddev) restricted to [lo, hi] and rounded to the nearest microsecond.
struct TruncatedNormal {
    Duration mean{0};
    Duration stddev{0};
    Duration lo{0};
    Duration hi{0};
    friend bool operator==(const TruncatedNormal&, const TruncatedNormal&) = default;
};

/// Discrete distribution over point values with non-negative weights.
struct Empirical {
    struct Bin {
        Duration value{0};
        double weight = 0.0;
        friend bool operator==(const Bin&, const Bin&) = default;
    };
    std::vector<Bin> bins;
    friend bool operator==(const Empirical&, const Empirical&) = default;
};

using LatencyModel = std::variant<Constant, Uniform, TruncatedNormal, Empirical>;

inline constexpr int kMaxTruncationRejections = 1000;

/// Problems with the model parameters; empty when the model is usable.
inline std::vector<std::string> validate_model(const LatencyModel& model) {
    std::vector<std::string> out;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                if (m.value < 0us) out.emplace_back("constant latency is negative");
            } else if constexpr (std::is_same_v<T, Uniform>) {
                if (m.lo < 0us) out.emplace_back("uniform lower bound is negative");
                if (m.hi < m.lo) out.emplace_back("uniform requires lo <= hi");
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                if (m.stddev < 0us) out.emplace_back("truncnormal stddev is negative");
                if (m.lo < 0us) out.emplace_back("truncnormal lower bound is negative");
                if (m.hi < m.lo) out.emplace_back("truncnormal requires lo <= hi");
            } else {
                if (m.bins.empty()) out.emplace_back("empirical needs at least one bin");
                double sum = 0.0;
                for (const auto& b : m.bins) {
                    if (b.value < 0us) out.emplace_back("empirical bin value is negative");
                    if (!(b.weight >= 0.0) || !std::isfinite(b.weight)) {
                        out.emplace_back("empirical weights must be finite and >= 0");
                    }
                    sum += b.weight;
                }
                if (!m.bins.empty() && !(sum > 0.0)) out.emplace_back("empirical weights must have a positive sum");
            }
        },
        model);
    return out;
}

/// Smallest and largest value `sample` can return.
inline std::pair<Duration, Duration> support(const LatencyModel& model) {
    return std::visit(
        [](const auto& m) -> std::pair<Duration, Duration> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return {m.value, m.value};
            } else if constexpr (std::is_same_v<T, Empirical>) {
                auto [lo, hi] = std::minmax_element(m.bins.begin(), m.bins.end(),
                                                    [](const auto& a, const auto& b) { return a.value < b.value; });
                return {lo->value, hi->value};
            } else {
                return {m.lo, m.hi};
            }
        },
        model);
}

/// Draw one latency. If `clamps` is given it is incremented whenever a truncated normal
/// gave up after kMaxTruncationRejections redraws and clamped into [lo, hi].
inline Duration sample(const LatencyModel& model, RngStream& rng, std::uint64_t* clamps = nullptr) {
    return std::visit(
        [&](const auto& m) -> Duration {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return m.value;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return Duration{rng.between(m.lo.count(), m.hi.count())};
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                const double mu = static_cast<double>(m.mean.count());
                const double sd = static_cast<double>(m.stddev.count());
                const double lo = static_cast<double>(m.lo.count());
                const double hi = static_cast<double>(m.hi.count());
                double x = mu;
                for (int i = 0; i < kMaxTruncationRejections; ++i) {
                    x = mu + sd * rng.normal();
                    if (x >= lo && x <= hi) return Duration{std::llround(x)};
                }
                if (clamps) ++*clamps;
                return Duration{std::llround(std::clamp(x, lo, hi))};
            } else {
                double total = 0.0;
                for (const auto& b : m.bins) total += b.weight;
                double u = rng.uniform01() * total;
                for (const auto& b : m.bins) {
                    if (u < b.weight) return b.value;
                    u -= b.weight;
                }
                // Rounding left u at the very top; return the last bin with weight.
                for (auto it = m.bins.rbegin(); it != m.bins.rend(); ++it) {
                    if (it->weight > 0.0) return it->value;
                }
                return m.bins.back().value;
            }
        },
        model);
}

/// Analytic mean of the model in microseconds (rounding to whole microseconds ignored).
inline double model_mean(const LatencyModel& model) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return static_cast<double>(m.value.count());
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return 0.5 * static_cast<double>(m.lo.count() + m.hi.count());
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                const double mu = static_cast<double>(m.mean.count());
                const double sd = static_cast<double>(m.stddev.count());
                if (sd == 0.0) return std::clamp(mu, double(m.lo.count()), double(m.hi.count()));
                const double a = (static_cast<double>(m.lo.count()) - mu) / sd;
                const double b = (static_cast<double>(m.hi.count()) - mu) / sd;
                auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
                auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
                return mu + sd * (pdf(a) - pdf(b)) / (cdf(b) - cdf(a));
            } else {
                double num = 0.0, den = 0.0;
                for (const auto& b : m.bins) {
                    num += b.weight * static_cast<double>(b.value.count());
                    den += b.weight;
                }
                return num / den;
            }
        },
        model);
}

inline std::string format_duration(Duration d) {
    const auto us = d.count();
    if (us != 0 && us % 1000 == 0) return std::to_string(us / 1000) + "ms";
    return std::to_string(us) + "us";
}

/// Text form accepted by the scenario parser.
inline std::string to_string(const LatencyModel& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return "constant(" + format_duration(m.value) + ")";
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return "uniform(" + format_duration(m.lo) + ", " + format_duration(m.hi) + ")";
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                return "truncnormal(" + format_duration(m.mean) + ", " + format_duration(m.stddev) + ", " +
                       format_duration(m.lo) + ", " + format_duration(m.hi) + ")";
            } else {
                std::string s = "empirical(";
                for (std::size_t i = 0; i < m.bins.size(); ++i) {
                    if (i) s += ", ";
                    char w[32];
                    std::snprintf(w, sizeof w, "%g", m.bins[i].weight);
                    s += format_duration(m.bins[i].value) + ":" + w;
                }
                return s + ")";
            }
        },
        model);
}

}  // namespace s2e
