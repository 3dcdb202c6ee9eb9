#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "s2e/time.hpp"

namespace s2e {

inline constexpr Duration kDefaultBinWidth = 100us;  // 10 kS/s sampling resolution

class EmptyStatsError : public std::domain_error {
public:
    EmptyStatsError() : std::domain_error("statistics over an empty sample set") {}
};

struct CdfPoint {
    Duration upper_edge;
    double cumulative;
};

/// Streaming latency accumulator.
///
/// Bins are right-closed: bin i holds samples in ((i-1)*w, i*w], so every bin edge is an
/// upper bound for the samples it counts and percentiles read off it round up. The sum is
/// kept as an exact integer so that merging is associative and commutative bit for bit.
class LatencyStats {
public:
    explicit LatencyStats(Duration bin_width = kDefaultBinWidth) : bin_width_(bin_width) {
        if (bin_width <= 0us) throw std::invalid_argument("LatencyStats: bin width must be positive");
    }

    void add(Duration d) {
        if (d < 0us) throw std::invalid_argument("LatencyStats: negative latency");
        const auto v = static_cast<std::uint64_t>(d.count());
        const std::size_t bin = static_cast<std::size_t>(ceil_div(d.count(), bin_width_.count()));
        if (bin >= bins_.size()) bins_.resize(bin + 1, 0);
        ++bins_[bin];
        ++count_;
        sum_ += v;
        min_ = std::min(min_, v);
        max_ = std::max(max_, v);
    }

    void add_loss(std::uint64_t n = 1) { losses_ += n; }

    LatencyStats& merge(const LatencyStats& other) {
        if (other.bin_width_ != bin_width_) throw std::invalid_argument("LatencyStats: bin width mismatch");
        if (other.bins_.size() > bins_.size()) bins_.resize(other.bins_.size(), 0);
        for (std::size_t i = 0; i < other.bins_.size(); ++i) bins_[i] += other.bins_[i];
        count_ += other.count_;
        sum_ += other.sum_;
        losses_ += other.losses_;
        min_ = std::min(min_, other.min_);
        max_ = std::max(max_, other.max_);
        return *this;
    }

    friend LatencyStats merged(LatencyStats a, const LatencyStats& b) { return a.merge(b); }

    std::uint64_t count() const { return count_; }
    std::uint64_t losses() const { return losses_; }
    bool empty() const { return count_ == 0; }
    Duration bin_width() const { return bin_width_; }
    std::uint64_t sum_us() const { return sum_; }

    Duration min() const {
        require_samples();
        return Duration{static_cast<std::int64_t>(min_)};
    }
    Duration max() const {
        require_samples();
        return Duration{static_cast<std::int64_t>(max_)};
    }
    double mean_us() const {
        require_samples();
        return static_cast<double>(sum_) / static_cast<double>(count_);
    }

    /// (upper edge, count) for every bin from the one holding min to the one holding max.
    std::vector<std::pair<Duration, std::uint64_t>> histogram() const {
        std::vector<std::pair<Duration, std::uint64_t>> out;
        if (empty()) return out;
        const std::size_t first = static_cast<std::size_t>(ceil_div(static_cast<std::int64_t>(min_), bin_width_.count()));
        for (std::size_t i = first; i < bins_.size(); ++i) out.emplace_back(edge(i), bins_[i]);
        return out;
    }

    /// Smallest bin upper edge whose cumulative frequency reaches p percent.
    Duration percentile(double p) const {
        require_samples();
        if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile outside [0, 100]");
        const long double target = static_cast<long double>(p) * static_cast<long double>(count_);
        std::uint64_t cum = 0;
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            cum += bins_[i];
            if (bins_[i] != 0 && static_cast<long double>(cum) * 100.0L >= target) return edge(i);
        }
        return edge(bins_.size() - 1);
    }

    /// Step CDF over the non-empty bins, ending at exactly 1.0.
    std::vector<CdfPoint> cdf() const {
        require_samples();
        std::vector<CdfPoint> out;
        std::uint64_t cum = 0;
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            if (bins_[i] == 0) continue;
            cum += bins_[i];
            out.push_back({edge(i), static_cast<double>(cum) / static_cast<double>(count_)});
        }
        return out;
    }

    /// Fraction of samples at or below `t`, evaluated on the binned data (conservative).
    double cdf_at(Duration t) const {
        require_samples();
        std::uint64_t cum = 0;
        for (std::size_t i = 0; i < bins_.size() && edge(i) <= t; ++i) cum += bins_[i];
        return static_cast<double>(cum) / static_cast<double>(count_);
    }

    friend bool operator==(const LatencyStats& a, const LatencyStats& b) {
        if (a.bin_width_ != b.bin_width_ || a.count_ != b.count_ || a.sum_ != b.sum_ || a.losses_ != b.losses_ ||
            a.min_ != b.min_ || a.max_ != b.max_) {
            return false;
        }
        // Trailing zero bins are not significant.
        const auto& longer = a.bins_.size() >= b.bins_.size() ? a.bins_ : b.bins_;
        const auto& shorter = a.bins_.size() >= b.bins_.size() ? b.bins_ : a.bins_;
        for (std::size_t i = 0; i < longer.size(); ++i) {
            if (longer[i] != (i < shorter.size() ? shorter[i] : 0)) return false;
        }
        return true;
    }

private:
    Duration edge(std::size_t bin) const { return bin_width_ * static_cast<std::int64_t>(bin); }

    void require_samples() const {
        if (count_ == 0) throw EmptyStatsError();
    }

    Duration bin_width_;
    std::vector<std::uint64_t> bins_;
    std::uint64_t count_ = 0;
    std::uint64_t sum_ = 0;
    std::uint64_t losses_ = 0;
    std::uint64_t min_ = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t max_ = 0;
};

}  // namespace s2e
