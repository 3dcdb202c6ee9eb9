#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "s2e/rng.hpp"
#include "s2e/safety.hpp"
#include "s2e/stats.hpp"

namespace s2e {
namespace {

TEST(LatencyStats, SingleSampleStatistics) {
    LatencyStats s;
    s.add(42ms);
    EXPECT_EQ(s.count(), 1u);
    EXPECT_EQ(s.min(), 42ms);
    EXPECT_EQ(s.max(), 42ms);
    EXPECT_DOUBLE_EQ(s.mean_us(), 42000.0);
    EXPECT_EQ(s.percentile(99), 42000us);
    EXPECT_EQ(s.percentile(1), 42000us);
    const auto cdf = s.cdf();
    ASSERT_EQ(cdf.size(), 1u);
    EXPECT_EQ(cdf[0].upper_edge, 42000us);
    EXPECT_DOUBLE_EQ(cdf[0].cumulative, 1.0);
}

TEST(LatencyStats, TwoEqualSamplesGiveOneCdfStep) {
    LatencyStats s;
    s.add(1500us);
    s.add(1500us);
    const auto cdf = s.cdf();
    ASSERT_EQ(cdf.size(), 1u);
    EXPECT_EQ(cdf[0].upper_edge, 1500us);
    EXPECT_DOUBLE_EQ(cdf[0].cumulative, 1.0);
}

TEST(LatencyStats, P99OfOneToHundredMs) {
    LatencyStats s;
    for (int i = 1; i <= 100; ++i) s.add(std::chrono::milliseconds(i));
    EXPECT_EQ(s.percentile(99), 99000us);
    EXPECT_EQ(s.percentile(100), 100000us);
    EXPECT_EQ(s.percentile(50), 50000us);
    EXPECT_DOUBLE_EQ(s.mean_us(), 50500.0);
    EXPECT_DOUBLE_EQ(s.cdf_at(99ms), 0.99);
}

TEST(LatencyStats, BinsAreRightClosed) {
    LatencyStats s;
    s.add(100us);
    s.add(101us);
    const auto h = s.histogram();
    ASSERT_EQ(h.size(), 2u);
    EXPECT_EQ(h[0], std::make_pair(Duration{100us}, std::uint64_t{1}));
    EXPECT_EQ(h[1], std::make_pair(Duration{200us}, std::uint64_t{1}));
}

TEST(LatencyStats, EmptyIsAnErrorNotZero) {
    LatencyStats s;
    EXPECT_THROW(s.mean_us(), EmptyStatsError);
    EXPECT_THROW(s.percentile(50), EmptyStatsError);
    EXPECT_THROW(s.cdf(), EmptyStatsError);
    EXPECT_THROW(s.max(), EmptyStatsError);
    EXPECT_TRUE(s.histogram().empty());
    s.add_loss(3);
    EXPECT_EQ(s.losses(), 3u);
    EXPECT_THROW(s.mean_us(), EmptyStatsError);
}

TEST(LatencyStats, PercentileIsMonotone) {
    RngStream rng(11, 11);
    LatencyStats s;
    for (int i = 0; i < 5000; ++i) s.add(Duration{rng.between(0, 200000)});
    Duration prev{0};
    for (double p = 0; p <= 100.0; p += 0.5) {
        const auto v = s.percentile(p);
        ASSERT_GE(v, prev);
        prev = v;
    }
    EXPECT_GE(s.percentile(100), s.max());
}

TEST(LatencyStats, MergeOfPartitionsEqualsWhole) {
    RngStream rng(12, 12);
    std::vector<Duration> data;
    for (int i = 0; i < 20000; ++i) data.push_back(Duration{rng.between(0, 120000)});
    LatencyStats whole;
    for (auto d : data) whole.add(d);

    std::vector<LatencyStats> parts(10);
    for (std::size_t i = 0; i < data.size(); ++i) parts[rng.below(10)].add(data[i]);
    LatencyStats forward, backward;
    for (const auto& p : parts) forward.merge(p);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) backward.merge(*it);
    EXPECT_EQ(forward, whole);
    EXPECT_EQ(backward, whole);
    EXPECT_EQ(forward.sum_us(), whole.sum_us());
    EXPECT_EQ(forward.mean_us(), whole.mean_us());
    EXPECT_EQ(forward.percentile(99), whole.percentile(99));
}

TEST(LatencyStats, MergeWithEmptyIsIdentity) {
    LatencyStats a, empty;
    a.add(5ms);
    EXPECT_EQ(merged(a, empty), a);
    EXPECT_EQ(merged(empty, a), a);
}

TEST(Safety, WorstCaseIsSumOfMaxima) {
    SafetyParams p;
    p.segment_maxima = {{"a", 2ms}, {"b", 3ms}, {"c", 5ms}};
    EXPECT_EQ(worst_case_sfrt(p), 10ms);
    EXPECT_THROW(worst_case_sfrt(SafetyParams{}), std::invalid_argument);
}

TEST(Safety, DistanceExamples) {
    const auto d = safety_distance(149600us, 2.0);
    EXPECT_NEAR(d.meters, 0.2992, 1e-12);
    EXPECT_EQ(d.millimeters, 300);
    EXPECT_DOUBLE_EQ(d.presented_m, 0.3);

    const auto zero = safety_distance(0us, 2.0);
    EXPECT_EQ(zero.meters, 0.0);
    EXPECT_EQ(zero.millimeters, 0);
    EXPECT_EQ(zero.presented_m, 0.0);

    const auto exact = safety_distance(100ms, 1.0);
    EXPECT_NEAR(exact.meters, 0.1, 1e-15);
    EXPECT_EQ(exact.millimeters, 100);
    EXPECT_DOUBLE_EQ(exact.presented_m, 0.1);

    EXPECT_THROW(safety_distance(1ms, 0.0), std::invalid_argument);
}

TEST(Safety, DistanceIsLinearInTime) {
    for (std::int64_t t : {1000, 7300, 149600, 500000}) {
        const double one = safety_distance(Duration{t}, 1.6).meters;
        const double two = safety_distance(Duration{2 * t}, 1.6).meters;
        EXPECT_NEAR(two, 2 * one, 1e-12);
    }
}

}  // namespace
}  // namespace s2e
