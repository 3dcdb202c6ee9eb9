#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "s2e/kernel.hpp"
#include "s2e/rng.hpp"

namespace s2e {
namespace {

TEST(Kernel, EventAtTimeZeroFromTimeZeroDispatchesFirst) {
    Kernel k;
    std::vector<int> order;
    k.schedule(SimTime::from_us(5), EventKind::segment_arrival, 1, [&](Kernel&) { order.push_back(1); });
    k.schedule(SimTime::from_us(0), EventKind::segment_arrival, 0, [&](Kernel&) { order.push_back(0); });
    k.run();
    EXPECT_EQ(order, (std::vector<int>{0, 1}));
}

TEST(Kernel, EqualDueTimesDispatchInInsertionOrder) {
    Kernel k;
    std::string order;
    k.schedule(SimTime::from_us(10), EventKind::segment_arrival, 0, [&](Kernel&) { order += 'A'; });
    k.schedule(SimTime::from_us(10), EventKind::segment_arrival, 0, [&](Kernel&) { order += 'B'; });
    k.schedule(SimTime::from_us(10), EventKind::segment_arrival, 0, [&](Kernel&) { order += 'C'; });
    k.run();
    EXPECT_EQ(order, "ABC");
}

TEST(Kernel, SchedulingInThePastIsAnError) {
    Kernel k;
    k.run_until(SimTime::from_us(6));
    EXPECT_THROW(k.schedule(SimTime::from_us(5), EventKind::segment_arrival, 0, nullptr), std::logic_error);
}

TEST(Kernel, RunUntilOnEmptyQueueAdvancesClock) {
    Kernel k;
    EXPECT_EQ(k.run_until(SimTime::from_us(1000)), 0u);
    EXPECT_EQ(k.now(), SimTime::from_us(1000));
}

TEST(Kernel, RunUntilStopsAtHorizonAndKeepsLaterEvents) {
    Kernel k;
    for (int t : {1, 2, 3}) k.schedule(SimTime::from_us(t), EventKind::segment_arrival, 0, nullptr);
    EXPECT_EQ(k.run_until(SimTime::from_us(2)), 2u);
    EXPECT_EQ(k.now(), SimTime::from_us(2));
    EXPECT_EQ(k.pending(), 1u);
    EXPECT_THROW(k.run_until(SimTime::from_us(1)), std::logic_error);
}

TEST(Kernel, ActionsMayScheduleAtCurrentTime) {
    Kernel k;
    std::vector<std::int64_t> seen;
    k.schedule(SimTime::from_us(3), EventKind::segment_arrival, 0, [&](Kernel& kk) {
        seen.push_back(kk.now().us());
        kk.schedule(kk.now(), EventKind::plc_cycle, 0, [&](Kernel& k2) { seen.push_back(k2.now().us()); });
    });
    EXPECT_EQ(k.run(), 2u);
    EXPECT_EQ(seen, (std::vector<std::int64_t>{3, 3}));
}

// Random self-scheduling workload, checked for monotone time, conservation and replay.
std::pair<std::vector<TraceEntry>, std::uint64_t> random_workload(std::uint64_t seed) {
    Kernel k(true);
    RngStream rng(seed, 7);
    int budget = 2000;
    std::function<void(Kernel&)> spawn = [&](Kernel& kk) {
        if (budget <= 0) return;
        const int children = static_cast<int>(rng.below(3));
        for (int c = 0; c < children && budget > 0; ++c, --budget) {
            kk.schedule(kk.now() + Duration{rng.between(0, 50)}, EventKind::segment_arrival, rng.below(1000), spawn);
        }
    };
    for (int i = 0; i < 20; ++i) {
        --budget;
        k.schedule(SimTime::from_us(rng.between(0, 100)), EventKind::source_toggle, static_cast<std::uint64_t>(i), spawn);
    }
    k.run();
    return {k.trace(), k.trace_hash()};
}

TEST(Kernel, TraceIsMonotoneAndReplaysIdentically) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto [trace, hash] = random_workload(seed);
        ASSERT_FALSE(trace.empty());
        for (std::size_t i = 1; i < trace.size(); ++i) {
            ASSERT_LE(trace[i - 1].due, trace[i].due);
            if (trace[i - 1].due == trace[i].due) {
                // Same instant: FIFO among events that were queued together.
                EXPECT_NE(trace[i - 1].seq, trace[i].seq);
            }
        }
        // Conservation: every scheduled event was dispatched exactly once.
        std::vector<std::uint64_t> seqs;
        for (const auto& e : trace) seqs.push_back(e.seq);
        std::sort(seqs.begin(), seqs.end());
        for (std::size_t i = 0; i < seqs.size(); ++i) EXPECT_EQ(seqs[i], i);

        auto [again, hash2] = random_workload(seed);
        EXPECT_EQ(trace, again);
        EXPECT_EQ(hash, hash2);
    }
    EXPECT_NE(random_workload(1).second, random_workload(2).second);
}

TEST(Rng, SameSeedAndStreamReplay) {
    RngStream a(42, 3), b(42, 3), c(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        differs |= x != c.next_u64();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, PinnedOutputForCrossPlatformReplay) {
    // Frozen from the first build; guards against accidental changes to seeding or transforms.
    RngStream r(1, 0);
    EXPECT_EQ(r.next_u64(), 15680271392084457219ull);
    EXPECT_EQ(r.next_u64(), 5851735717111353748ull);
    EXPECT_EQ(r.next_u64(), 11759230582921984864ull);
    RngStream t(1, 0);
    EXPECT_DOUBLE_EQ(t.uniform01(), 0.85002921542301357);
    EXPECT_EQ(t.between(-3, 3), -3);
    EXPECT_DOUBLE_EQ(t.normal(), 1.7513812206745683);
    EXPECT_EQ(stream_id_for("phase"), 18396525442441860024ull);
    RngStream u(1, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform01();
        ASSERT_GE(x, 0.0);
        ASSERT_LT(x, 1.0);
        const auto v = u.between(-3, 3);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 3);
    }
}

TEST(Rng, NormalMomentsAreStandard) {
    RngStream r(9, 9);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
}

}  // namespace
}  // namespace s2e
