#include <gtest/gtest.h>

#include "s2e/plc.hpp"

namespace s2e::plc {
namespace {

TEST(AlignToTaskCycle, BoundaryArrivalPublishesAtCycleEnd) {
    PlcConfig cfg;
    RngStream rng(1, 1);
    EXPECT_EQ(align_to_task_cycle(SimTime::from_us(0), cfg, rng), SimTime::from_us(5000));
}

TEST(AlignToTaskCycle, LateArrivalWaitsOneMoreCycle) {
    PlcConfig cfg;
    RngStream rng(1, 1);
    EXPECT_EQ(align_to_task_cycle(SimTime::from_us(100), cfg, rng), SimTime::from_us(10000));
}

TEST(AlignToTaskCycle, AddedDelayBoundsOverManyPhases) {
    RngStream rng(2, 2);
    for (std::int64_t phase : {0, 1, 2499, 4999}) {
        PlcConfig cfg;
        cfg.phase = Duration{phase};
        for (std::int64_t t = 0; t < 20000; t += 3) {
            const auto arrival = SimTime::from_us(t);
            const auto delay = (align_to_task_cycle(arrival, cfg, rng) - arrival).count();
            if ((t - phase) % 5000 == 0) {
                ASSERT_EQ(delay, 5000);
            } else {
                ASSERT_GT(delay, 5000);
                ASSERT_LE(delay, 10000);
            }
        }
    }
}

TEST(AlignToTaskCycle, CompletionIsMonotoneInArrival) {
    PlcConfig cfg;
    cfg.phase = 1234us;
    RngStream rng(3, 3);
    SimTime prev = align_to_task_cycle(SimTime::from_us(0), cfg, rng);
    for (std::int64_t t = 1; t < 30000; ++t) {
        const auto c = align_to_task_cycle(SimTime::from_us(t), cfg, rng);
        ASSERT_GE(c, prev);
        prev = c;
    }
}

TEST(AlignToTaskCycle, UniformArrivalMeanAddedDelay) {
    PlcConfig cfg;
    // Closed form over integer ticks: one boundary tick waits 5000, the others 10000 - t.
    double exact = 5000;
    for (int t = 1; t < 5000; ++t) exact += 10000 - t;
    exact /= 5000;
    EXPECT_NEAR(exact, 7500.0, 1.0);

    RngStream arrivals(4, 4), rng(4, 5);
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const auto a = SimTime::from_us(arrivals.between(0, 999999));
        sum += static_cast<double>((align_to_task_cycle(a, cfg, rng) - a).count());
    }
    EXPECT_NEAR(sum / n, 7500.0, 100.0);
}

TEST(AlignToTaskCycle, JitterIsAdded) {
    PlcConfig cfg;
    cfg.processing_jitter = Constant{250us};
    RngStream rng(1, 1);
    EXPECT_EQ(align_to_task_cycle(SimTime::from_us(0), cfg, rng), SimTime::from_us(5250));
}

TEST(PollSchedule, TimesUpToHorizon) {
    PlcConfig cfg;
    const auto polls = poll_schedule(cfg, SimTime::from_us(25000));
    EXPECT_EQ(polls, (std::vector<SimTime>{SimTime::from_us(0), SimTime::from_us(10000), SimTime::from_us(20000)}));
}

TEST(PollSchedule, ChangeOnPollTimeIsPickedUpByThatPoll) {
    PlcConfig cfg;
    EXPECT_EQ(next_poll(SimTime::from_us(10000), cfg), SimTime::from_us(10000));
    EXPECT_EQ(next_poll(SimTime::from_us(10001), cfg), SimTime::from_us(20000));
}

TEST(PollSchedule, UniformChangeMeanWaitIsHalfQueryCycle) {
    PlcConfig cfg;
    cfg.phase = 3000us;
    RngStream rng(6, 6);
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const auto t = SimTime::from_us(rng.between(0, 9999999));
        const auto wait = (next_poll(t, cfg) - t).count();
        ASSERT_GE(wait, 0);
        ASSERT_LT(wait, 10000);
        sum += static_cast<double>(wait);
    }
    EXPECT_NEAR(sum / n, 5000.0, 50.0);
}

TEST(Validate, QueryCycleMustBeMultipleOfTaskCycle) {
    PlcConfig cfg;
    EXPECT_TRUE(validate(cfg).empty());
    cfg.query_cycle = 7500us;
    EXPECT_FALSE(validate(cfg).empty());
    cfg.query_cycle = 0us;
    EXPECT_FALSE(validate(cfg).empty());
}

}  // namespace
}  // namespace s2e::plc
