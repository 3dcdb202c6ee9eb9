#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "s2e/scenario.hpp"
#include "scenario_text.hpp"

namespace s2e {
namespace {

using config::ConfigError;
using config::DiagKind;

Scenario small(unsigned sequences = 8) { return load_scenario(testing::with_sequences(testing::default_text(), sequences)); }

DiagKind first_error(const std::string& text) {
    try {
        load_scenario(text);
    } catch (const ConfigError& e) {
        return e.diagnostics().front().kind;
    }
    ADD_FAILURE() << "scenario loaded without errors";
    return DiagKind::syntax;
}

TEST(LoadScenario, DefaultLoads) {
    const auto sc = load_scenario(testing::default_text());
    EXPECT_EQ(sc.cell.device_count(), 8u);
    EXPECT_EQ(sc.cell.tracks.size(), 2u);
    EXPECT_EQ(sc.segments.size(), 9u);
    EXPECT_EQ(sc.path.forward.size(), 7u);
    EXPECT_EQ(sc.path.ret.size(), 6u);
    EXPECT_EQ(sc.source.toggles_per_sequence(), 25u);
    EXPECT_EQ(sc.source.total_toggles(), 13500u);
    EXPECT_EQ(sc.segment("iolw_up").transfer.completion_offset, 667us);
    EXPECT_EQ(sc.cell.hop_plans.size(), 2u);
    EXPECT_FALSE(sc.cell.phase.has_value());
    EXPECT_TRUE(sc.plc.random_phase);
}

TEST(LoadScenario, UnresolvedSegmentInPath) {
    const auto text = testing::edited(testing::default_text(), "forward = iol_estop, iolw_up, eth_shopfloor",
                                      "forward = iol_estop, iolw_up, ether9");
    EXPECT_EQ(first_error(text), DiagKind::unresolved_id);
}

TEST(LoadScenario, SixTracksPerMasterIsACapacityError) {
    const auto text = testing::edited(testing::default_text(), "tracks_per_master = 2", "tracks_per_master = 6");
    EXPECT_EQ(first_error(text), DiagKind::capacity);
}

TEST(LoadScenario, TooManyDevicesOnATrack) {
    const auto text = testing::edited(testing::default_text(), "track.2 = smartlight, estop, lightbarrier",
                                      "track.2 = smartlight, estop, lightbarrier, a, b, c, d, e, f");
    EXPECT_EQ(first_error(text), DiagKind::capacity);
}

TEST(LoadScenario, UnknownDevice) {
    const auto text = testing::edited(testing::default_text(), "actuator = smartlight", "actuator = horn");
    EXPECT_EQ(first_error(text), DiagKind::unresolved_id);
}

TEST(LoadScenario, PlcMustBeLastForwardHop) {
    const auto text = testing::edited(testing::default_text(), "eth_control, plc\n", "plc, eth_control\n");
    EXPECT_EQ(first_error(text), DiagKind::path);
}

TEST(LoadScenario, BudgetBelowReachableMaximum) {
    const auto text = testing::edited(testing::default_text(), "max.iolw_up = 5.7ms", "max.iolw_up = 5ms");
    EXPECT_EQ(first_error(text), DiagKind::budget);
}

TEST(Run, ErrorFreeSequenceDeliversEveryToggle) {
    auto text = testing::with_sequences(testing::default_text(), 1);
    text = testing::edited(text, "error_prob = 0.001", "error_prob = 0");
    text = testing::edited(text, "error_prob = 0.001", "error_prob = 0");
    const auto r = run(load_scenario(text), 1);
    EXPECT_EQ(r.toggles, 25u);
    EXPECT_EQ(r.samples.size(), 25u);
    EXPECT_EQ(r.losses, 0u);
}

TEST(Run, SameSeedReplaysBitForBit) {
    const auto sc = small();
    const auto [a, trace_a] = run_traced(sc, 17);
    const auto [b, trace_b] = run_traced(sc, 17);
    EXPECT_EQ(a, b);
    EXPECT_EQ(trace_a, trace_b);
    EXPECT_EQ(a.trace_hash, b.trace_hash);
    EXPECT_EQ(run(sc, 17), a);
    EXPECT_NE(run(sc, 18).trace_hash, a.trace_hash);
}

TEST(Run, StagesSumToEndToEnd) {
    const auto sc = small();
    const auto r = run(sc, 3);
    ASSERT_FALSE(r.samples.empty());
    EXPECT_EQ(r.samples.size() + r.losses, r.toggles);
    for (const auto& s : r.samples) {
        ASSERT_EQ(s.stages.size(), r.stages.size());
        EXPECT_EQ(std::accumulate(s.stages.begin(), s.stages.end(), Duration{0}), s.end_to_end);
    }
}

TEST(Run, StagesStayWithinSegmentBounds) {
    const auto sc = small(40);
    const auto r = run(sc, 4);
    for (const auto& s : r.samples) {
        for (std::size_t i = 0; i < s.stages.size(); ++i) {
            ASSERT_GE(s.stages[i], 0us);
            ASSERT_LE(s.stages[i], segment_bound(sc, sc.segment(r.stages[i].segment))) << r.stages[i].segment;
        }
    }
}

TEST(Run, PerSegmentMeansMatchModels) {
    const auto sc = small(100);
    const auto stats = summarize(run(sc, 5));
    EXPECT_NEAR(stats.per_segment.at("iol_estop").mean_us(), 700.0, 15.0);
    EXPECT_NEAR(stats.per_segment.at("eth_shopfloor").mean_us(), 1200.0, 10.0);
    const double fiveg = model_mean(sc.segment("fiveg_ul").model);
    EXPECT_NEAR(stats.per_segment.at("fiveg_ul").mean_us(), fiveg, 0.02 * fiveg);
    EXPECT_NEAR(stats.per_segment.at("iolw_up").mean_us(), 1500.0, 60.0);
}

TEST(Run, PlcContributionIsAtLeastOneTaskCycle) {
    const auto sc = small(40);
    const auto r = run(sc, 6);
    const auto plc_at = sc.path.forward.size() - 1;
    ASSERT_EQ(r.stages[plc_at].kind, SegmentKind::plc);
    for (const auto& s : r.samples) ASSERT_GE(s.stages[plc_at], sc.plc.config.task_cycle);

    const auto bypass = run(sc, 6, {.bypass_plc = true});
    for (const auto& s : bypass.samples) ASSERT_EQ(s.stages[plc_at], 0us);
    const double drop = summarize(r).end_to_end.mean_us() - summarize(bypass).end_to_end.mean_us();
    EXPECT_GE(drop, static_cast<double>(sc.plc.config.task_cycle.count()));
}

TEST(Sweep, SingleSeedEqualsRun) {
    const auto sc = small();
    const std::vector<std::uint64_t> seeds{9};
    EXPECT_EQ(sweep(sc, seeds).merged, summarize(run(sc, 9)));
}

TEST(Sweep, MergeIsIndependentOfOrderAndParallelism) {
    const auto sc = small();
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
    const auto serial = sweep(sc, seeds, 1).merged;
    EXPECT_EQ(sweep(sc, seeds, 4).merged, serial);
    std::reverse(seeds.begin(), seeds.end());
    EXPECT_EQ(sweep(sc, seeds, 3).merged, serial);
    std::rotate(seeds.begin(), seeds.begin() + 2, seeds.end());
    EXPECT_EQ(sweep(sc, seeds, 2).merged, serial);
}

TEST(Sweep, SplittingSequencesAcrossSeedsKeepsTheCount) {
    const auto whole = load_scenario(testing::with_sequences(testing::default_text(), 540));
    const auto quarter = load_scenario(testing::with_sequences(testing::default_text(), 135));
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
    const auto split = sweep(quarter, seeds, 4).merged;
    const auto one = summarize(run(whole, 1));
    EXPECT_EQ(split.toggles, one.toggles);
    EXPECT_EQ(split.end_to_end.count() + split.losses, one.end_to_end.count() + one.losses);
}

TEST(Safety, DefaultBudgetSumsToWorstCase) {
    const auto sc = load_scenario(testing::default_text());
    const auto p = safety_params(sc);
    EXPECT_EQ(p.segment_maxima.size(), 13u);
    EXPECT_EQ(worst_case_sfrt(p), 149600us);
}

TEST(Safety, ObservedMaximaNeverExceedBudget) {
    const auto sc = small(40);
    const auto stats = summarize(run(sc, 8));
    const auto budget = safety_params(sc);
    const auto observed = observed_safety_params(sc, stats);
    for (std::size_t i = 0; i < budget.segment_maxima.size(); ++i) {
        EXPECT_LE(observed.segment_maxima[i].second, budget.segment_maxima[i].second);
    }
    EXPECT_LE(stats.end_to_end.max(), worst_case_sfrt(observed));
}

}  // namespace
}  // namespace s2e
