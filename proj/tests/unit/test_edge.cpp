#include <gtest/gtest.h>

#include <vector>

#include "xrsim/edge.hpp"
#include "xrsim/error.hpp"

namespace xrsim {
namespace {

constexpr double kTf120 = 1000.0 / 120.0;

std::vector<XrFrame> stream(std::size_t n, double period) {
    std::vector<XrFrame> frames(n);
    for (std::size_t i = 0; i < n; ++i) {
        frames[i].frame_idx = static_cast<std::uint32_t>(i);
        frames[i].gen_time_ms = 100.0 + i * period;
        frames[i].edge_arrival_ms = frames[i].gen_time_ms;
        frames[i].size_bits = 1000 + static_cast<std::int64_t>(i);
        frames[i].display_deadline_ms = frames[i].gen_time_ms + 2.5;
    }
    return frames;
}

EdgeUserConfig cfg(int p_d, double playout = 0.0) {
    return {p_d, kTf120, 2.5, playout};
}

EdgeEvent arrival(std::uint32_t i) { return {EdgeEventKind::kArrival, i}; }
EdgeEvent release(std::uint32_t i) { return {EdgeEventKind::kRelease, i}; }
EdgeEvent deadline(std::uint32_t i) { return {EdgeEventKind::kDeadline, i}; }

TEST(EffectiveBudget, ExtendsBoundByPredictionTime) {
    EXPECT_NEAR(effective_budget(1, 1000.0 / 60.0, 2.5), 19.17, 0.005);
    EXPECT_EQ(effective_budget(0, 1000.0 / 60.0, 2.5), 2.5);
    EXPECT_NEAR(effective_budget(2, kTf120, 2.5), 19.17, 0.005);
}

TEST(ErrorModel, LinearAndPower) {
    ErrorModel m;
    EXPECT_EQ(m.mse(0), 0.0);
    EXPECT_EQ(m.mse(-1), 0.0);
    EXPECT_DOUBLE_EQ(m.mse(1), 0.018);
    EXPECT_DOUBLE_EQ(m.mse(3), 0.054);
    m.growth = MseGrowth::kPower;
    m.exponent = 2.0;
    EXPECT_DOUBLE_EQ(m.mse(3), 0.018 * 9);
    m.exponent = 0.5;
    EXPECT_THROW(m.validate(), ConfigError);
}

TEST(EdgeUser, OnTimeArrivalPredictsNextFrame) {
    auto truth = stream(5, kTf120);
    truth[2].edge_arrival_ms = truth[2].gen_time_ms + 1.0;
    EdgeUser e(cfg(1), ErrorModel{}, truth);
    const EdgeOutput out = e.on_event(arrival(2), truth[2].edge_arrival_ms);
    EXPECT_EQ(e.buffered_is_predicted(2), false);
    ASSERT_EQ(out.to_mac.size(), 1u);
    EXPECT_EQ(out.to_mac[0].frame_idx, 3u);
    EXPECT_TRUE(out.to_mac[0].is_predicted);
    EXPECT_EQ(out.to_mac[0].size_bits, truth[3].size_bits);
    EXPECT_EQ(out.to_mac[0].display_deadline_ms, truth[3].display_deadline_ms);
    ASSERT_EQ(out.predictions.size(), 1u);
    EXPECT_EQ(out.predictions[0].effective_horizon, 1);
    EXPECT_DOUBLE_EQ(out.predictions[0].mse, 0.018);
}

TEST(EdgeUser, MissingFrameBecomesPlaceholderAtDeadline) {
    const auto truth = stream(5, kTf120);
    EdgeUser e(cfg(1), ErrorModel{}, truth);
    const double t = e.deadline_ms(1);
    EXPECT_NEAR(t - truth[1].gen_time_ms, kTf120 + 2.5, 1e-12);
    const EdgeOutput out = e.on_event(deadline(1), t);
    EXPECT_EQ(e.buffered_is_predicted(1), true);
    ASSERT_EQ(out.to_mac.size(), 1u);
    EXPECT_EQ(out.to_mac[0].frame_idx, 2u);
    ASSERT_EQ(out.predictions.size(), 2u);
    EXPECT_TRUE(out.predictions[0].placeholder);
    EXPECT_GE(out.predictions[0].effective_horizon, 1);
    EXPECT_EQ(out.predictions[1].effective_horizon, 2);

    // The late original replaces the placeholder and predicts nothing new.
    const EdgeOutput late = e.on_event(arrival(1), t + 1.0);
    EXPECT_EQ(e.buffered_is_predicted(1), false);
    EXPECT_TRUE(late.to_mac.empty());
}

TEST(EdgeUser, TwoPlaceholdersGiveHorizonThree) {
    const auto truth = stream(6, kTf120);
    EdgeUser e(cfg(1), ErrorModel{}, truth);
    e.on_event(arrival(0), truth[0].gen_time_ms);
    e.on_event(deadline(1), e.deadline_ms(1));
    e.on_event(deadline(2), e.deadline_ms(2));
    const auto [frame, rec] = e.predict_frame(4);
    EXPECT_EQ(rec.effective_horizon, 3);
    EXPECT_NEAR(rec.mse, 0.054, 1e-15);
    EXPECT_TRUE(frame.is_predicted);
}

TEST(EdgeUser, ArrivedFrameIgnoresItsDeadline) {
    const auto truth = stream(4, kTf120);
    EdgeUser e(cfg(1), ErrorModel{}, truth);
    e.on_event(arrival(1), truth[1].gen_time_ms);
    const EdgeOutput out = e.on_event(deadline(1), e.deadline_ms(1));
    EXPECT_TRUE(out.to_mac.empty());
    EXPECT_TRUE(out.predictions.empty());
}

TEST(EdgeUser, ZeroDepthForwardsOriginals) {
    const auto truth = stream(4, kTf120);
    EdgeUser e(cfg(0), ErrorModel{}, truth);
    for (std::uint32_t i = 0; i < 4; ++i) {
        const EdgeOutput out = e.on_event(arrival(i), truth[i].gen_time_ms);
        ASSERT_EQ(out.to_mac.size(), 1u);
        EXPECT_EQ(out.to_mac[0].frame_idx, i);
        EXPECT_FALSE(out.to_mac[0].is_predicted);
        EXPECT_EQ(out.to_mac[0].effective_horizon, 0);
        EXPECT_TRUE(out.predictions.empty());
    }
}

TEST(EdgeUser, ColdStartFramesSentAsOriginals) {
    const auto truth = stream(6, kTf120);
    EdgeUser e(cfg(2), ErrorModel{}, truth);
    const EdgeOutput out = e.on_event(arrival(0), truth[0].gen_time_ms);
    ASSERT_EQ(out.to_mac.size(), 2u);
    EXPECT_EQ(out.to_mac[0].frame_idx, 0u);
    EXPECT_FALSE(out.to_mac[0].is_predicted);
    EXPECT_EQ(out.to_mac[1].frame_idx, 2u);
    EXPECT_EQ(out.to_mac[1].effective_horizon, 2);
}

TEST(EdgeUser, StreamEndHasNoTarget) {
    const auto truth = stream(3, kTf120);
    EdgeUser e(cfg(1), ErrorModel{}, truth);
    EXPECT_TRUE(e.on_event(arrival(2), truth[2].gen_time_ms).to_mac.empty());
}

TEST(PlayoffRelease, HoldsEarlyFramesToPlayoutDelay) {
    auto truth = stream(4, kTf120);
    truth[1].edge_arrival_ms = truth[1].gen_time_ms + 1.0;
    truth[2].edge_arrival_ms = truth[2].gen_time_ms + 6.0;
    EdgeUser e(cfg(1, 4.0), ErrorModel{}, truth);
    EXPECT_DOUBLE_EQ(e.playoff_release(truth[1]), truth[1].gen_time_ms + 4.0);
    EXPECT_DOUBLE_EQ(e.playoff_release(truth[2]), truth[2].gen_time_ms + 6.0);

    const EdgeOutput held = e.on_event(arrival(1), truth[1].edge_arrival_ms);
    EXPECT_TRUE(held.to_mac.empty());
    ASSERT_TRUE(held.release_at_ms.has_value());
    EXPECT_DOUBLE_EQ(*held.release_at_ms, truth[1].gen_time_ms + 4.0);
    const EdgeOutput released = e.on_event(release(1), *held.release_at_ms);
    ASSERT_EQ(released.to_mac.size(), 1u);
    EXPECT_EQ(released.to_mac[0].frame_idx, 2u);

    const EdgeOutput passed = e.on_event(arrival(2), truth[2].edge_arrival_ms);
    EXPECT_FALSE(passed.release_at_ms.has_value());
    ASSERT_EQ(passed.to_mac.size(), 1u);
    EXPECT_EQ(passed.to_mac[0].frame_idx, 3u);
}

TEST(PlayoffRelease, ZeroJitterZeroDelayIsArrival) {
    const auto truth = stream(2, kTf120);
    EdgeUser e(cfg(1, 0.0), ErrorModel{}, truth);
    EXPECT_EQ(e.playoff_release(truth[0]), truth[0].edge_arrival_ms);
}

TEST(EdgeUser, OutOfOrderEventIsInternalError) {
    const auto truth = stream(4, kTf120);
    EdgeUser e(cfg(1), ErrorModel{}, truth);
    e.on_event(arrival(2), truth[2].gen_time_ms);
    EXPECT_THROW(e.on_event(arrival(1), truth[1].gen_time_ms), InternalError);
}

TEST(EdgeUser, PredictionTime) {
    const auto truth = stream(2, kTf120);
    EXPECT_DOUBLE_EQ(EdgeUser(cfg(2), ErrorModel{}, truth).t_pred_ms(), 2 * kTf120);
}

}  // namespace
}  // namespace xrsim
