#include <gtest/gtest.h>

#include <vector>

#include "xrsim/error.hpp"
#include "xrsim/sched.hpp"

namespace xrsim {
namespace {

std::vector<LinkState> links_with_rates(std::initializer_list<std::int64_t> rates) {
    std::vector<LinkState> links;
    UserId id = 0;
    for (std::int64_t r : rates) {
        LinkState l;
        l.user_id = id++;
        l.cqi = 15;
        l.bits_per_rb_slot = r;
        links.push_back(l);
    }
    return links;
}

std::vector<MacQueue> queues_for(std::size_t n, std::int64_t capacity = 1'000'000'000) {
    std::vector<MacQueue> q;
    for (std::size_t u = 0; u < n; ++u) q.emplace_back(static_cast<UserId>(u), capacity);
    return q;
}

SchedulerConfig config(Policy p) {
    SchedulerConfig c;
    c.policy = p;
    return c;
}

RadioConfig no_errors() {
    RadioConfig r;
    r.target_bler = 0.0;
    return r;
}

TEST(MaxCqi, BestUserFirstUntilDrained) {
    const auto links = links_with_rates({1000, 500});
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 50000);
    queues[1].enqueue(1, 0, 500000);
    Scheduler s(config(Policy::kMaxCqi), 135, links, {1, 1});
    const SlotAllocation a = s.dl_schedule(0, queues, links);
    ASSERT_EQ(a.assignments.size(), 2u);
    EXPECT_EQ(a.assignments[0].user_id, 0u);
    EXPECT_EQ(a.assignments[0].rb_count, 50);
    EXPECT_EQ(a.assignments[1].rb_count, 85);
    EXPECT_EQ(a.rbs_used(), 135);
}

TEST(MaxCqi, TiesGoToLowestId) {
    const auto links = links_with_rates({700, 700});
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 1'000'000);
    queues[1].enqueue(1, 0, 1'000'000);
    Scheduler s(config(Policy::kMaxCqi), 135, links, {1, 1});
    const SlotAllocation a = s.dl_schedule(0, queues, links);
    ASSERT_EQ(a.assignments.size(), 1u);
    EXPECT_EQ(a.assignments[0].user_id, 0u);
}

TEST(Pf, EqualAveragesReduceToMaxCqi) {
    const auto links = links_with_rates({500, 1000});
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 1'000'000);
    queues[1].enqueue(1, 0, 1'000'000);
    Scheduler s(config(Policy::kPf), 135, links, {1, 1});
    s.set_pf_average(0, 750.0);
    s.set_pf_average(1, 750.0);
    const SlotAllocation a = s.dl_schedule(0, queues, links);
    ASSERT_EQ(a.assignments.size(), 1u);
    EXPECT_EQ(a.assignments[0].user_id, 1u);
}

TEST(Pf, AverageUpdatedEverySlot) {
    const auto links = links_with_rates({1000, 1000});
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 1'000'000);
    Scheduler s(config(Policy::kPf), 135, links, {1, 1});
    s.dl_schedule(0, queues, links);
    EXPECT_DOUBLE_EQ(s.pf_average(0), 0.99 * 1000 + 0.01 * 135000);
    EXPECT_DOUBLE_EQ(s.pf_average(1), 0.99 * 1000);
}

TEST(Pf, StarvedUserEventuallyServed) {
    const auto links = links_with_rates({1000, 200});
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 1'000'000'000);
    queues[1].enqueue(1, 0, 1'000'000'000);
    Scheduler s(config(Policy::kPf), 135, links, {1, 1});
    bool served = false;
    for (int slot = 0; slot < 200 && !served; ++slot) {
        for (const Assignment& a : s.dl_schedule(slot, queues, links).assignments) served |= a.user_id == 1;
    }
    EXPECT_TRUE(served);
}

TEST(Drr, HandTraceEachUserDrainsInItsVisit) {
    const auto links = links_with_rates({1000, 1000});
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 8000);
    queues[1].enqueue(1, 0, 8000);
    Scheduler s(config(Policy::kDrr), 135, links, {8000, 8000});
    const SlotAllocation a = s.dl_schedule(0, queues, links);
    ASSERT_EQ(a.assignments.size(), 2u);
    for (const Assignment& as : a.assignments) {
        EXPECT_EQ(as.rb_count, 8);
        EXPECT_LE(as.tb_bits, 8000);
        EXPECT_EQ(s.drr_deficit(as.user_id), 0);
    }
}

TEST(Drr, ResidualDeficitCarriesOver) {
    const auto links = links_with_rates({1000, 1000});
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 1'000'000);
    queues[1].enqueue(1, 0, 1'000'000);
    Scheduler s(config(Policy::kDrr), 135, links, {2500, 2500});
    const SlotAllocation a = s.dl_schedule(0, queues, links);
    // Each visit affords 2 RBs and leaves 500 bits; the third visit affords 3.
    EXPECT_EQ(a.rbs_used(), 135);
    EXPECT_GE(s.drr_deficit(0), 0);
    EXPECT_LT(s.drr_deficit(0), 1000 + 2500);
}

TEST(Drr, LongRunFairness) {
    const auto links = links_with_rates({1000, 1000});
    auto queues = queues_for(2);
    Scheduler s(config(Policy::kDrr), 135, links, {30000, 30000});
    std::int64_t served[2] = {0, 0};
    FrameId next = 0;
    for (int slot = 0; slot < 10000; ++slot) {
        for (std::size_t u = 0; u < 2; ++u) {
            if (queues[u].backlog_bits() < 400000) queues[u].enqueue(next++, 0, 400000);
        }
        for (Assignment& a : s.dl_schedule(slot, queues, links).assignments) {
            served[a.user_id] += a.tb_bits;
            std::int64_t bits = 0;
            for (const Segment& seg : a.segments) bits += seg.bits;
            queues[a.user_id].release(bits);
        }
    }
    const double ratio = static_cast<double>(served[0]) / static_cast<double>(served[1]);
    EXPECT_NEAR(ratio, 1.0, 0.01);
}

TEST(Scheduling, NeverExceedsBacklogRoundedUp) {
    const auto links = links_with_rates({1000});
    for (Policy p : {Policy::kPf, Policy::kDrr, Policy::kMaxCqi}) {
        auto queues = queues_for(1);
        queues[0].enqueue(0, 0, 2500);
        Scheduler s(config(p), 135, links, {1'000'000});
        const SlotAllocation a = s.dl_schedule(0, queues, links);
        ASSERT_EQ(a.assignments.size(), 1u) << to_string(p);
        EXPECT_EQ(a.assignments[0].rb_count, 3) << to_string(p);
    }
}

TEST(Scheduling, OutOfRangeUserGetsNothing) {
    auto links = links_with_rates({0, 1000});
    links[0].cqi = 0;
    auto queues = queues_for(2);
    queues[0].enqueue(0, 0, 5000);
    for (Policy p : {Policy::kPf, Policy::kDrr, Policy::kMaxCqi}) {
        Scheduler s(config(p), 135, links, {1000, 1000});
        EXPECT_TRUE(s.dl_schedule(0, queues, links).assignments.empty()) << to_string(p);
    }
}

struct Delivery {
    int slots = 0;
    bool delivered = false;
};

Delivery deliver_one_frame(int num_rbs, std::int64_t rate, std::int64_t size) {
    const auto links = links_with_rates({rate});
    auto queues = queues_for(1);
    std::vector<FrameProgress> frames(1);
    frames[0].size_bits = size;
    queues[0].enqueue(0, 0, size);
    Scheduler s(config(Policy::kPf), num_rbs, links, {1});
    Delivery d;
    for (int slot = 0; slot < 100 && !d.delivered; ++slot) {
        const SlotAllocation a = s.dl_schedule(slot, queues, links);
        const TransmitEvents ev = transmit(a, queues, frames, 1, no_errors(), SchedulerConfig{});
        d.slots = slot + 1;
        d.delivered = !ev.delivered.empty();
    }
    return d;
}

TEST(Transmit, FullCarrierDeliversInOneSlot) {
    const Delivery d = deliver_one_frame(135, 5000, 500000);
    EXPECT_TRUE(d.delivered);
    EXPECT_EQ(d.slots, 1);
}

TEST(Transmit, FiftyRbsTakeTwoSlots) {
    const Delivery d = deliver_one_frame(50, 5000, 500000);
    EXPECT_TRUE(d.delivered);
    EXPECT_EQ(d.slots, 2);
}

TEST(Transmit, ExhaustedHarqDropsFrameAndFreesQueue) {
    const auto links = links_with_rates({1000});
    auto queues = queues_for(1);
    std::vector<FrameProgress> frames(1);
    frames[0].size_bits = 5000;
    queues[0].enqueue(0, 0, 5000);
    SchedulerConfig cfg = config(Policy::kPf);
    Scheduler s(cfg, 135, links, {1});
    RadioConfig always_fail;
    always_fail.target_bler = 1.0;
    int drops = 0;
    int retries = 0;
    for (int slot = 0; slot < 40; ++slot) {
        queues[0].promote(slot);
        const TransmitEvents ev = transmit(s.dl_schedule(slot, queues, links), queues, frames, 1, always_fail, cfg);
        drops += static_cast<int>(ev.dropped.size());
        retries += static_cast<int>(ev.retries.size());
    }
    EXPECT_EQ(drops, 1);
    EXPECT_EQ(retries, cfg.max_harq_attempts - 1);
    EXPECT_TRUE(frames[0].dropped);
    EXPECT_EQ(queues[0].stored_bits(), 0);
    EXPECT_EQ(queues[0].backlog_bits(), 0);
}

TEST(Transmit, RetransmissionWaitsForRtt) {
    MacQueue q(0, 100000);
    q.enqueue(0, 0, 1000);
    auto segs = q.take(1000);
    ASSERT_EQ(segs.size(), 1u);
    q.schedule_retx(segs[0], 4);
    EXPECT_EQ(q.backlog_bits(), 0);
    q.promote(3);
    EXPECT_EQ(q.backlog_bits(), 0);
    q.promote(4);
    EXPECT_EQ(q.backlog_bits(), 1000);
    EXPECT_EQ(q.stored_bits(), 1000);
}

TEST(MacQueue, CapacityOfTwoFramesRejectsThird) {
    MacQueue q(0, 2 * 500000);
    EXPECT_TRUE(q.enqueue(0, 0, 500000));
    EXPECT_TRUE(q.enqueue(1, 1, 500000));
    EXPECT_FALSE(q.enqueue(2, 2, 500000));
    EXPECT_EQ(q.dropped_frames(), 1u);
    EXPECT_EQ(q.stored_bits(), 1000000);
}

TEST(MacQueue, TakeSplitsHeadInFifoOrder) {
    MacQueue q(0, 100000);
    q.enqueue(7, 0, 300);
    q.enqueue(8, 1, 300);
    const auto first = q.take(400);
    ASSERT_EQ(first.size(), 2u);
    EXPECT_EQ(first[0].frame, 7u);
    EXPECT_EQ(first[1].frame, 8u);
    EXPECT_EQ(first[1].bits, 100);
    const auto second = q.take(1000);
    ASSERT_EQ(second.size(), 1u);
    EXPECT_EQ(second[0].offset_bits, 100);
    EXPECT_EQ(second[0].bits, 200);
}

TEST(Policy, ParseAcceptsSpellingsAndRejectsUnknown) {
    EXPECT_EQ(parse_policy("pf"), Policy::kPf);
    EXPECT_EQ(parse_policy("Max-CQI"), Policy::kMaxCqi);
    EXPECT_EQ(parse_policy("DRR"), Policy::kDrr);
    try {
        parse_policy("RR");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "scheduler.policy");
    }
}

}  // namespace
}  // namespace xrsim
