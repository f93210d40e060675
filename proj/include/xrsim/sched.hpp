#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "xrsim/radio.hpp"

namespace xrsim {

enum class Policy { kPf, kDrr, kMaxCqi };

std::string_view to_string(Policy policy);
/// Accepts PF, DRR, MAX_CQI (case-insensitive, '-' or '_'). Throws ConfigError.
Policy parse_policy(std::string_view name);

struct SchedulerConfig {
    Policy policy = Policy::kPf;
    double pf_beta = 0.01;
    std::int64_t drr_quantum_bits = 0;   // 0: mean frame size / 8, per user
    int harq_rtt_slots = 4;
    int max_harq_attempts = 4;
    double queue_capacity_frames = 16.0; // in mean frame sizes, per user

    void validate() const;
};

/// Engine-global frame identifier.
using FrameId = std::uint32_t;

/// A contiguous run of one frame's bits waiting in (or in flight from) a MAC queue.
struct Segment {
    FrameId frame = 0;
    std::uint32_t frame_idx = 0;
    std::int64_t offset_bits = 0;
    std::int64_t bits = 0;
    int failures = 0;
    std::int64_t ready_slot = 0;
};

/// Per-user downlink buffer. Fresh bits are served FIFO; HARQ retransmissions
/// take precedence once their RTT has elapsed.
class MacQueue {
public:
    MacQueue(UserId user_id, std::int64_t capacity_bits);

    /// Appends the frame if it fits; otherwise counts a drop and returns false.
    bool enqueue(FrameId frame, std::uint32_t frame_idx, std::int64_t size_bits);

    /// Bits eligible for transmission now.
    std::int64_t backlog_bits() const { return ready_bits_; }
    /// All undelivered bits, including in-flight and HARQ-pending ones.
    std::int64_t stored_bits() const { return stored_bits_; }
    std::int64_t capacity_bits() const { return capacity_bits_; }
    std::uint64_t dropped_frames() const { return dropped_frames_; }
    bool has_pending_harq() const { return !pending_.empty(); }
    UserId user_id() const { return user_id_; }

    /// Removes up to `bits` eligible bits, retransmissions first.
    std::vector<Segment> take(std::int64_t bits);
    /// Successful delivery of bits previously taken.
    void release(std::int64_t bits);
    /// Failed segment becomes eligible again at `ready_slot`.
    void schedule_retx(Segment segment, std::int64_t ready_slot);
    /// Moves HARQ-pending segments with ready_slot <= slot to the eligible set.
    void promote(std::int64_t slot);
    /// Discards every queued segment of `frame`. `in_flight_bits` are bits of
    /// the frame already taken but not yet resolved. Returns bits discarded.
    std::int64_t drop_frame(FrameId frame, std::int64_t in_flight_bits);

private:
    UserId user_id_;
    std::int64_t capacity_bits_;
    std::int64_t stored_bits_ = 0;
    std::int64_t ready_bits_ = 0;
    std::uint64_t dropped_frames_ = 0;
    std::deque<Segment> fresh_;
    std::deque<Segment> retx_;
    std::deque<Segment> pending_;
};

struct Assignment {
    UserId user_id = 0;
    int rb_count = 0;
    std::int64_t tb_bits = 0;
    std::vector<Segment> segments;
};

struct SlotAllocation {
    std::int64_t slot_idx = 0;
    std::vector<Assignment> assignments;

    int rbs_used() const;
};

/// Downlink scheduler state for PF, DRR and MAX-CQI.
///
/// Allocation is RB-granular. PF and MAX-CQI hand each RB, in index order, to
/// the backlogged user with the best metric; because the channel is static
/// within a slot the metric does not change between RBs, so this is computed
/// as a greedy fill in metric order. Ties go to the lowest user id.
class Scheduler {
public:
    Scheduler(SchedulerConfig config, int num_rbs, std::span<const LinkState> links,
              std::vector<std::int64_t> drr_quanta);

    /// Chooses RBs for this slot and pulls the transport-block contents out of
    /// `queues`. Must be called once per slot, idle or not (PF averaging).
    SlotAllocation dl_schedule(std::int64_t slot_idx, std::span<MacQueue> queues,
                               std::span<const LinkState> links);

    double pf_average(UserId user) const { return pf_avg_[user]; }
    void set_pf_average(UserId user, double bits_per_slot) { pf_avg_[user] = bits_per_slot; }
    std::int64_t drr_deficit(UserId user) const { return drr_deficit_[user]; }
    const SchedulerConfig& config() const { return config_; }

private:
    void allocate_by_metric(std::span<MacQueue> queues, std::span<const LinkState> links,
                            std::vector<int>& rbs);
    void allocate_drr(std::span<MacQueue> queues, std::span<const LinkState> links,
                      std::vector<int>& rbs);

    SchedulerConfig config_;
    int num_rbs_;
    std::vector<double> pf_avg_;
    std::vector<std::int64_t> drr_quanta_;
    std::vector<std::int64_t> drr_deficit_;
    std::vector<bool> drr_in_list_;
    std::vector<bool> drr_in_visit_;
    std::deque<UserId> drr_active_;
};

/// Delivery bookkeeping for one frame at the MAC.
struct FrameProgress {
    std::int64_t size_bits = 0;
    std::int64_t delivered_bits = 0;
    bool delivered = false;
    bool dropped = false;
};

struct HarqRetry {
    UserId user_id = 0;
    std::int64_t ready_slot = 0;
};

struct TransmitEvents {
    std::vector<FrameId> delivered;  // completed at the end of this slot
    std::vector<FrameId> dropped;    // HARQ attempts exhausted
    std::vector<HarqRetry> retries;
};

/// Resolves every TB of `alloc`. Each TB fails independently with
/// target_bler; the draw is keyed by (seed, user, head frame, head offset,
/// attempt), so a given piece of data sees the same outcome regardless of
/// the slot it is sent in.
TransmitEvents transmit(const SlotAllocation& alloc, std::span<MacQueue> queues,
                        std::span<FrameProgress> frames, std::uint64_t seed,
                        const RadioConfig& radio, const SchedulerConfig& config);

}  // namespace xrsim
