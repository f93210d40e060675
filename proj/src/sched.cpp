#include "xrsim/sched.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "xrsim/error.hpp"

namespace xrsim {
namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

template <typename Pred>
std::int64_t erase_segments(std::deque<Segment>& q, Pred pred) {
    std::int64_t removed = 0;
    for (auto it = q.begin(); it != q.end();) {
        if (pred(*it)) {
            removed += it->bits;
            it = q.erase(it);
        } else {
            ++it;
        }
    }
    return removed;
}

}  // namespace

std::string_view to_string(Policy policy) {
    switch (policy) {
        case Policy::kPf: return "PF";
        case Policy::kDrr: return "DRR";
        case Policy::kMaxCqi: return "MAX_CQI";
    }
    return "?";
}

Policy parse_policy(std::string_view name) {
    std::string key;
    for (char c : name) {
        key.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (key == "PF") return Policy::kPf;
    if (key == "DRR") return Policy::kDrr;
    if (key == "MAX_CQI" || key == "MAXCQI") return Policy::kMaxCqi;
    throw ConfigError("unknown policy '" + std::string(name) + "' (expected PF, DRR or MAX_CQI)",
                      "scheduler.policy");
}

void SchedulerConfig::validate() const {
    if (!(pf_beta > 0.0 && pf_beta < 1.0)) throw ConfigError("must lie in (0, 1)", "scheduler.pf_beta");
    if (drr_quantum_bits < 0) throw ConfigError("must be nonnegative", "scheduler.drr_quantum_bits");
    if (harq_rtt_slots < 1) throw ConfigError("must be positive", "scheduler.harq_rtt_slots");
    if (max_harq_attempts < 1) throw ConfigError("must be positive", "scheduler.max_harq_attempts");
    if (!(queue_capacity_frames > 0.0)) {
        throw ConfigError("must be positive", "scheduler.queue_capacity_frames");
    }
}

// ---------------------------------------------------------------- MacQueue

MacQueue::MacQueue(UserId user_id, std::int64_t capacity_bits)
    : user_id_(user_id), capacity_bits_(capacity_bits) {}

bool MacQueue::enqueue(FrameId frame, std::uint32_t frame_idx, std::int64_t size_bits) {
    if (stored_bits_ + size_bits > capacity_bits_) {
        ++dropped_frames_;
        return false;
    }
    fresh_.push_back(Segment{frame, frame_idx, 0, size_bits, 0, 0});
    stored_bits_ += size_bits;
    ready_bits_ += size_bits;
    return true;
}

std::vector<Segment> MacQueue::take(std::int64_t bits) {
    std::vector<Segment> out;
    auto drain = [&](std::deque<Segment>& q) {
        while (bits > 0 && !q.empty()) {
            Segment& head = q.front();
            if (head.bits <= bits) {
                bits -= head.bits;
                ready_bits_ -= head.bits;
                out.push_back(head);
                q.pop_front();
            } else {
                Segment part = head;
                part.bits = bits;
                head.offset_bits += bits;
                head.bits -= bits;
                ready_bits_ -= bits;
                bits = 0;
                out.push_back(part);
            }
        }
    };
    drain(retx_);
    drain(fresh_);
    return out;
}

void MacQueue::release(std::int64_t bits) { stored_bits_ -= bits; }

void MacQueue::schedule_retx(Segment segment, std::int64_t ready_slot) {
    segment.ready_slot = ready_slot;
    pending_.push_back(segment);
}

void MacQueue::promote(std::int64_t slot) {
    // RTT is constant, so pending_ is ordered by ready_slot.
    while (!pending_.empty() && pending_.front().ready_slot <= slot) {
        ready_bits_ += pending_.front().bits;
        retx_.push_back(pending_.front());
        pending_.pop_front();
    }
}

std::int64_t MacQueue::drop_frame(FrameId frame, std::int64_t in_flight_bits) {
    auto match = [frame](const Segment& s) { return s.frame == frame; };
    const std::int64_t fresh = erase_segments(fresh_, match);
    const std::int64_t retx = erase_segments(retx_, match);
    const std::int64_t pending = erase_segments(pending_, match);
    ready_bits_ -= fresh + retx;
    const std::int64_t removed = fresh + retx + pending + in_flight_bits;
    stored_bits_ -= removed;
    return removed;
}

// -------------------------------------------------------------- Scheduler

int SlotAllocation::rbs_used() const {
    return std::accumulate(assignments.begin(), assignments.end(), 0,
                           [](int acc, const Assignment& a) { return acc + a.rb_count; });
}

Scheduler::Scheduler(SchedulerConfig config, int num_rbs, std::span<const LinkState> links,
                     std::vector<std::int64_t> drr_quanta)
    : config_(config),
      num_rbs_(num_rbs),
      pf_avg_(links.size()),
      drr_quanta_(std::move(drr_quanta)),
      drr_deficit_(links.size(), 0),
      drr_in_list_(links.size(), false),
      drr_in_visit_(links.size(), false) {
    config_.validate();
    if (drr_quanta_.size() != links.size()) {
        throw ConfigError("one DRR quantum per user required", "scheduler.drr_quantum_bits");
    }
    // Warm start at one RB's rate so the PF ratio is always defined.
    for (std::size_t u = 0; u < links.size(); ++u) {
        pf_avg_[u] = static_cast<double>(std::max<std::int64_t>(1, links[u].bits_per_rb_slot));
    }
}

SlotAllocation Scheduler::dl_schedule(std::int64_t slot_idx, std::span<MacQueue> queues,
                                      std::span<const LinkState> links) {
    std::vector<int> rbs(queues.size(), 0);
    if (config_.policy == Policy::kDrr) {
        allocate_drr(queues, links, rbs);
    } else {
        allocate_by_metric(queues, links, rbs);
    }

    SlotAllocation alloc;
    alloc.slot_idx = slot_idx;
    for (std::size_t u = 0; u < queues.size(); ++u) {
        std::int64_t served = 0;
        if (rbs[u] > 0) {
            Assignment a;
            a.user_id = static_cast<UserId>(u);
            a.rb_count = rbs[u];
            a.tb_bits = static_cast<std::int64_t>(rbs[u]) * links[u].bits_per_rb_slot;
            a.segments = queues[u].take(a.tb_bits);
            served = a.tb_bits;
            alloc.assignments.push_back(std::move(a));
        }
        pf_avg_[u] = (1.0 - config_.pf_beta) * pf_avg_[u] + config_.pf_beta * static_cast<double>(served);
    }
    return alloc;
}

void Scheduler::allocate_by_metric(std::span<MacQueue> queues, std::span<const LinkState> links,
                                   std::vector<int>& rbs) {
    struct Candidate {
        UserId user;
        double metric;
    };
    std::vector<Candidate> candidates;
    for (std::size_t u = 0; u < queues.size(); ++u) {
        if (queues[u].backlog_bits() <= 0 || links[u].bits_per_rb_slot <= 0) continue;
        const double rate = static_cast<double>(links[u].bits_per_rb_slot);
        const double metric = config_.policy == Policy::kPf ? rate / pf_avg_[u] : rate;
        candidates.push_back({static_cast<UserId>(u), metric});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.metric > b.metric; });
    int remaining = num_rbs_;
    for (const Candidate& c : candidates) {
        if (remaining == 0) break;
        const std::int64_t need = ceil_div(queues[c.user].backlog_bits(), links[c.user].bits_per_rb_slot);
        const int grant = static_cast<int>(std::min<std::int64_t>(need, remaining));
        rbs[c.user] = grant;
        remaining -= grant;
    }
}

void Scheduler::allocate_drr(std::span<MacQueue> queues, std::span<const LinkState> links,
                             std::vector<int>& rbs) {
    const std::size_t n = queues.size();
    auto eligible = [&](std::size_t u) {
        return queues[u].backlog_bits() > 0 && links[u].bits_per_rb_slot > 0;
    };
    // Users whose queue emptied leave the round and lose their deficit.
    for (auto it = drr_active_.begin(); it != drr_active_.end();) {
        if (!eligible(*it)) {
            drr_in_list_[*it] = false;
            drr_in_visit_[*it] = false;
            drr_deficit_[*it] = 0;
            it = drr_active_.erase(it);
        } else {
            ++it;
        }
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (!drr_in_list_[u] && eligible(u)) {
            drr_in_list_[u] = true;
            drr_active_.push_back(static_cast<UserId>(u));
        }
    }

    std::vector<std::int64_t> left(n);
    for (std::size_t u = 0; u < n; ++u) left[u] = queues[u].backlog_bits();

    int remaining = num_rbs_;
    while (remaining > 0 && !drr_active_.empty()) {
        const UserId u = drr_active_.front();
        const std::int64_t rate = links[u].bits_per_rb_slot;
        if (!drr_in_visit_[u]) {
            drr_deficit_[u] += drr_quanta_[u];
            drr_in_visit_[u] = true;
        }
        const std::int64_t affordable = drr_deficit_[u] / rate;
        const std::int64_t need = ceil_div(left[u], rate);
        const int grant = static_cast<int>(std::min<std::int64_t>({affordable, need, remaining}));
        rbs[u] += grant;
        remaining -= grant;
        drr_deficit_[u] -= static_cast<std::int64_t>(grant) * rate;
        left[u] -= static_cast<std::int64_t>(grant) * rate;

        if (left[u] <= 0) {
            drr_active_.pop_front();
            drr_in_list_[u] = false;
            drr_in_visit_[u] = false;
            drr_deficit_[u] = 0;
        } else if (drr_deficit_[u] < rate) {
            drr_active_.pop_front();
            drr_active_.push_back(u);
            drr_in_visit_[u] = false;
        }
        // Otherwise the slot ran out of RBs mid-visit; the visit resumes next slot.
    }
}

// --------------------------------------------------------------- transmit

TransmitEvents transmit(const SlotAllocation& alloc, std::span<MacQueue> queues,
                        std::span<FrameProgress> frames, std::uint64_t seed,
                        const RadioConfig& radio, const SchedulerConfig& config) {
    TransmitEvents events;
    for (const Assignment& a : alloc.assignments) {
        if (a.segments.empty()) continue;
        MacQueue& queue = queues[a.user_id];
        const Segment& head = a.segments.front();
        const bool ok = tb_success(derive_seed(seed, {tag(SeedTag::kTransportBlock), a.user_id, head.frame_idx,
                                                      static_cast<std::uint64_t>(head.offset_bits),
                                                      static_cast<std::uint64_t>(head.failures)}),
                                   radio);

        if (ok) {
            for (const Segment& s : a.segments) {
                FrameProgress& fp = frames[s.frame];
                queue.release(s.bits);
                fp.delivered_bits += s.bits;
                if (fp.delivered_bits == fp.size_bits) {
                    fp.delivered = true;
                    events.delivered.push_back(s.frame);
                }
            }
            continue;
        }

        bool retry_scheduled = false;
        for (std::size_t i = 0; i < a.segments.size(); ++i) {
            Segment s = a.segments[i];
            FrameProgress& fp = frames[s.frame];
            if (fp.dropped) {
                // Dropped earlier in this TB; its in-flight bits were released then.
                continue;
            }
            s.failures += 1;
            if (s.failures >= config.max_harq_attempts) {
                std::int64_t in_flight = 0;
                for (std::size_t j = i; j < a.segments.size(); ++j) {
                    if (a.segments[j].frame == s.frame) in_flight += a.segments[j].bits;
                }
                queue.drop_frame(s.frame, in_flight);
                fp.dropped = true;
                events.dropped.push_back(s.frame);
                continue;
            }
            queue.schedule_retx(s, alloc.slot_idx + config.harq_rtt_slots);
            retry_scheduled = true;
        }
        if (retry_scheduled) {
            events.retries.push_back({a.user_id, alloc.slot_idx + config.harq_rtt_slots});
        }
    }
    return events;
}

}  // namespace xrsim
