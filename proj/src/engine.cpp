#include "xrsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <queue>
#include <thread>

#include "xrsim/error.hpp"

namespace xrsim {
namespace {

enum class EventKind : std::uint8_t {
    kFrameGenerated = 0,
    kFrameAtEdge = 1,
    kPlayoutRelease = 2,
    kEdgeDeadline = 3,
    kSlotTick = 4,
    kHarqReady = 5,
};

struct Event {
    double time_ms;
    EventKind kind;
    std::uint64_t seq;
    UserId user;
    std::uint32_t frame_idx;
    std::int64_t slot;
};

// Total order (time, kind, seq); std::priority_queue is a max-heap.
struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time_ms != b.time_ms) return a.time_ms > b.time_ms;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

class EventQueue {
public:
    void push(double time_ms, EventKind kind, UserId user = 0, std::uint32_t frame_idx = 0, std::int64_t slot = 0) {
        heap_.push(Event{time_ms, kind, next_seq_++, user, frame_idx, slot});
        max_size_ = std::max<std::uint64_t>(max_size_, heap_.size());
    }
    bool empty() const { return heap_.empty(); }
    const Event& top() const { return heap_.top(); }
    void pop() { heap_.pop(); }
    std::uint64_t max_size() const { return max_size_; }

private:
    std::priority_queue<Event, std::vector<Event>, EventAfter> heap_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t max_size_ = 0;
};

class Fnv1a {
public:
    template <typename T>
    void add(const T& value) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (unsigned char b : bytes) {
            hash_ = (hash_ ^ b) * 0x100000001b3ULL;
        }
    }
    void add(const std::optional<double>& value) {
        add(value.has_value());
        add(value.value_or(0.0));
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::uint64_t report_digest(const SimReport& report) {
    Fnv1a h;
    for (const FrameRecord& r : report.frames) {
        h.add(r.user_id);
        h.add(r.frame_idx);
        h.add(r.size_bits);
        h.add(r.gen_time_ms);
        h.add(r.edge_arrival_ms);
        h.add(r.mac_available_ms);
        h.add(r.delivery_ms);
        h.add(r.display_deadline_ms);
        h.add(r.dropped);
        h.add(r.met_deadline);
        h.add(r.is_predicted);
        h.add(r.counted);
        h.add(r.effective_horizon);
        h.add(r.display_horizon);
    }
    for (const UserKpi& k : report.users) {
        h.add(k.user_id);
        h.add(k.reliability);
        h.add(k.mean_mse);
        h.add(k.sinr_db);
    }
    const RunSummary& s = report.summary;
    h.add(s.slots_processed);
    h.add(s.transport_blocks);
    h.add(s.tb_failures);
    h.add(s.satisfied_users);
    h.add(s.delay_reliable_throughput);
    return h.value();
}

void check(std::vector<std::string>& out, bool ok, const std::string& field, const std::string& what) {
    if (!ok) out.push_back(field + ": " + what);
}

template <typename Fn>
void check_throws(std::vector<std::string>& out, Fn fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        out.emplace_back(e.what());
    }
}

}  // namespace

std::vector<UserSpec> Scenario::user_specs() const {
    const double playout = edge.playout_delay_ms.value_or(traffic.jitter_trunc_ms);
    auto base = [&] {
        UserSpec s;
        s.traffic = traffic;
        s.p_d = edge.p_d;
        s.delay_bound_ms = edge.delay_bound_ms;
        s.playout_delay_ms = playout;
        s.reliability_target = reliability_target;
        return s;
    };
    std::vector<UserSpec> specs;
    if (users.empty()) {
        specs.assign(static_cast<std::size_t>(std::max(0, num_users)), base());
        return specs;
    }
    for (const UserOverride& o : users) {
        UserSpec s = base();
        s.position = o.position;
        if (o.p_d) s.p_d = *o.p_d;
        if (o.delay_bound_ms) s.delay_bound_ms = *o.delay_bound_ms;
        if (o.frame_rate_fps) s.traffic.frame_rate_fps = *o.frame_rate_fps;
        if (o.data_rate_bps) s.traffic.data_rate_bps = *o.data_rate_bps;
        if (o.reliability_target) s.reliability_target = *o.reliability_target;
        specs.push_back(s);
    }
    return specs;
}

std::vector<std::string> validate(const Scenario& sc) {
    std::vector<std::string> v;
    check(v, sc.duration_ms > 0.0, "duration_ms", "must be positive");
    check(v, sc.warmup_ms >= 0.0, "warmup_ms", "must be nonnegative");
    check(v, sc.duration_ms >= sc.warmup_ms + 1000.0, "duration_ms", "must be at least warmup_ms + 1000");
    check(v, sc.area_m > 0.0, "area_m", "must be positive");
    check(v, sc.reliability_target >= 0.0 && sc.reliability_target <= 1.0, "reliability_target",
          "must lie in [0, 1]");
    check(v, sc.session_start_ms >= 0.0, "session_start_ms", "must be nonnegative");
    check(v, sc.num_users >= 0, "num_users", "must be nonnegative");
    check(v, sc.runs_per_point >= 1, "runs_per_point", "must be positive");
    check_throws(v, [&] { sc.radio.validate(); });
    check_throws(v, [&] { sc.scheduler.validate(); });
    check_throws(v, [&] { sc.traffic.validate(); });
    check_throws(v, [&] { sc.edge.error_model.validate(); });
    check(v, sc.edge.p_d >= 0, "edge.p_d", "must be nonnegative");
    check(v, sc.edge.delay_bound_ms >= 0.0, "edge.delay_bound_ms", "must be nonnegative");
    if (sc.edge.playout_delay_ms) {
        check(v, *sc.edge.playout_delay_ms >= 0.0, "edge.playout_delay_ms", "must be nonnegative");
    }
    for (std::size_t i = 0; i < sc.users.size(); ++i) {
        const UserOverride& o = sc.users[i];
        const std::string path = "users[" + std::to_string(i) + "]";
        if (o.position) {
            check(v, o.position->x_m >= 0.0 && o.position->x_m <= sc.area_m && o.position->y_m >= 0.0 &&
                         o.position->y_m <= sc.area_m,
                  path + ".position", "must lie inside the deployment area");
        }
        if (o.p_d) check(v, *o.p_d >= 0, path + ".p_d", "must be nonnegative");
        if (o.delay_bound_ms) check(v, *o.delay_bound_ms >= 0.0, path + ".delay_bound_ms", "must be nonnegative");
        if (o.frame_rate_fps) check(v, *o.frame_rate_fps > 0.0, path + ".frame_rate_fps", "must be positive");
        if (o.data_rate_bps) check(v, *o.data_rate_bps > 0.0, path + ".data_rate_bps", "must be positive");
        if (o.reliability_target) {
            check(v, *o.reliability_target >= 0.0 && *o.reliability_target <= 1.0,
                  path + ".reliability_target", "must lie in [0, 1]");
        }
    }
    for (int u : sc.sweep.users) check(v, u >= 0, "sweep.users", "user counts must be nonnegative");
    for (int p : sc.sweep.p_d) check(v, p >= 0, "sweep.p_d", "must be nonnegative");
    for (double d : sc.sweep.delay_bounds_ms) check(v, d >= 0.0, "sweep.delay_bound_ms", "must be nonnegative");
    check(v, sc.sweep.users.empty() || sc.users.empty(), "sweep.users",
          "cannot sweep user counts with an explicit users list");
    return v;
}

SimReport run(const Scenario& sc) {
    if (const auto problems = validate(sc); !problems.empty()) {
        throw ConfigError(problems.front());
    }
    const std::vector<UserSpec> specs = sc.user_specs();
    const std::size_t n = specs.size();
    const Position bs{sc.area_m / 2.0, sc.area_m / 2.0};

    SimReport report;
    report.links.reserve(n);
    std::vector<std::vector<XrFrame>> streams(n);
    std::vector<FrameId> base(n + 1, 0);
    for (std::size_t u = 0; u < n; ++u) {
        const UserSpec& spec = specs[u];
        const auto uid = static_cast<UserId>(u);
        Position pos;
        if (spec.position) {
            pos = *spec.position;
        } else {
            Rng rng(derive_seed(sc.seed, {tag(SeedTag::kPosition), uid}));
            pos.x_m = rng.uniform() * sc.area_m;
            pos.y_m = rng.uniform() * sc.area_m;
        }
        report.links.push_back(sinr_for_user(sc.radio, uid, pos, bs, sc.seed));
        StreamOptions opts;
        opts.delay_bound_ms = spec.delay_bound_ms;
        opts.randomize_epoch = sc.randomize_epochs;
        opts.session_start_ms = sc.session_start_ms;
        streams[u] = generate_stream(spec.traffic, uid, sc.duration_ms, sc.seed, opts);
        base[u + 1] = base[u] + static_cast<FrameId>(streams[u].size());
    }

    report.frames.resize(base[n]);
    std::vector<FrameProgress> progress(base[n]);
    for (std::size_t u = 0; u < n; ++u) {
        for (const XrFrame& f : streams[u]) {
            FrameRecord& r = report.frames[base[u] + f.frame_idx];
            r.user_id = f.user_id;
            r.frame_idx = f.frame_idx;
            r.size_bits = f.size_bits;
            r.gen_time_ms = f.gen_time_ms;
            r.edge_arrival_ms = f.edge_arrival_ms;
            r.display_deadline_ms = f.display_deadline_ms;
            r.cold_start = f.frame_idx < static_cast<std::uint32_t>(specs[u].p_d);
            progress[base[u] + f.frame_idx].size_bits = f.size_bits;
        }
    }

    std::vector<EdgeUser> edges;
    std::vector<MacQueue> queues;
    std::vector<std::int64_t> quanta;
    edges.reserve(n);
    queues.reserve(n);
    for (std::size_t u = 0; u < n; ++u) {
        const UserSpec& spec = specs[u];
        EdgeUserConfig ec{spec.p_d, spec.traffic.frame_period_ms(), spec.delay_bound_ms, spec.playout_delay_ms};
        edges.emplace_back(ec, sc.edge.error_model, streams[u]);
        const double mean_bits = spec.traffic.mean_frame_bits();
        queues.emplace_back(static_cast<UserId>(u),
                            static_cast<std::int64_t>(std::llround(sc.scheduler.queue_capacity_frames * mean_bits)));
        quanta.push_back(sc.scheduler.drr_quantum_bits > 0 ? sc.scheduler.drr_quantum_bits
                                                           : std::max<std::int64_t>(1, std::llround(mean_bits / 8.0)));
    }
    Scheduler scheduler(sc.scheduler, sc.radio.num_rbs, report.links, std::move(quanta));

    const double slot_ms = sc.radio.slot_ms();
    const auto num_slots = static_cast<std::int64_t>(std::ceil(sc.duration_ms / slot_ms - 1e-9));
    const double sim_end = static_cast<double>(num_slots) * slot_ms;

    RunSummary& sum = report.summary;
    sum.num_users = static_cast<int>(n);
    sum.frames_generated = base[n];

    EventQueue events;
    for (std::size_t u = 0; u < n; ++u) {
        if (!streams[u].empty()) {
            events.push(streams[u][0].gen_time_ms, EventKind::kFrameGenerated, static_cast<UserId>(u), 0);
        }
    }
    if (num_slots > 0) events.push(0.0, EventKind::kSlotTick, 0, 0, 0);

    auto apply = [&](UserId u, EdgeOutput&& out, double now) {
        for (const XrFrame& f : out.to_mac) {
            const FrameId id = base[u] + f.frame_idx;
            FrameRecord& r = report.frames[id];
            r.mac_available_ms = now;
            r.is_predicted = f.is_predicted;
            r.effective_horizon = f.effective_horizon;
            r.prediction_mse = sc.edge.error_model.mse(f.effective_horizon);
            if (!queues[u].enqueue(id, f.frame_idx, f.size_bits)) {
                r.dropped = true;
                progress[id].dropped = true;
                ++sum.overflow_drops;
            }
        }
        for (const PredictionRecord& p : out.predictions) {
            if (p.placeholder) ++sum.placeholders;
        }
    };

    double last_time = -1e300;
    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        if (ev.time_ms < last_time) {
            throw InternalError("event time went backwards");
        }
        last_time = ev.time_ms;
        if (ev.time_ms >= sim_end) break;

        switch (ev.kind) {
            case EventKind::kFrameGenerated: {
                const XrFrame& f = streams[ev.user][ev.frame_idx];
                events.push(f.edge_arrival_ms, EventKind::kFrameAtEdge, ev.user, ev.frame_idx);
                if (specs[ev.user].p_d > 0) {
                    events.push(edges[ev.user].deadline_ms(ev.frame_idx), EventKind::kEdgeDeadline, ev.user,
                                ev.frame_idx);
                }
                if (ev.frame_idx + 1 < streams[ev.user].size()) {
                    events.push(streams[ev.user][ev.frame_idx + 1].gen_time_ms, EventKind::kFrameGenerated, ev.user,
                                ev.frame_idx + 1);
                }
                break;
            }
            case EventKind::kFrameAtEdge: {
                EdgeOutput out = edges[ev.user].on_event({EdgeEventKind::kArrival, ev.frame_idx}, ev.time_ms);
                if (out.release_at_ms) {
                    events.push(*out.release_at_ms, EventKind::kPlayoutRelease, ev.user, ev.frame_idx);
                }
                apply(ev.user, std::move(out), ev.time_ms);
                break;
            }
            case EventKind::kPlayoutRelease:
                apply(ev.user, edges[ev.user].on_event({EdgeEventKind::kRelease, ev.frame_idx}, ev.time_ms),
                      ev.time_ms);
                break;
            case EventKind::kEdgeDeadline:
                apply(ev.user, edges[ev.user].on_event({EdgeEventKind::kDeadline, ev.frame_idx}, ev.time_ms),
                      ev.time_ms);
                break;
            case EventKind::kSlotTick: {
                SlotAllocation alloc = scheduler.dl_schedule(ev.slot, queues, report.links);
                const int used = alloc.rbs_used();
                if (used > sc.radio.num_rbs) {
                    throw InternalError("slot " + std::to_string(ev.slot) + " allocated " + std::to_string(used) +
                                        " RBs");
                }
                sum.max_rbs_used = std::max(sum.max_rbs_used, used);
                sum.allocations += alloc.assignments.size();
                ++sum.slots_processed;
                TransmitEvents tx = transmit(alloc, queues, progress, sc.seed, sc.radio, sc.scheduler);
                const double slot_end = static_cast<double>(ev.slot + 1) * slot_ms;
                for (const Assignment& a : alloc.assignments) {
                    if (!a.segments.empty()) ++sum.transport_blocks;
                }
                for (FrameId id : tx.delivered) report.frames[id].delivery_ms = slot_end;
                for (FrameId id : tx.dropped) {
                    report.frames[id].dropped = true;
                    ++sum.harq_drops;
                }
                for (const HarqRetry& r : tx.retries) {
                    ++sum.tb_failures;
                    events.push(static_cast<double>(r.ready_slot) * slot_ms, EventKind::kHarqReady, r.user_id, 0,
                                r.ready_slot);
                }
                if (ev.slot + 1 < num_slots) {
                    events.push(slot_end, EventKind::kSlotTick, 0, 0, ev.slot + 1);
                }
                break;
            }
            case EventKind::kHarqReady:
                queues[ev.user].promote(ev.slot);
                break;
        }
    }
    sum.max_live_events = events.max_size();

    // Measurement window: the frame's whole nominal scheduling window
    // [deadline - effective budget, deadline] lies in [warmup, duration].
    for (std::size_t u = 0; u < n; ++u) {
        const UserSpec& spec = specs[u];
        const double budget = effective_budget(spec.p_d, spec.traffic.frame_period_ms(), spec.delay_bound_ms);
        const std::span<FrameRecord> user_frames(report.frames.data() + base[u], base[u + 1] - base[u]);
        for (FrameRecord& r : user_frames) {
            r.met_deadline = r.delivery_ms.has_value() && *r.delivery_ms <= r.display_deadline_ms;
            r.counted = r.display_deadline_ms - budget >= sc.warmup_ms && r.display_deadline_ms <= sc.duration_ms;
        }
        assign_display_mse(user_frames, sc.edge.error_model);
        report.users.push_back(user_kpi(user_frames, static_cast<UserId>(u), report.links[u].sinr_db,
                                        report.links[u].cqi, spec.reliability_target, sc.edge.error_model,
                                        sc.edge.mse_averaging));
    }

    std::vector<FrameRecord> counted;
    for (const FrameRecord& r : report.frames) {
        if (r.counted) {
            counted.push_back(r);
            if (r.met_deadline) ++sum.frames_met;
        }
    }
    sum.frames_counted = counted.size();
    sum.delay_reliable_throughput = delay_reliable_throughput(counted);
    sum.satisfied_users = static_cast<int>(std::count_if(report.users.begin(), report.users.end(),
                                                         [](const UserKpi& k) { return k.satisfied; }));
    if (n > 0) {
        double rel = 0.0;
        double mse = 0.0;
        for (const UserKpi& k : report.users) {
            rel += k.reliability;
            mse += k.mean_mse;
        }
        sum.mean_reliability = rel / static_cast<double>(n);
        sum.mean_mse = mse / static_cast<double>(n);
    }
    report.digest = report_digest(report);
    return report;
}

// ------------------------------------------------------------------ sweep

std::uint64_t sweep_seed(std::uint64_t base_seed, const SweepPoint& p, int run_index) {
    return derive_seed(base_seed, {tag(SeedTag::kSweepPoint), static_cast<std::uint64_t>(p.policy),
                                   static_cast<std::uint64_t>(p.p_d), std::bit_cast<std::uint64_t>(p.delay_bound_ms),
                                   static_cast<std::uint64_t>(p.num_users), static_cast<std::uint64_t>(run_index)});
}

std::vector<SweepPointSummary> summarize(const std::vector<SweepRow>& rows) {
    std::vector<SweepPointSummary> out;
    auto same = [](const SweepPoint& a, const SweepPoint& b) {
        return a.policy == b.policy && a.p_d == b.p_d && a.delay_bound_ms == b.delay_bound_ms &&
               a.num_users == b.num_users;
    };
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        SweepPointSummary s;
        s.point = rows[i].point;
        double sat = 0.0;
        double sat2 = 0.0;
        double thr = 0.0;
        double mse = 0.0;
        int thr_n = 0;
        for (; j < rows.size() && same(rows[j].point, s.point); ++j) {
            ++s.runs;
            if (!rows[j].ok) {
                ++s.failed;
                continue;
            }
            sat += rows[j].satisfied_users;
            sat2 += static_cast<double>(rows[j].satisfied_users) * rows[j].satisfied_users;
            mse += rows[j].mean_mse;
            if (rows[j].delay_reliable_throughput) {
                thr += *rows[j].delay_reliable_throughput;
                ++thr_n;
            }
        }
        const int ok = s.runs - s.failed;
        if (ok > 0) {
            s.mean_satisfied = sat / ok;
            s.mean_mse = mse / ok;
            s.std_satisfied = ok > 1 ? std::sqrt(std::max(0.0, (sat2 - sat * sat / ok) / (ok - 1))) : 0.0;
        }
        s.mean_throughput = thr_n > 0 ? thr / thr_n : 0.0;
        out.push_back(s);
        i = j;
    }
    return out;
}

SweepResult sweep(const Scenario& sc, int jobs) {
    auto sorted = [](auto v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const std::vector<Policy> policies = sorted(sc.sweep.policies.empty() ? std::vector<Policy>{sc.scheduler.policy}
                                                                          : sc.sweep.policies);
    const std::vector<int> pds = sorted(sc.sweep.p_d.empty() ? std::vector<int>{sc.edge.p_d} : sc.sweep.p_d);
    const std::vector<double> bounds = sorted(sc.sweep.delay_bounds_ms.empty()
                                                  ? std::vector<double>{sc.edge.delay_bound_ms}
                                                  : sc.sweep.delay_bounds_ms);
    const int default_users = sc.users.empty() ? sc.num_users : static_cast<int>(sc.users.size());
    const std::vector<int> users = sorted(sc.sweep.users.empty() ? std::vector<int>{default_users} : sc.sweep.users);

    SweepResult result;
    for (Policy pol : policies)
        for (int pd : pds)
            for (double dub : bounds)
                for (int nu : users)
                    for (int r = 0; r < sc.runs_per_point; ++r) {
                        SweepRow row;
                        row.point = {pol, pd, dub, nu};
                        row.run_index = r;
                        row.seed = sweep_seed(sc.seed, row.point, r);
                        row.frame_rate_fps = sc.traffic.frame_rate_fps;
                        row.data_rate_bps = sc.traffic.data_rate_bps;
                        result.rows.push_back(std::move(row));
                    }

    auto execute = [&sc](SweepRow& row) {
        Scenario s = sc;
        s.sweep = {};
        s.seed = row.seed;
        s.scheduler.policy = row.point.policy;
        s.edge.p_d = row.point.p_d;
        s.edge.delay_bound_ms = row.point.delay_bound_ms;
        if (s.users.empty()) s.num_users = row.point.num_users;
        try {
            SimReport rep = run(s);
            row.satisfied_users = rep.summary.satisfied_users;
            row.delay_reliable_throughput = rep.summary.delay_reliable_throughput;
            row.mean_reliability = rep.summary.mean_reliability;
            row.mean_mse = rep.summary.mean_mse;
            row.frames_counted = rep.summary.frames_counted;
            row.users = std::move(rep.users);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };

    const int workers = std::max(1, jobs);
    if (workers == 1) {
        for (SweepRow& row : result.rows) execute(row);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < result.rows.size(); i = next++) execute(result.rows[i]);
            });
        }
        for (std::thread& t : pool) t.join();
    }
    result.points = summarize(result.rows);
    return result;
}

}  // namespace xrsim
