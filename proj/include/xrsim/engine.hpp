#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xrsim/edge.hpp"
#include "xrsim/metrics.hpp"
#include "xrsim/radio.hpp"
#include "xrsim/sched.hpp"
#include "xrsim/traffic.hpp"

namespace xrsim {

struct EdgeSettings {
    int p_d = 0;
    double delay_bound_ms = 2.5;
    std::optional<double> playout_delay_ms;  // default: traffic.jitter_trunc_ms
    ErrorModel error_model;
    MseAveraging mse_averaging = MseAveraging::kAllFrames;
};

/// Per-user deviations from the scenario-wide cohort settings.
struct UserOverride {
    std::optional<Position> position;
    std::optional<int> p_d;
    std::optional<double> delay_bound_ms;
    std::optional<double> frame_rate_fps;
    std::optional<double> data_rate_bps;
    std::optional<double> reliability_target;
};

struct UserSpec {
    TrafficProfile traffic;
    std::optional<Position> position;  // nullopt: uniform over the area
    int p_d = 0;
    double delay_bound_ms = 2.5;
    double playout_delay_ms = 0.0;
    double reliability_target = 0.99;
};

struct SweepAxes {
    std::vector<int> users;
    std::vector<int> p_d;
    std::vector<Policy> policies;
    std::vector<double> delay_bounds_ms;

    bool empty() const { return users.empty() && p_d.empty() && policies.empty() && delay_bounds_ms.empty(); }
};

struct Scenario {
    std::uint64_t seed = 1;
    double duration_ms = 11000.0;
    double warmup_ms = 1000.0;
    double area_m = 250.0;          // square side; BS at the centre
    double reliability_target = 0.99;
    bool randomize_epochs = true;
    double session_start_ms = 0.0;
    int num_users = 1;
    int runs_per_point = 100;

    RadioConfig radio;
    SchedulerConfig scheduler;
    TrafficProfile traffic;
    EdgeSettings edge;
    std::vector<UserOverride> users;  // when nonempty, replaces num_users
    SweepAxes sweep;

    std::vector<UserSpec> user_specs() const;
};

/// Every invariant violation, each prefixed by its config path. Empty iff runnable.
std::vector<std::string> validate(const Scenario& scenario);

struct RunSummary {
    int num_users = 0;
    std::uint64_t frames_generated = 0;
    std::uint64_t frames_counted = 0;
    std::uint64_t frames_met = 0;
    std::uint64_t overflow_drops = 0;
    std::uint64_t harq_drops = 0;
    std::uint64_t placeholders = 0;
    std::uint64_t slots_processed = 0;
    std::uint64_t allocations = 0;
    std::uint64_t transport_blocks = 0;
    std::uint64_t tb_failures = 0;
    int max_rbs_used = 0;
    std::uint64_t max_live_events = 0;
    std::optional<double> delay_reliable_throughput;
    int satisfied_users = 0;
    double mean_reliability = 0.0;
    double mean_mse = 0.0;  // over users
};

struct SimReport {
    std::vector<FrameRecord> frames;  // user-major, frame_idx order
    std::vector<UserKpi> users;
    std::vector<LinkState> links;
    RunSummary summary;
    std::uint64_t digest = 0;  // over frames, users and summary
};

/// Runs one scenario. Throws ConfigError for an invalid scenario and
/// InternalError if an engine invariant breaks.
SimReport run(const Scenario& scenario);

struct SweepPoint {
    Policy policy = Policy::kPf;
    int p_d = 0;
    double delay_bound_ms = 2.5;
    int num_users = 1;
};

struct SweepRow {
    SweepPoint point;
    int run_index = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    double frame_rate_fps = 0.0;
    double data_rate_bps = 0.0;
    int satisfied_users = 0;
    std::optional<double> delay_reliable_throughput;
    double mean_reliability = 0.0;
    double mean_mse = 0.0;
    std::uint64_t frames_counted = 0;
    std::vector<UserKpi> users;
};

struct SweepPointSummary {
    SweepPoint point;
    int runs = 0;
    int failed = 0;
    double mean_satisfied = 0.0;
    double std_satisfied = 0.0;
    double mean_throughput = 0.0;
    double mean_mse = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // canonical order, independent of axis order
    std::vector<SweepPointSummary> points;
};

/// Seed of one (point, run): a stable hash of the base seed, the point's
/// values and the run index.
std::uint64_t sweep_seed(std::uint64_t base_seed, const SweepPoint& point, int run_index);

/// Cartesian product of the axes (missing axes take the scenario's value),
/// `runs_per_point` runs each. Failing runs are kept as rows with ok = false.
/// `jobs` > 1 runs points on worker threads; results do not depend on it.
SweepResult sweep(const Scenario& scenario, int jobs = 1);

/// Mean-over-runs aggregation of rows, per point.
std::vector<SweepPointSummary> summarize(const std::vector<SweepRow>& rows);

}  // namespace xrsim
