#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xrsim/edge.hpp"
#include "xrsim/traffic.hpp"

namespace xrsim {

/// Outcome of one generated frame.
struct FrameRecord {
    UserId user_id = 0;
    std::uint32_t frame_idx = 0;
    std::int64_t size_bits = 0;
    double gen_time_ms = 0.0;
    double edge_arrival_ms = 0.0;
    std::optional<double> mac_available_ms;  // absent if never handed to the MAC
    std::optional<double> delivery_ms;       // absent if dropped or undelivered
    double display_deadline_ms = 0.0;
    bool dropped = false;                    // queue overflow or HARQ exhaustion
    bool met_deadline = false;
    bool is_predicted = false;
    bool cold_start = false;
    bool counted = false;                    // inside the measurement window
    int effective_horizon = 0;               // of the transmitted content
    double prediction_mse = 0.0;
    int display_horizon = 0;                 // of what the receiver shows
    double display_mse = 0.0;
};

enum class MseAveraging { kAllFrames, kPredictedOnly };

struct UserKpi {
    UserId user_id = 0;
    std::uint64_t frames = 0;                // counted frames
    std::uint64_t met = 0;
    double reliability = 0.0;
    double violation_pct = 0.0;
    bool satisfied = false;
    double mean_mse = 0.0;
    double sinr_db = 0.0;
    int cqi = 0;
};

/// Fraction of frames with met_deadline (dropped frames are misses).
/// nullopt for an empty cohort.
std::optional<double> delay_reliable_throughput(std::span<const FrameRecord> records);

/// Users with reliability >= target (inclusive).
int satisfied_users(std::span<const UserKpi> kpis, double reliability_target);

/// Fills display_horizon / display_mse for one user's frames, in frame_idx
/// order. A frame that meets its deadline shows its own content; a missed
/// frame is concealed by extrapolation, one more frame per consecutive miss:
/// display_horizon = effective_horizon + consecutive misses.
void assign_display_mse(std::span<FrameRecord> user_frames, const ErrorModel& model);

/// KPIs over the counted frames of one user. MSE excludes cold-start frames;
/// kAllFrames averages over every displayed frame (originals count 0),
/// kPredictedOnly over frames with display_horizon > 0.
UserKpi user_kpi(std::span<const FrameRecord> user_frames, UserId user_id, double sinr_db, int cqi,
                 double reliability_target, const ErrorModel& model,
                 MseAveraging averaging = MseAveraging::kAllFrames);

/// One MSE-vs-users curve per p_d on a shared user-count grid. Missing
/// points stay empty; nothing is interpolated.
struct MseCurves {
    std::vector<int> users;
    std::map<int, std::vector<std::optional<double>>> by_pd;
};

/// Input row for mse_curve: one run of one sweep point.
struct MseSample {
    int p_d = 0;
    int num_users = 0;
    double mean_mse = 0.0;  // mean over the run's users
};

/// Mean over runs at each (p_d, users) point.
MseCurves mse_curve(std::span<const MseSample> samples);

struct GammaPoint {
    int pd_low = 0;
    int pd_high = 0;
    std::optional<double> users;
};

struct CPoint {
    double mse_threshold = 0.0;
    int p_d = 0;
    std::optional<double> max_users;
};

struct CrossoverReport {
    std::vector<GammaPoint> gamma_points;  // adjacent p_d pairs, ascending
    std::vector<CPoint> c_points;
};

/// Smallest abscissa where `lower` >= `higher`, by linear interpolation of the
/// difference between adjacent grid points. nullopt with fewer than two points
/// or no crossing.
std::optional<double> crossing_point(std::span<const int> users,
                                     std::span<const std::optional<double>> lower,
                                     std::span<const std::optional<double>> higher);

/// Largest interpolated abscissa with curve <= threshold.
std::optional<double> threshold_point(std::span<const int> users,
                                      std::span<const std::optional<double>> curve, double threshold);

CrossoverReport find_crossovers(const MseCurves& curves, std::span<const double> thresholds);

/// Input row for violation_surface.
struct SurfaceSample {
    double sinr_db = 0.0;
    int other_users = 0;
    double violation_pct = 0.0;
};

struct SurfaceCell {
    int sinr_bin = 0;       // floor(sinr / bin_width)
    double sinr_lo_db = 0.0;
    int other_users = 0;
    double mean_violation_pct = 0.0;
    std::uint64_t samples = 0;
};

/// Mean violation percentage per (SINR bin, other-user count). Only cells
/// with samples are returned.
std::vector<SurfaceCell> violation_surface(std::span<const SurfaceSample> samples,
                                           double bin_width_db = 2.0);

}  // namespace xrsim
