#pragma once

#include <cstdint>
#include <vector>

#include "xrsim/rng.hpp"

namespace xrsim {

using UserId = std::uint32_t;

/// Pseudo-periodic XR source: periodic frames with truncated-Gaussian sizes
/// and truncated-Gaussian arrival jitter.
struct TrafficProfile {
    double frame_rate_fps = 60.0;
    double data_rate_bps = 30e6;
    double size_std_frac = 0.105;   // of the mean frame size
    double size_trunc_frac = 0.5;   // truncation half-width, of the mean
    double jitter_std_ms = 2.0;
    double jitter_trunc_ms = 4.0;
    bool clamp_negative_jitter = true;

    double frame_period_ms() const { return 1000.0 / frame_rate_fps; }
    double mean_frame_bits() const { return data_rate_bps / frame_rate_fps; }

    /// Throws ConfigError naming the bad field.
    void validate() const;
};

/// One application-layer frame. The same type carries original frames and
/// edge predictions (`is_predicted`).
struct XrFrame {
    UserId user_id = 0;
    std::uint32_t frame_idx = 0;
    double gen_time_ms = 0.0;
    double edge_arrival_ms = 0.0;  // gen_time + jitter
    std::int64_t size_bits = 0;
    bool is_predicted = false;
    int effective_horizon = 0;     // frames of extrapolation in the content
    double display_deadline_ms = 0.0;
};

struct StreamOptions {
    double delay_bound_ms = 2.5;
    bool randomize_epoch = true;   // epoch ~ U[0, T_f)
    double session_start_ms = 0.0; // added to the epoch
};

/// Gaussian(mean, std) conditioned on [lo, hi].
///
/// Sampling is by rejection when the interval holds at least 5% of the
/// Gaussian mass and by inverse-CDF bisection otherwise. std == 0 returns
/// clamp(mean, lo, hi) without consuming randomness.
double sample_truncated_gaussian(double mean, double std, double lo, double hi, Rng& rng);

/// Frames i = 0 .. floor(duration * f_r) - 1 with gen_time = epoch + i * T_f,
/// in frame_idx order. Pure function of its arguments.
std::vector<XrFrame> generate_stream(const TrafficProfile& profile, UserId user_id,
                                     double duration_ms, std::uint64_t seed,
                                     const StreamOptions& options = {});

/// floor(duration * f_r), robust against representation error in the product.
std::uint32_t frame_count(const TrafficProfile& profile, double duration_ms);

}  // namespace xrsim
