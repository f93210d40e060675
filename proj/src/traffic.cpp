#include "xrsim/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "xrsim/error.hpp"

namespace xrsim {
namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Below this acceptance mass rejection sampling is replaced by inverse CDF.
constexpr double kMinRejectionMass = 0.05;

}  // namespace

void TrafficProfile::validate() const {
    if (!(frame_rate_fps > 0.0) || !std::isfinite(frame_rate_fps)) {
        throw ConfigError("must be positive", "traffic.frame_rate_fps");
    }
    if (!(data_rate_bps > 0.0) || !std::isfinite(data_rate_bps)) {
        throw ConfigError("must be positive", "traffic.data_rate_bps");
    }
    if (!(size_std_frac >= 0.0 && size_std_frac < 1.0)) {
        throw ConfigError("must lie in [0, 1)", "traffic.size_std_frac");
    }
    if (!(size_trunc_frac > 0.0 && size_trunc_frac <= 1.0)) {
        throw ConfigError("must lie in (0, 1]", "traffic.size_trunc_frac");
    }
    if (!(jitter_std_ms >= 0.0)) {
        throw ConfigError("must be nonnegative", "traffic.jitter_std_ms");
    }
    if (!(jitter_trunc_ms >= 0.0)) {
        throw ConfigError("must be nonnegative", "traffic.jitter_trunc_ms");
    }
}

double sample_truncated_gaussian(double mean, double std, double lo, double hi, Rng& rng) {
    if (lo > hi) {
        throw ConfigError("truncation interval has lo > hi");
    }
    if (std < 0.0) {
        throw ConfigError("standard deviation must be nonnegative");
    }
    if (std == 0.0 || lo == hi) {
        return std::clamp(mean, lo, hi);
    }
    const double a = std_normal_cdf((lo - mean) / std);
    const double b = std_normal_cdf((hi - mean) / std);
    if (b - a >= kMinRejectionMass) {
        for (;;) {
            const double x = mean + std * rng.normal();
            if (x >= lo && x <= hi) {
                return x;
            }
        }
    }
    // Far-tail interval: invert the conditional CDF by bisection.
    const double target = a + rng.uniform() * (b - a);
    double left = lo;
    double right = hi;
    for (int i = 0; i < 200 && right - left > 1e-12 * std::max(1.0, std::abs(right)); ++i) {
        const double mid = 0.5 * (left + right);
        if (std_normal_cdf((mid - mean) / std) < target) {
            left = mid;
        } else {
            right = mid;
        }
    }
    return std::clamp(0.5 * (left + right), lo, hi);
}

std::uint32_t frame_count(const TrafficProfile& profile, double duration_ms) {
    const double frames = duration_ms * profile.frame_rate_fps / 1000.0;
    return static_cast<std::uint32_t>(std::floor(frames + 1e-9));
}

std::vector<XrFrame> generate_stream(const TrafficProfile& profile, UserId user_id,
                                     double duration_ms, std::uint64_t seed,
                                     const StreamOptions& options) {
    profile.validate();
    if (!(duration_ms > 0.0)) {
        throw ConfigError("must be positive", "duration_ms");
    }
    Rng rng(derive_seed(seed, {tag(SeedTag::kTraffic), user_id}));

    const double period = profile.frame_period_ms();
    const double mean_bits = profile.mean_frame_bits();
    const double size_lo = std::ceil(mean_bits * (1.0 - profile.size_trunc_frac));
    const double size_hi = std::floor(mean_bits * (1.0 + profile.size_trunc_frac));
    const double size_std = mean_bits * profile.size_std_frac;
    const double epoch = options.session_start_ms + (options.randomize_epoch ? rng.uniform() * period : 0.0);

    const std::uint32_t count = frame_count(profile, duration_ms);
    std::vector<XrFrame> frames;
    frames.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        XrFrame f;
        f.user_id = user_id;
        f.frame_idx = i;
        f.gen_time_ms = epoch + static_cast<double>(i) * period;
        const double size = sample_truncated_gaussian(mean_bits, size_std, size_lo, size_hi, rng);
        f.size_bits = std::max<std::int64_t>(1, std::llround(std::clamp(size, size_lo, size_hi)));
        double jitter = sample_truncated_gaussian(0.0, profile.jitter_std_ms, -profile.jitter_trunc_ms,
                                                  profile.jitter_trunc_ms, rng);
        if (profile.clamp_negative_jitter) {
            jitter = std::max(jitter, 0.0);
        }
        f.edge_arrival_ms = f.gen_time_ms + jitter;
        f.display_deadline_ms = f.gen_time_ms + options.delay_bound_ms;
        frames.push_back(f);
    }
    return frames;
}

}  // namespace xrsim
