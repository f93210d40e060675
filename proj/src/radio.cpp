#include "xrsim/radio.hpp"

#include <algorithm>
#include <cmath>

#include "xrsim/error.hpp"

namespace xrsim {
namespace {

constexpr double kSpeedOfLight = 3.0e8;

double uma_los(double d2d, double d3d, double fc_ghz, double h_bs, double h_ut) {
    const double breakpoint = 4.0 * (h_bs - 1.0) * (h_ut - 1.0) * fc_ghz * 1e9 / kSpeedOfLight;
    const double pl1 = 28.0 + 22.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz);
    if (d2d <= breakpoint || breakpoint <= 0.0) {
        return pl1;
    }
    return 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(fc_ghz) -
           9.0 * std::log10(breakpoint * breakpoint + (h_bs - h_ut) * (h_bs - h_ut));
}

}  // namespace

void RadioConfig::validate() const {
    if (!(carrier_ghz > 0.0)) throw ConfigError("must be positive", "radio.carrier_ghz");
    if (!(bandwidth_mhz > 0.0)) throw ConfigError("must be positive", "radio.bandwidth_mhz");
    if (numerology_index < 0 || numerology_index > 6) {
        throw ConfigError("must lie in 0..6", "radio.numerology_index");
    }
    if (num_rbs <= 0) throw ConfigError("must be positive", "radio.num_rbs");
    if (static_cast<double>(num_rbs) * kSubcarriersPerRb * subcarrier_spacing_hz() > bandwidth_mhz * 1e6) {
        throw ConfigError("num_rbs * 12 * scs exceeds the bandwidth", "radio.num_rbs");
    }
    if (!(ue_height_m > 0.0)) throw ConfigError("must be positive", "radio.ue_height_m");
    if (!(bs_height_m > ue_height_m)) throw ConfigError("must exceed ue_height_m", "radio.bs_height_m");
    if (!(target_bler >= 0.0 && target_bler <= 1.0)) {
        throw ConfigError("must lie in [0, 1]", "radio.target_bler");
    }
    if (!(shadowing_std_db >= 0.0)) throw ConfigError("must be nonnegative", "radio.shadowing_std_db");
    if (!(overhead_frac >= 0.0 && overhead_frac < 1.0)) {
        throw ConfigError("must lie in [0, 1)", "radio.overhead_frac");
    }
    if (num_layers < 1) throw ConfigError("must be at least 1", "radio.num_layers");
}

double pathloss_uma_nlos(double distance_3d_m, double carrier_ghz, double ue_height_m,
                         double bs_height_m) {
    if (!(distance_3d_m > 0.0)) {
        throw ConfigError("distance must be positive");
    }
    const double d3d = std::max(distance_3d_m, kMinPathlossDistanceM);
    const double dh = bs_height_m - ue_height_m;
    const double d2d = std::sqrt(std::max(0.0, d3d * d3d - dh * dh));
    const double nlos = 13.54 + 39.08 * std::log10(d3d) + 20.0 * std::log10(carrier_ghz) -
                        0.6 * (ue_height_m - 1.5);
    return std::max(uma_los(d2d, d3d, carrier_ghz, bs_height_m, ue_height_m), nlos);
}

double noise_dbm_per_rb(const RadioConfig& cfg) {
    return -174.0 + cfg.ue_noise_figure_db +
           10.0 * std::log10(kSubcarriersPerRb * cfg.subcarrier_spacing_hz());
}

LinkState sinr_for_user(const RadioConfig& cfg, UserId user_id, Position position,
                        Position bs_position, std::uint64_t seed) {
    LinkState link;
    link.user_id = user_id;
    link.position = position;
    const double dx = position.x_m - bs_position.x_m;
    const double dy = position.y_m - bs_position.y_m;
    const double dh = cfg.bs_height_m - cfg.ue_height_m;
    link.distance_3d_m = std::sqrt(dx * dx + dy * dy + dh * dh);
    link.pathloss_db = pathloss_uma_nlos(link.distance_3d_m, cfg.carrier_ghz, cfg.ue_height_m, cfg.bs_height_m);
    if (cfg.shadowing_std_db > 0.0) {
        Rng rng(derive_seed(seed, {tag(SeedTag::kShadowing), user_id}));
        link.shadowing_db = cfg.shadowing_std_db * rng.normal();
    }
    const double tx_per_rb_dbm = cfg.bs_power_dbm - 10.0 * std::log10(static_cast<double>(cfg.num_rbs));
    link.sinr_db = tx_per_rb_dbm - link.pathloss_db - link.shadowing_db - noise_dbm_per_rb(cfg);
    const CqiRate rate = cqi_and_rate(link.sinr_db, cfg);
    link.cqi = rate.cqi;
    link.bits_per_rb_slot = rate.bits_per_rb_slot;
    return link;
}

CqiRate cqi_and_rate(double sinr_db, const RadioConfig& cfg) {
    const auto it = std::upper_bound(kCqiSinrThresholdDb.begin(), kCqiSinrThresholdDb.end(), sinr_db);
    const int cqi = static_cast<int>(it - kCqiSinrThresholdDb.begin());
    if (cqi == 0) {
        return {};
    }
    const double bits = kCqiEfficiency[cqi - 1] * kSubcarriersPerRb * kSymbolsPerSlot *
                        (1.0 - cfg.overhead_frac) * cfg.num_layers;
    return {cqi, static_cast<std::int64_t>(std::floor(bits))};
}

bool tb_success(Rng& rng, const RadioConfig& cfg) {
    return rng.uniform() >= cfg.target_bler;
}

bool tb_success(std::uint64_t key, const RadioConfig& cfg) {
    const double u = static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
    return u >= cfg.target_bler;
}

}  // namespace xrsim
