#pragma once

#include <array>
#include <cstdint>

#include "xrsim/rng.hpp"
#include "xrsim/traffic.hpp"

namespace xrsim {

/// Single-cell downlink parameters. Defaults are the evaluation setup:
/// 2.4 GHz UMa, 100 MHz, numerology 2 (60 kHz, 0.25 ms slots), 135 RBs,
/// 44 dBm BS, 25 m / 1.5 m antenna heights, UE NF 7 dB, 1% BLER target.
struct RadioConfig {
    double carrier_ghz = 2.4;
    double bandwidth_mhz = 100.0;
    int numerology_index = 2;
    int num_rbs = 135;
    double bs_power_dbm = 44.0;
    double bs_height_m = 25.0;
    double ue_height_m = 1.5;
    double ue_noise_figure_db = 7.0;
    double target_bler = 0.01;
    double shadowing_std_db = 6.0;
    double overhead_frac = 0.25;
    int num_layers = 2;  // spatial layers per TB

    double subcarrier_spacing_hz() const { return 15e3 * static_cast<double>(1 << numerology_index); }
    double slot_ms() const { return 1.0 / static_cast<double>(1 << numerology_index); }

    /// Throws ConfigError naming the bad field.
    void validate() const;
};

struct Position {
    double x_m = 0.0;
    double y_m = 0.0;
};

/// Static per-user link. Fixed for a whole run.
struct LinkState {
    UserId user_id = 0;
    Position position;
    double distance_3d_m = 0.0;
    double pathloss_db = 0.0;
    double shadowing_db = 0.0;
    double sinr_db = 0.0;
    int cqi = 0;
    std::int64_t bits_per_rb_slot = 0;
};

struct CqiRate {
    int cqi = 0;
    std::int64_t bits_per_rb_slot = 0;
};

// 15-entry link-adaptation tables, index = CQI - 1. Efficiencies are the
// 64QAM CQI table of TS 38.214 (Table 5.2.2.1-2); thresholds are the SINR at
// which each entry reaches the BLER target, about 2 dB apart from -6.7 dB.
inline constexpr std::array<double, 15> kCqiSinrThresholdDb = {
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7};
inline constexpr std::array<double, 15> kCqiEfficiency = {
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
    2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};

inline constexpr int kSubcarriersPerRb = 12;
inline constexpr int kSymbolsPerSlot = 14;
inline constexpr double kMinPathlossDistanceM = 10.0;

/// 3GPP TR 38.901 UMa NLOS pathloss in dB:
///
///   PL'_NLOS = 13.54 + 39.08 log10(d3D) + 20 log10(fc) - 0.6 (h_UT - 1.5)
///   PL_NLOS  = max(PL_LOS, PL'_NLOS)
///
/// with PL_LOS the two-slope UMa LOS model (breakpoint d'_BP = 4 h'_BS h'_UT fc / c,
/// effective environment height 1 m). fc in GHz, distances in metres.
/// Distances below 10 m are clamped to 10 m; nonpositive distance throws.
double pathloss_uma_nlos(double distance_3d_m, double carrier_ghz, double ue_height_m,
                         double bs_height_m = 25.0);

/// Thermal noise in one RB: -174 + NF + 10 log10(12 * scs).
double noise_dbm_per_rb(const RadioConfig& cfg);

/// Link state for a UE at `position` served from `bs_position`. Shadowing is
/// log-normal with shadowing_std_db, drawn from (seed, user_id). No interference.
LinkState sinr_for_user(const RadioConfig& cfg, UserId user_id, Position position,
                        Position bs_position, std::uint64_t seed);

/// Highest CQI whose threshold is <= sinr_db (0 when below the table), and
/// floor(eff * 12 * 14 * (1 - overhead) * layers) bits per RB per slot.
CqiRate cqi_and_rate(double sinr_db, const RadioConfig& cfg);

/// One transport-block outcome: false with probability target_bler.
bool tb_success(Rng& rng, const RadioConfig& cfg);

/// Same draw from a precomputed key; no generator state.
bool tb_success(std::uint64_t key, const RadioConfig& cfg);

}  // namespace xrsim
