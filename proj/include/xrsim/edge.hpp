#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "xrsim/traffic.hpp"

namespace xrsim {

enum class MseGrowth { kLinear, kPower };

/// Parametric stand-in for the frame predictor's error: the MSE of content
/// extrapolated `h` frames past the last original input.
struct ErrorModel {
    double eps1 = 0.018;  // one frame ahead from fully original inputs
    MseGrowth growth = MseGrowth::kLinear;
    double exponent = 1.0;

    /// eps1 * h (linear) or eps1 * h^exponent (power); 0 for h <= 0.
    double mse(int horizon) const;
    void validate() const;
};

/// Scheduling slack from content availability to display deadline:
/// p_d * T_f + D_UB.
double effective_budget(int p_d, double frame_period_ms, double delay_bound_ms);

struct PredictionRecord {
    std::uint32_t target_idx = 0;
    int effective_horizon = 0;
    double mse = 0.0;
    bool placeholder = false;  // predictor-buffer stand-in for a late original
};

struct EdgeUserConfig {
    int p_d = 0;
    double frame_period_ms = 1000.0 / 60.0;
    double delay_bound_ms = 2.5;
    double playout_delay_ms = 0.0;
};

enum class EdgeEventKind { kArrival, kRelease, kDeadline };

struct EdgeEvent {
    EdgeEventKind kind = EdgeEventKind::kArrival;
    std::uint32_t frame_idx = 0;
};

struct EdgeOutput {
    std::vector<XrFrame> to_mac;
    std::vector<PredictionRecord> predictions;
    std::optional<double> release_at_ms;  // set when an arrival waits in the play-off buffer
};

/// Per-user edge pipeline.
///
/// p_d = 0 forwards originals on arrival. For p_d >= 1, originals pass the
/// play-off buffer and enter the predictor buffer; each one (or the deadline
/// placeholder standing in for it) triggers a prediction of frame i + p_d,
/// which is what goes to the MAC. The first p_d frames of the session are
/// sent as originals since nothing can predict them.
class EdgeUser {
public:
    /// `truth` is the user's full generated stream, indexed by frame_idx.
    EdgeUser(EdgeUserConfig config, ErrorModel model, std::span<const XrFrame> truth);

    EdgeOutput on_event(const EdgeEvent& event, double now_ms);

    /// Time the original becomes visible to the predictor:
    /// max(arrival, gen_time + playout_delay).
    double playoff_release(const XrFrame& frame) const;

    /// Absolute time at which a missing frame i is replaced by a placeholder.
    double deadline_ms(std::uint32_t frame_idx) const;

    /// Predicts `target_idx` from the predictor buffer. Size and timing are the
    /// true frame's; horizon = p_d + trailing placeholders in the buffer.
    std::pair<XrFrame, PredictionRecord> predict_frame(std::uint32_t target_idx) const;

    double t_pred_ms() const { return config_.p_d * config_.frame_period_ms; }
    const EdgeUserConfig& config() const { return config_; }
    /// nullopt when frame_idx has no entry.
    std::optional<bool> buffered_is_predicted(std::uint32_t frame_idx) const;

private:
    EdgeOutput on_arrival(std::uint32_t idx, double now_ms);
    EdgeOutput on_release(std::uint32_t idx, double now_ms);
    EdgeOutput on_deadline(std::uint32_t idx, double now_ms);
    void store(std::uint32_t idx, bool predicted);
    int trailing_placeholders(std::uint32_t from_idx) const;
    void emit_prediction(std::uint32_t trigger_idx, EdgeOutput& out);
    XrFrame original(std::uint32_t idx) const;

    EdgeUserConfig config_;
    ErrorModel model_;
    std::span<const XrFrame> truth_;
    std::map<std::uint32_t, bool> predictor_buffer_;  // frame_idx -> is_predicted
    std::vector<bool> arrived_;
    std::vector<bool> emitted_;
    double last_event_ms_ = -1e300;
};

}  // namespace xrsim
