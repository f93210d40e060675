#include "xrsim/edge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xrsim/error.hpp"

namespace xrsim {
namespace {

// Entries older than this are never consulted again.
constexpr std::uint32_t kPredictorHistory = 64;

}  // namespace

double ErrorModel::mse(int horizon) const {
    if (horizon <= 0) return 0.0;
    const double h = static_cast<double>(horizon);
    return growth == MseGrowth::kLinear ? eps1 * h : eps1 * std::pow(h, exponent);
}

void ErrorModel::validate() const {
    if (!(eps1 >= 0.0)) throw ConfigError("must be nonnegative", "edge.error_model.eps1");
    if (!(exponent >= 1.0)) throw ConfigError("must be >= 1", "edge.error_model.exponent");
}

double effective_budget(int p_d, double frame_period_ms, double delay_bound_ms) {
    return p_d * frame_period_ms + delay_bound_ms;
}

EdgeUser::EdgeUser(EdgeUserConfig config, ErrorModel model, std::span<const XrFrame> truth)
    : config_(config),
      model_(model),
      truth_(truth),
      arrived_(truth.size(), false),
      emitted_(truth.size(), false) {
    if (config_.p_d < 0) throw ConfigError("must be nonnegative", "edge.p_d");
    if (config_.playout_delay_ms < 0.0) throw ConfigError("must be nonnegative", "edge.playout_delay_ms");
    model_.validate();
}

double EdgeUser::playoff_release(const XrFrame& frame) const {
    return std::max(frame.edge_arrival_ms, frame.gen_time_ms + config_.playout_delay_ms);
}

double EdgeUser::deadline_ms(std::uint32_t frame_idx) const {
    return truth_[frame_idx].gen_time_ms +
           effective_budget(config_.p_d, config_.frame_period_ms, config_.delay_bound_ms);
}

std::optional<bool> EdgeUser::buffered_is_predicted(std::uint32_t frame_idx) const {
    const auto it = predictor_buffer_.find(frame_idx);
    if (it == predictor_buffer_.end()) return std::nullopt;
    return it->second;
}

EdgeOutput EdgeUser::on_event(const EdgeEvent& event, double now_ms) {
    if (now_ms < last_event_ms_) {
        throw InternalError("edge event for user " + std::to_string(truth_.empty() ? 0 : truth_[0].user_id) +
                            " out of time order");
    }
    if (event.frame_idx >= truth_.size()) {
        throw InternalError("edge event for unknown frame " + std::to_string(event.frame_idx));
    }
    last_event_ms_ = now_ms;
    switch (event.kind) {
        case EdgeEventKind::kArrival: return on_arrival(event.frame_idx, now_ms);
        case EdgeEventKind::kRelease: return on_release(event.frame_idx, now_ms);
        case EdgeEventKind::kDeadline: return on_deadline(event.frame_idx, now_ms);
    }
    return {};
}

XrFrame EdgeUser::original(std::uint32_t idx) const {
    XrFrame f = truth_[idx];
    f.is_predicted = false;
    f.effective_horizon = 0;
    return f;
}

EdgeOutput EdgeUser::on_arrival(std::uint32_t idx, double now_ms) {
    EdgeOutput out;
    arrived_[idx] = true;
    const bool cold_start = idx < static_cast<std::uint32_t>(config_.p_d);
    if ((config_.p_d == 0 || cold_start) && !emitted_[idx]) {
        emitted_[idx] = true;
        out.to_mac.push_back(original(idx));
    }
    if (config_.p_d == 0) {
        return out;
    }
    const double release = playoff_release(truth_[idx]);
    if (release <= now_ms) {
        EdgeOutput released = on_release(idx, now_ms);
        out.to_mac.insert(out.to_mac.end(), released.to_mac.begin(), released.to_mac.end());
        out.predictions = std::move(released.predictions);
    } else {
        out.release_at_ms = release;
    }
    return out;
}

EdgeOutput EdgeUser::on_release(std::uint32_t idx, double now_ms) {
    (void)now_ms;
    EdgeOutput out;
    // An original always supersedes a placeholder.
    store(idx, false);
    emit_prediction(idx, out);
    return out;
}

EdgeOutput EdgeUser::on_deadline(std::uint32_t idx, double now_ms) {
    (void)now_ms;
    EdgeOutput out;
    if (arrived_[idx]) {
        return out;  // on time; the release (if still pending) triggers the prediction
    }
    PredictionRecord placeholder;
    placeholder.target_idx = idx;
    placeholder.effective_horizon = 1 + (idx == 0 ? 0 : trailing_placeholders(idx - 1));
    placeholder.mse = model_.mse(placeholder.effective_horizon);
    placeholder.placeholder = true;
    store(idx, true);
    out.predictions.push_back(placeholder);
    emit_prediction(idx, out);
    return out;
}

void EdgeUser::store(std::uint32_t idx, bool predicted) {
    auto [it, inserted] = predictor_buffer_.try_emplace(idx, predicted);
    if (!inserted && !predicted) {
        it->second = false;
    }
    while (!predictor_buffer_.empty() && predictor_buffer_.rbegin()->first - predictor_buffer_.begin()->first >= kPredictorHistory) {
        predictor_buffer_.erase(predictor_buffer_.begin());
    }
}

int EdgeUser::trailing_placeholders(std::uint32_t from_idx) const {
    int count = 0;
    auto it = predictor_buffer_.upper_bound(from_idx);
    std::uint32_t expect = from_idx;
    while (it != predictor_buffer_.begin()) {
        --it;
        if (it->first != expect || !it->second) break;
        ++count;
        if (expect == 0) break;
        --expect;
    }
    return count;
}

std::pair<XrFrame, PredictionRecord> EdgeUser::predict_frame(std::uint32_t target_idx) const {
    if (target_idx >= truth_.size()) {
        throw InternalError("prediction target beyond the stream");
    }
    const int trailing =
        predictor_buffer_.empty() ? 0 : trailing_placeholders(predictor_buffer_.rbegin()->first);
    PredictionRecord rec;
    rec.target_idx = target_idx;
    rec.effective_horizon = config_.p_d + trailing;
    rec.mse = model_.mse(rec.effective_horizon);

    XrFrame f = truth_[target_idx];
    f.is_predicted = true;
    f.effective_horizon = rec.effective_horizon;
    return {f, rec};
}

void EdgeUser::emit_prediction(std::uint32_t trigger_idx, EdgeOutput& out) {
    const std::uint64_t target = static_cast<std::uint64_t>(trigger_idx) + static_cast<std::uint64_t>(config_.p_d);
    if (target >= truth_.size() || emitted_[target]) {
        return;
    }
    auto [frame, rec] = predict_frame(static_cast<std::uint32_t>(target));
    emitted_[target] = true;
    out.to_mac.push_back(frame);
    out.predictions.push_back(rec);
}

}  // namespace xrsim
