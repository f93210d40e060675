#include "xrsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace xrsim {

std::optional<double> delay_reliable_throughput(std::span<const FrameRecord> records) {
    if (records.empty()) return std::nullopt;
    const auto met = std::count_if(records.begin(), records.end(),
                                   [](const FrameRecord& r) { return r.met_deadline; });
    return static_cast<double>(met) / static_cast<double>(records.size());
}

int satisfied_users(std::span<const UserKpi> kpis, double reliability_target) {
    return static_cast<int>(std::count_if(kpis.begin(), kpis.end(), [&](const UserKpi& k) {
        return k.reliability >= reliability_target;
    }));
}

void assign_display_mse(std::span<FrameRecord> user_frames, const ErrorModel& model) {
    int misses = 0;
    for (FrameRecord& r : user_frames) {
        if (r.met_deadline) {
            misses = 0;
            r.display_horizon = r.effective_horizon;
        } else {
            ++misses;
            r.display_horizon = r.effective_horizon + misses;
        }
        r.display_mse = model.mse(r.display_horizon);
    }
}

UserKpi user_kpi(std::span<const FrameRecord> user_frames, UserId user_id, double sinr_db, int cqi,
                 double reliability_target, const ErrorModel& model, MseAveraging averaging) {
    UserKpi kpi;
    kpi.user_id = user_id;
    kpi.sinr_db = sinr_db;
    kpi.cqi = cqi;

    // Histogram by horizon: the mean is then sum_h (n_h / n) * mse(h), which
    // is exact when a single horizon occurs.
    std::map<int, std::uint64_t> by_horizon;
    std::uint64_t mse_frames = 0;
    for (const FrameRecord& r : user_frames) {
        if (!r.counted) continue;
        ++kpi.frames;
        if (r.met_deadline) ++kpi.met;
        if (r.cold_start) continue;
        if (averaging == MseAveraging::kPredictedOnly && r.display_horizon <= 0) continue;
        ++by_horizon[r.display_horizon];
        ++mse_frames;
    }
    kpi.reliability = kpi.frames == 0 ? 0.0 : static_cast<double>(kpi.met) / static_cast<double>(kpi.frames);
    kpi.violation_pct = 100.0 * (1.0 - kpi.reliability);
    kpi.satisfied = kpi.frames > 0 && kpi.reliability >= reliability_target;
    double mean = 0.0;
    for (const auto& [h, n] : by_horizon) {
        mean += (static_cast<double>(n) / static_cast<double>(mse_frames)) * model.mse(h);
    }
    kpi.mean_mse = mean;
    return kpi;
}

MseCurves mse_curve(std::span<const MseSample> samples) {
    std::set<int> users;
    std::map<std::pair<int, int>, std::pair<double, int>> acc;  // (pd, users) -> (sum, n)
    for (const MseSample& s : samples) {
        users.insert(s.num_users);
        auto& slot = acc[{s.p_d, s.num_users}];
        slot.first += s.mean_mse;
        slot.second += 1;
    }
    MseCurves curves;
    curves.users.assign(users.begin(), users.end());
    for (const auto& [key, sum_n] : acc) {
        auto& curve = curves.by_pd[key.first];
        curve.resize(curves.users.size());
    }
    for (const auto& [key, sum_n] : acc) {
        const auto pos = std::lower_bound(curves.users.begin(), curves.users.end(), key.second) - curves.users.begin();
        curves.by_pd[key.first][static_cast<std::size_t>(pos)] = sum_n.first / sum_n.second;
    }
    return curves;
}

std::optional<double> crossing_point(std::span<const int> users,
                                     std::span<const std::optional<double>> lower,
                                     std::span<const std::optional<double>> higher) {
    const std::size_t n = std::min({users.size(), lower.size(), higher.size()});
    if (n < 2) return std::nullopt;
    std::optional<double> prev_diff;
    for (std::size_t i = 0; i < n; ++i) {
        if (!lower[i] || !higher[i]) {
            prev_diff.reset();
            continue;
        }
        const double diff = *lower[i] - *higher[i];
        if (diff >= 0.0) {
            if (!prev_diff) return static_cast<double>(users[i]);
            const double frac = -*prev_diff / (diff - *prev_diff);
            return users[i - 1] + frac * (users[i] - users[i - 1]);
        }
        prev_diff = diff;
    }
    return std::nullopt;
}

std::optional<double> threshold_point(std::span<const int> users,
                                      std::span<const std::optional<double>> curve, double threshold) {
    const std::size_t n = std::min(users.size(), curve.size());
    if (n < 2) return std::nullopt;
    for (std::size_t k = n; k-- > 0;) {
        if (!curve[k]) continue;
        if (*curve[k] <= threshold) {
            // Rightmost sample at or below the threshold; if the next sample
            // rises above it, the boundary lies between them.
            if (k + 1 < n && curve[k + 1] && *curve[k + 1] > threshold) {
                const double frac = (threshold - *curve[k]) / (*curve[k + 1] - *curve[k]);
                return users[k] + frac * (users[k + 1] - users[k]);
            }
            return static_cast<double>(users[k]);
        }
    }
    return std::nullopt;
}

CrossoverReport find_crossovers(const MseCurves& curves, std::span<const double> thresholds) {
    CrossoverReport report;
    std::vector<int> pds;
    for (const auto& [pd, curve] : curves.by_pd) pds.push_back(pd);
    for (std::size_t i = 0; i + 1 < pds.size(); ++i) {
        GammaPoint g;
        g.pd_low = pds[i];
        g.pd_high = pds[i + 1];
        g.users = crossing_point(curves.users, curves.by_pd.at(pds[i]), curves.by_pd.at(pds[i + 1]));
        report.gamma_points.push_back(g);
    }
    for (double m : thresholds) {
        for (int pd : pds) {
            report.c_points.push_back({m, pd, threshold_point(curves.users, curves.by_pd.at(pd), m)});
        }
    }
    return report;
}

std::vector<SurfaceCell> violation_surface(std::span<const SurfaceSample> samples, double bin_width_db) {
    std::map<std::pair<int, int>, std::pair<double, std::uint64_t>> acc;
    for (const SurfaceSample& s : samples) {
        const int bin = static_cast<int>(std::floor(s.sinr_db / bin_width_db));
        auto& cell = acc[{bin, s.other_users}];
        cell.first += s.violation_pct;
        cell.second += 1;
    }
    std::vector<SurfaceCell> cells;
    cells.reserve(acc.size());
    for (const auto& [key, sum_n] : acc) {
        cells.push_back({key.first, key.first * bin_width_db, key.second,
                         sum_n.first / static_cast<double>(sum_n.second), sum_n.second});
    }
    return cells;
}

}  // namespace xrsim
