#include "xrsim/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "xrsim/error.hpp"

namespace xrsim {
namespace {

using json = nlohmann::ordered_json;

class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<const char*> header) {
        for (const char* h : header) cell(std::string(h));
        end_row();
        rows_ = 0;
    }
    CsvWriter& cell(const std::string& s) {
        if (!first_) buf_ += ',';
        first_ = false;
        if (s.find_first_of(",\"\r\n") == std::string::npos) {
            buf_ += s;
        } else {
            buf_ += '"';
            for (char c : s) {
                if (c == '"') buf_ += '"';
                buf_ += c;
            }
            buf_ += '"';
        }
        return *this;
    }
    CsvWriter& cell(const char* s) { return cell(std::string(s)); }
    CsvWriter& cell(bool b) { return cell(std::string(b ? "1" : "0")); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::int64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::uint64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::uint32_t v) { return cell(std::to_string(v)); }
    CsvWriter& real(double v) { return cell(format_real(v)); }
    CsvWriter& real(const std::optional<double>& v) { return cell(v ? format_real(*v) : std::string()); }
    CsvWriter& ms(double v) { return cell(format_ms(v)); }
    CsvWriter& ms(const std::optional<double>& v) { return cell(v ? format_ms(*v) : std::string()); }
    void end_row() {
        buf_ += "\r\n";
        first_ = true;
        ++rows_;
    }
    OutputFile finish(std::string name) { return {std::move(name), std::move(buf_), rows_}; }

private:
    std::string buf_;
    bool first_ = true;
    std::size_t rows_ = 0;
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string point_policy(const SweepPoint& p) { return std::string(to_string(p.policy)); }

double to_double(const std::string& s, const std::string& column) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("expected a number, got '" + s + "'", column);
    }
    return v;
}

}  // namespace

std::string format_ms(double ms) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return buf;
}

std::string format_real(double value) {
    if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

OutputFile frames_csv(std::span<const FrameRecord> frames) {
    CsvWriter w({"user_id", "frame_idx", "size_bits", "gen_time_ms", "edge_arrival_ms", "mac_available_ms",
                 "delivery_ms", "display_deadline_ms", "dropped", "met_deadline", "is_predicted", "cold_start",
                 "counted", "effective_horizon", "prediction_mse", "display_horizon", "display_mse"});
    for (const FrameRecord& r : frames) {
        w.cell(r.user_id).cell(r.frame_idx).cell(r.size_bits);
        w.ms(r.gen_time_ms).ms(r.edge_arrival_ms).ms(r.mac_available_ms).ms(r.delivery_ms).ms(r.display_deadline_ms);
        w.cell(r.dropped).cell(r.met_deadline).cell(r.is_predicted).cell(r.cold_start).cell(r.counted);
        w.cell(r.effective_horizon).real(r.prediction_mse).cell(r.display_horizon).real(r.display_mse);
        w.end_row();
    }
    return w.finish("frames.csv");
}

OutputFile users_csv(std::span<const UserKpi> users) {
    CsvWriter w({"user_id", "frames", "met", "reliability", "violation_pct", "satisfied", "mean_mse", "sinr_db",
                 "cqi"});
    for (const UserKpi& k : users) {
        w.cell(k.user_id).cell(k.frames).cell(k.met).real(k.reliability).real(k.violation_pct).cell(k.satisfied);
        w.real(k.mean_mse).real(k.sinr_db).cell(k.cqi);
        w.end_row();
    }
    return w.finish("users.csv");
}

OutputFile links_csv(std::span<const LinkState> links) {
    CsvWriter w({"user_id", "x_m", "y_m", "distance_3d_m", "pathloss_db", "shadowing_db", "sinr_db", "cqi",
                 "bits_per_rb_slot"});
    for (const LinkState& l : links) {
        w.cell(l.user_id).real(l.position.x_m).real(l.position.y_m).real(l.distance_3d_m).real(l.pathloss_db);
        w.real(l.shadowing_db).real(l.sinr_db).cell(l.cqi).cell(l.bits_per_rb_slot);
        w.end_row();
    }
    return w.finish("links.csv");
}

OutputFile summary_json(const SimReport& report) {
    const RunSummary& s = report.summary;
    json j;
    j["num_users"] = s.num_users;
    j["frames_generated"] = s.frames_generated;
    j["frames_counted"] = s.frames_counted;
    j["frames_met"] = s.frames_met;
    j["delay_reliable_throughput"] = opt(s.delay_reliable_throughput);
    j["satisfied_users"] = s.satisfied_users;
    j["mean_reliability"] = s.mean_reliability;
    j["mean_mse"] = s.mean_mse;
    j["overflow_drops"] = s.overflow_drops;
    j["harq_drops"] = s.harq_drops;
    j["placeholders"] = s.placeholders;
    j["slots_processed"] = s.slots_processed;
    j["allocations"] = s.allocations;
    j["transport_blocks"] = s.transport_blocks;
    j["tb_failures"] = s.tb_failures;
    j["max_rbs_used"] = s.max_rbs_used;
    j["max_live_events"] = s.max_live_events;
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(report.digest));
    j["digest"] = digest;
    return {"summary.json", j.dump(2) + "\n", 1};
}

OutputFile sweep_csv(const SweepResult& result) {
    CsvWriter w({"policy", "frame_rate_fps", "data_rate_bps", "delay_bound_ms", "p_d", "num_users", "run",
                 "seed", "ok", "satisfied_users", "delay_reliable_throughput", "mean_reliability", "mean_mse",
                 "frames_counted", "error"});
    for (const SweepRow& r : result.rows) {
        w.cell(point_policy(r.point)).real(r.frame_rate_fps).real(r.data_rate_bps).ms(r.point.delay_bound_ms);
        w.cell(r.point.p_d).cell(r.point.num_users).cell(r.run_index).cell(r.seed).cell(r.ok);
        w.cell(r.satisfied_users).real(r.delay_reliable_throughput).real(r.mean_reliability).real(r.mean_mse);
        w.cell(r.frames_counted).cell(r.error);
        w.end_row();
    }
    return w.finish("sweep.csv");
}

OutputFile sweep_points_csv(const SweepResult& result) {
    CsvWriter w({"policy", "delay_bound_ms", "p_d", "num_users", "runs", "failed", "mean_satisfied",
                 "std_satisfied", "mean_throughput", "mean_mse"});
    for (const SweepPointSummary& p : result.points) {
        w.cell(point_policy(p.point)).ms(p.point.delay_bound_ms).cell(p.point.p_d).cell(p.point.num_users);
        w.cell(p.runs).cell(p.failed).real(p.mean_satisfied).real(p.std_satisfied).real(p.mean_throughput);
        w.real(p.mean_mse);
        w.end_row();
    }
    return w.finish("sweep_points.csv");
}

OutputFile sweep_users_csv(const SweepResult& result) {
    CsvWriter w({"policy", "delay_bound_ms", "p_d", "num_users", "run", "user_id", "sinr_db", "cqi", "frames",
                 "met", "reliability", "violation_pct", "satisfied", "mean_mse"});
    for (const SweepRow& r : result.rows) {
        for (const UserKpi& k : r.users) {
            w.cell(point_policy(r.point)).ms(r.point.delay_bound_ms).cell(r.point.p_d).cell(r.point.num_users);
            w.cell(r.run_index).cell(k.user_id).real(k.sinr_db).cell(k.cqi).cell(k.frames).cell(k.met);
            w.real(k.reliability).real(k.violation_pct).cell(k.satisfied).real(k.mean_mse);
            w.end_row();
        }
    }
    return w.finish("sweep_users.csv");
}

OutputFile violation_surface_csv(const SweepResult& result, double bin_width_db) {
    using Key = std::tuple<Policy, double, double, double, int>;
    std::map<Key, std::vector<SurfaceSample>> groups;
    for (const SweepRow& r : result.rows) {
        if (!r.ok) continue;
        auto& samples = groups[{r.point.policy, r.frame_rate_fps, r.data_rate_bps, r.point.delay_bound_ms,
                                r.point.p_d}];
        for (const UserKpi& k : r.users) {
            samples.push_back({k.sinr_db, r.point.num_users - 1, k.violation_pct});
        }
    }
    CsvWriter w({"policy", "frame_rate_fps", "data_rate_bps", "delay_bound_ms", "p_d", "sinr_bin", "sinr_lo_db",
                 "other_users", "mean_violation_pct", "samples"});
    for (const auto& [key, samples] : groups) {
        for (const SurfaceCell& c : violation_surface(samples, bin_width_db)) {
            w.cell(std::string(to_string(std::get<0>(key)))).real(std::get<1>(key)).real(std::get<2>(key));
            w.ms(std::get<3>(key)).cell(std::get<4>(key));
            w.cell(c.sinr_bin).real(c.sinr_lo_db).cell(c.other_users).real(c.mean_violation_pct).cell(c.samples);
            w.end_row();
        }
    }
    return w.finish("violation_surface.csv");
}

OutputFile manifest_json(const ManifestInfo& info, std::span<const OutputFile> files) {
    json j;
    j["tool"] = "xrsim";
    j["version"] = XRSIM_VERSION;
    j["command"] = info.command;
    j["base_seed"] = info.base_seed;
    j["overrides"] = info.overrides;
    if (!info.run_seeds.empty()) j["run_seeds"] = info.run_seeds;
    j["scenario_yaml"] = info.scenario_yaml;
    json list = json::array();
    for (const OutputFile& f : files) list.push_back({{"name", f.name}, {"rows", f.rows}});
    j["files"] = list;
    return {"manifest.json", j.dump(2) + "\n", 1};
}

void write_bundle(const std::filesystem::path& dir, const OutputFile& manifest, std::span<const OutputFile> files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    auto write = [&](const OutputFile& f) {
        const auto path = dir / f.name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << f.content;
        out.close();
        if (!out) throw IoError("cannot write " + path.string());
    };
    write(manifest);
    for (const OutputFile& f : files) write(f);
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ConfigError("missing column", name);
}

CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            field.clear();
            record.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw ConfigError("unterminated quoted field", "csv");
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    CsvTable t;
    if (records.empty()) throw ConfigError("no header row", "csv");
    t.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != t.header.size()) {
            throw ConfigError("row " + std::to_string(i) + " has " + std::to_string(records[i].size()) +
                                  " fields, header has " + std::to_string(t.header.size()),
                              "csv");
        }
        t.rows.push_back(std::move(records[i]));
    }
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

OutputFile crossover_json(const CsvTable& t, std::span<const double> thresholds) {
    const std::size_t c_policy = t.column("policy");
    const std::size_t c_fps = t.column("frame_rate_fps");
    const std::size_t c_rate = t.column("data_rate_bps");
    const std::size_t c_dub = t.column("delay_bound_ms");
    const std::size_t c_pd = t.column("p_d");
    const std::size_t c_users = t.column("num_users");
    const std::size_t c_ok = t.column("ok");
    const std::size_t c_mse = t.column("mean_mse");

    using Key = std::tuple<std::string, double, double, double>;
    std::map<Key, std::vector<MseSample>> groups;
    for (const auto& row : t.rows) {
        if (row[c_ok] != "1") continue;
        const Key key{row[c_policy], to_double(row[c_fps], "frame_rate_fps"),
                      to_double(row[c_rate], "data_rate_bps"), to_double(row[c_dub], "delay_bound_ms")};
        groups[key].push_back({static_cast<int>(to_double(row[c_pd], "p_d")),
                               static_cast<int>(to_double(row[c_users], "num_users")),
                               to_double(row[c_mse], "mean_mse")});
    }

    json out;
    out["thresholds"] = std::vector<double>(thresholds.begin(), thresholds.end());
    json list = json::array();
    for (const auto& [key, samples] : groups) {
        const MseCurves curves = mse_curve(samples);
        const CrossoverReport rep = find_crossovers(curves, thresholds);
        json g;
        g["policy"] = std::get<0>(key);
        g["frame_rate_fps"] = std::get<1>(key);
        g["data_rate_bps"] = std::get<2>(key);
        g["delay_bound_ms"] = std::get<3>(key);
        g["users"] = curves.users;
        json cj = json::object();
        for (const auto& [pd, values] : curves.by_pd) {
            json arr = json::array();
            for (const auto& v : values) arr.push_back(opt(v));
            cj[std::to_string(pd)] = arr;
        }
        g["mse_curves"] = cj;
        json gamma = json::array();
        for (const GammaPoint& gp : rep.gamma_points) {
            gamma.push_back({{"pd_low", gp.pd_low}, {"pd_high", gp.pd_high}, {"users", opt(gp.users)}});
        }
        g["gamma_points"] = gamma;
        json cps = json::array();
        for (const CPoint& cp : rep.c_points) {
            cps.push_back({{"mse_threshold", cp.mse_threshold}, {"p_d", cp.p_d}, {"max_users", opt(cp.max_users)}});
        }
        g["c_points"] = cps;
        list.push_back(g);
    }
    out["groups"] = list;
    return {"crossover.json", out.dump(2) + "\n", 1};
}

}  // namespace xrsim
