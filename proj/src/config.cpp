#include "xrsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "xrsim/error.hpp"

namespace xrsim {
namespace {

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
}

template <typename T>
T convert(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) throw ConfigError(std::string("expected ") + type_name<T>(), path);
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("expected " + std::string(type_name<T>()) + ", got '" + node.Scalar() + "'", path);
    }
}

// Reads one mapping. Every key must be consumed before finish().
class MapReader {
public:
    MapReader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            throw ConfigError("expected a mapping", path_.empty() ? "<root>" : path_);
        }
    }

    YAML::Node child(const char* key) {
        seen_.insert(key);
        if (!node_ || node_.IsNull()) return YAML::Node();
        return node_[key];
    }
    std::string path(const char* key) const { return join(path_, key); }

    template <typename T>
    void get(const char* key, T& out) {
        const YAML::Node n = child(key);
        if (n && !n.IsNull()) out = convert<T>(n, path(key));
    }
    template <typename T>
    void get(const char* key, std::optional<T>& out) {
        const YAML::Node n = child(key);
        if (n && !n.IsNull()) out = convert<T>(n, path(key));
    }

    void finish() const {
        if (!node_ || node_.IsNull()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError("unknown key", join(path_, key));
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename T, typename Parse>
std::vector<T> read_list(const YAML::Node& n, const std::string& path, Parse parse_text) {
    if (!n || n.IsNull()) return {};
    if (n.IsScalar()) return parse_text(n.Scalar(), path);
    if (!n.IsSequence()) throw ConfigError("expected a list", path);
    std::vector<T> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        out.push_back(convert<T>(n[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Position read_position(const YAML::Node& n, const std::string& path) {
    if (n.IsSequence() && n.size() == 2) {
        return {convert<double>(n[0], path + "[0]"), convert<double>(n[1], path + "[1]")};
    }
    MapReader r(n, path);
    Position p;
    r.get("x_m", p.x_m);
    r.get("y_m", p.y_m);
    r.finish();
    return p;
}

void read_radio(MapReader& r, RadioConfig& c) {
    r.get("carrier_ghz", c.carrier_ghz);
    r.get("bandwidth_mhz", c.bandwidth_mhz);
    r.get("numerology_index", c.numerology_index);
    r.get("num_rbs", c.num_rbs);
    r.get("bs_power_dbm", c.bs_power_dbm);
    r.get("bs_height_m", c.bs_height_m);
    r.get("ue_height_m", c.ue_height_m);
    r.get("ue_noise_figure_db", c.ue_noise_figure_db);
    r.get("target_bler", c.target_bler);
    r.get("shadowing_std_db", c.shadowing_std_db);
    r.get("overhead_frac", c.overhead_frac);
    r.get("num_layers", c.num_layers);
}

void read_scheduler(MapReader& r, SchedulerConfig& c) {
    std::optional<std::string> policy;
    r.get("policy", policy);
    if (policy) c.policy = parse_policy(*policy);
    r.get("pf_beta", c.pf_beta);
    r.get("drr_quantum_bits", c.drr_quantum_bits);
    r.get("harq_rtt_slots", c.harq_rtt_slots);
    r.get("max_harq_attempts", c.max_harq_attempts);
    r.get("queue_capacity_frames", c.queue_capacity_frames);
}

void read_traffic(MapReader& r, TrafficProfile& t) {
    r.get("frame_rate_fps", t.frame_rate_fps);
    r.get("data_rate_bps", t.data_rate_bps);
    r.get("size_std_frac", t.size_std_frac);
    r.get("size_trunc_frac", t.size_trunc_frac);
    r.get("jitter_std_ms", t.jitter_std_ms);
    r.get("jitter_trunc_ms", t.jitter_trunc_ms);
    r.get("clamp_negative_jitter", t.clamp_negative_jitter);
}

MseGrowth parse_growth(const std::string& s, const std::string& path) {
    if (s == "linear") return MseGrowth::kLinear;
    if (s == "power") return MseGrowth::kPower;
    throw ConfigError("expected linear or power, got '" + s + "'", path);
}

MseAveraging parse_averaging(const std::string& s, const std::string& path) {
    if (s == "all_frames") return MseAveraging::kAllFrames;
    if (s == "predicted_only") return MseAveraging::kPredictedOnly;
    throw ConfigError("expected all_frames or predicted_only, got '" + s + "'", path);
}

void read_edge(MapReader& r, EdgeSettings& e) {
    r.get("p_d", e.p_d);
    r.get("delay_bound_ms", e.delay_bound_ms);
    r.get("playout_delay_ms", e.playout_delay_ms);
    std::optional<std::string> averaging;
    r.get("mse_averaging", averaging);
    if (averaging) e.mse_averaging = parse_averaging(*averaging, r.path("mse_averaging"));
    MapReader m(r.child("error_model"), r.path("error_model"));
    m.get("eps1", e.error_model.eps1);
    std::optional<std::string> growth;
    m.get("growth", growth);
    if (growth) e.error_model.growth = parse_growth(*growth, m.path("growth"));
    m.get("exponent", e.error_model.exponent);
    m.finish();
}

void read_sweep(MapReader& r, SweepAxes& s) {
    s.users = read_list<int>(r.child("users"), r.path("users"),
                             [](const std::string& t, const std::string& p) { return parse_int_list(t, p); });
    s.p_d = read_list<int>(r.child("p_d"), r.path("p_d"),
                           [](const std::string& t, const std::string& p) { return parse_int_list(t, p); });
    s.delay_bounds_ms =
        read_list<double>(r.child("delay_bounds_ms"), r.path("delay_bounds_ms"),
                          [](const std::string& t, const std::string& p) { return parse_double_list(t, p); });
    const auto names = read_list<std::string>(r.child("policies"), r.path("policies"),
                                              [](const std::string& t, const std::string&) {
                                                  std::vector<std::string> out;
                                                  std::stringstream ss(t);
                                                  for (std::string item; std::getline(ss, item, ',');) {
                                                      out.push_back(trim(item));
                                                  }
                                                  return out;
                                              });
    s.policies.clear();
    for (const std::string& n : names) s.policies.push_back(parse_policy(n));
}

UserOverride read_user(const YAML::Node& n, const std::string& path) {
    MapReader r(n, path);
    UserOverride u;
    const YAML::Node pos = r.child("position");
    if (pos && !pos.IsNull()) u.position = read_position(pos, r.path("position"));
    r.get("p_d", u.p_d);
    r.get("delay_bound_ms", u.delay_bound_ms);
    r.get("frame_rate_fps", u.frame_rate_fps);
    r.get("data_rate_bps", u.data_rate_bps);
    r.get("reliability_target", u.reliability_target);
    r.finish();
    return u;
}

Scenario read_scenario(const YAML::Node& root) {
    Scenario sc;
    MapReader r(root, "");
    r.get("seed", sc.seed);
    r.get("duration_ms", sc.duration_ms);
    r.get("warmup_ms", sc.warmup_ms);
    r.get("area_m", sc.area_m);
    r.get("reliability_target", sc.reliability_target);
    r.get("randomize_epochs", sc.randomize_epochs);
    r.get("session_start_ms", sc.session_start_ms);
    r.get("num_users", sc.num_users);
    r.get("runs_per_point", sc.runs_per_point);

    auto section = [&](const char* key, auto&& fn) {
        MapReader m(r.child(key), r.path(key));
        fn(m);
        m.finish();
    };
    section("radio", [&](MapReader& m) { read_radio(m, sc.radio); });
    section("scheduler", [&](MapReader& m) { read_scheduler(m, sc.scheduler); });
    section("traffic", [&](MapReader& m) { read_traffic(m, sc.traffic); });
    section("edge", [&](MapReader& m) { read_edge(m, sc.edge); });
    section("sweep", [&](MapReader& m) { read_sweep(m, sc.sweep); });

    const YAML::Node users = r.child("users");
    if (users && !users.IsNull()) {
        if (!users.IsSequence()) throw ConfigError("expected a list", "users");
        for (std::size_t i = 0; i < users.size(); ++i) {
            sc.users.push_back(read_user(users[i], "users[" + std::to_string(i) + "]"));
        }
    }
    r.finish();
    return sc;
}

// Walks a dotted path ("a.b.2.c"), creating maps as needed, and sets the leaf.
void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key=value, got '" + assignment + "'", "--set");
    }
    const std::string key = trim(std::string_view(assignment).substr(0, eq));
    const std::string text = assignment.substr(eq + 1);
    YAML::Node value;
    try {
        value = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("cannot parse value '" + text + "': " + e.msg, key);
    }

    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);

    // yaml-cpp nodes are handles; a vector keeps each level alive.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& part = parts[i];
        YAML::Node cur = chain.back();
        const bool last = i + 1 == parts.size();
        if (cur.IsSequence()) {
            std::size_t idx = 0;
            const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
            if (ec != std::errc() || ptr != part.data() + part.size() || idx >= cur.size()) {
                throw ConfigError("bad list index '" + part + "'", key);
            }
            if (last) {
                cur[idx] = value;
            } else {
                chain.push_back(cur[idx]);
            }
        } else {
            if (cur.IsScalar()) throw ConfigError("'" + part + "' is below a scalar", key);
            if (last) {
                cur[part] = value;
            } else {
                YAML::Node next = cur[part];
                if (!next || next.IsNull()) {
                    cur[part] = YAML::Node(YAML::NodeType::Map);
                    next = cur[part];
                }
                chain.push_back(next);
            }
        }
    }
}

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    // Keep reals recognisably real.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text, std::string_view field) {
    const std::string f(field);
    auto to_int = [&](const std::string& s) {
        const std::string t = trim(s);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
            throw ConfigError("expected an integer, got '" + t + "'", f);
        }
        return v;
    };
    std::vector<int> out;
    std::stringstream ss{std::string(text)};
    for (std::string item; std::getline(ss, item, ',');) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_int(item));
            continue;
        }
        std::string hi_text = item.substr(dots + 2);
        int step = 1;
        if (const auto colon = hi_text.find(':'); colon != std::string::npos) {
            step = to_int(hi_text.substr(colon + 1));
            hi_text = hi_text.substr(0, colon);
        }
        const int lo = to_int(item.substr(0, dots));
        const int hi = to_int(hi_text);
        if (step <= 0 || hi < lo) throw ConfigError("bad range '" + trim(item) + "'", f);
        for (int v = lo; v <= hi; v += step) out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list", f);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> parse_double_list(std::string_view text, std::string_view field) {
    std::vector<double> out;
    std::stringstream ss{std::string(text)};
    for (std::string item; std::getline(ss, item, ',');) {
        const std::string t = trim(item);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
            throw ConfigError("expected a number, got '" + t + "'", std::string(field));
        }
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list", std::string(field));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Scenario parse_scenario(std::string_view yaml_text, std::span<const std::string> overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("YAML syntax error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg,
                          "<document>");
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("top level must be a mapping", "<document>");
    for (const std::string& o : overrides) apply_override(root, o);
    return read_scenario(root);
}

Scenario load_scenario(const std::filesystem::path& path, std::span<const std::string> overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), overrides);
}

std::string to_yaml(const Scenario& sc) {
    YAML::Emitter out;
    auto kv = [&](const char* key, const auto& value) {
        out << YAML::Key << key << YAML::Value;
        using T = std::decay_t<decltype(value)>;
        if constexpr (std::is_floating_point_v<T>) {
            out << fmt_double(value);
        } else {
            out << value;
        }
    };
    auto dlist = [&](const char* key, const std::vector<double>& v) {
        out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (double d : v) out << fmt_double(d);
        out << YAML::EndSeq;
    };

    out << YAML::BeginMap;
    kv("seed", sc.seed);
    kv("duration_ms", sc.duration_ms);
    kv("warmup_ms", sc.warmup_ms);
    kv("area_m", sc.area_m);
    kv("reliability_target", sc.reliability_target);
    kv("randomize_epochs", sc.randomize_epochs);
    kv("session_start_ms", sc.session_start_ms);
    kv("num_users", sc.num_users);
    kv("runs_per_point", sc.runs_per_point);

    out << YAML::Key << "radio" << YAML::Value << YAML::BeginMap;
    kv("carrier_ghz", sc.radio.carrier_ghz);
    kv("bandwidth_mhz", sc.radio.bandwidth_mhz);
    kv("numerology_index", sc.radio.numerology_index);
    kv("num_rbs", sc.radio.num_rbs);
    kv("bs_power_dbm", sc.radio.bs_power_dbm);
    kv("bs_height_m", sc.radio.bs_height_m);
    kv("ue_height_m", sc.radio.ue_height_m);
    kv("ue_noise_figure_db", sc.radio.ue_noise_figure_db);
    kv("target_bler", sc.radio.target_bler);
    kv("shadowing_std_db", sc.radio.shadowing_std_db);
    kv("overhead_frac", sc.radio.overhead_frac);
    kv("num_layers", sc.radio.num_layers);
    out << YAML::EndMap;

    out << YAML::Key << "scheduler" << YAML::Value << YAML::BeginMap;
    kv("policy", std::string(to_string(sc.scheduler.policy)));
    kv("pf_beta", sc.scheduler.pf_beta);
    kv("drr_quantum_bits", sc.scheduler.drr_quantum_bits);
    kv("harq_rtt_slots", sc.scheduler.harq_rtt_slots);
    kv("max_harq_attempts", sc.scheduler.max_harq_attempts);
    kv("queue_capacity_frames", sc.scheduler.queue_capacity_frames);
    out << YAML::EndMap;

    out << YAML::Key << "traffic" << YAML::Value << YAML::BeginMap;
    kv("frame_rate_fps", sc.traffic.frame_rate_fps);
    kv("data_rate_bps", sc.traffic.data_rate_bps);
    kv("size_std_frac", sc.traffic.size_std_frac);
    kv("size_trunc_frac", sc.traffic.size_trunc_frac);
    kv("jitter_std_ms", sc.traffic.jitter_std_ms);
    kv("jitter_trunc_ms", sc.traffic.jitter_trunc_ms);
    kv("clamp_negative_jitter", sc.traffic.clamp_negative_jitter);
    out << YAML::EndMap;

    out << YAML::Key << "edge" << YAML::Value << YAML::BeginMap;
    kv("p_d", sc.edge.p_d);
    kv("delay_bound_ms", sc.edge.delay_bound_ms);
    if (sc.edge.playout_delay_ms) kv("playout_delay_ms", *sc.edge.playout_delay_ms);
    kv("mse_averaging",
       std::string(sc.edge.mse_averaging == MseAveraging::kAllFrames ? "all_frames" : "predicted_only"));
    out << YAML::Key << "error_model" << YAML::Value << YAML::BeginMap;
    kv("eps1", sc.edge.error_model.eps1);
    kv("growth", std::string(sc.edge.error_model.growth == MseGrowth::kLinear ? "linear" : "power"));
    kv("exponent", sc.edge.error_model.exponent);
    out << YAML::EndMap << YAML::EndMap;

    if (!sc.users.empty()) {
        out << YAML::Key << "users" << YAML::Value << YAML::BeginSeq;
        for (const UserOverride& u : sc.users) {
            out << YAML::BeginMap;
            if (u.position) dlist("position", {u.position->x_m, u.position->y_m});
            if (u.p_d) kv("p_d", *u.p_d);
            if (u.delay_bound_ms) kv("delay_bound_ms", *u.delay_bound_ms);
            if (u.frame_rate_fps) kv("frame_rate_fps", *u.frame_rate_fps);
            if (u.data_rate_bps) kv("data_rate_bps", *u.data_rate_bps);
            if (u.reliability_target) kv("reliability_target", *u.reliability_target);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }

    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "users" << YAML::Value << YAML::Flow << sc.sweep.users;
    out << YAML::Key << "p_d" << YAML::Value << YAML::Flow << sc.sweep.p_d;
    out << YAML::Key << "policies" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Policy p : sc.sweep.policies) out << std::string(to_string(p));
    out << YAML::EndSeq;
    dlist("delay_bounds_ms", sc.sweep.delay_bounds_ms);
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace xrsim
