#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xrsim/config.hpp"
#include "xrsim/error.hpp"
#include "xrsim/io.hpp"

namespace py = pybind11;
using namespace xrsim;

namespace {

Scenario scenario_from(const std::string& yaml, const std::vector<std::string>& overrides) {
    Scenario sc = parse_scenario(yaml, overrides);
    if (const auto problems = validate(sc); !problems.empty()) throw ConfigError(problems.front());
    return sc;
}

py::dict kpi_dict(const UserKpi& k) {
    py::dict d;
    d["user_id"] = k.user_id;
    d["frames"] = k.frames;
    d["met"] = k.met;
    d["reliability"] = k.reliability;
    d["violation_pct"] = k.violation_pct;
    d["satisfied"] = k.satisfied;
    d["mean_mse"] = k.mean_mse;
    d["sinr_db"] = k.sinr_db;
    d["cqi"] = k.cqi;
    return d;
}

py::dict frame_dict(const FrameRecord& r) {
    py::dict d;
    d["user_id"] = r.user_id;
    d["frame_idx"] = r.frame_idx;
    d["size_bits"] = r.size_bits;
    d["gen_time_ms"] = r.gen_time_ms;
    d["edge_arrival_ms"] = r.edge_arrival_ms;
    d["mac_available_ms"] = r.mac_available_ms;
    d["delivery_ms"] = r.delivery_ms;
    d["display_deadline_ms"] = r.display_deadline_ms;
    d["dropped"] = r.dropped;
    d["met_deadline"] = r.met_deadline;
    d["is_predicted"] = r.is_predicted;
    d["cold_start"] = r.cold_start;
    d["counted"] = r.counted;
    d["effective_horizon"] = r.effective_horizon;
    d["display_horizon"] = r.display_horizon;
    d["display_mse"] = r.display_mse;
    return d;
}

py::dict run_py(const std::string& yaml, const std::vector<std::string>& overrides, bool frames) {
    const Scenario sc = scenario_from(yaml, overrides);
    SimReport rep;
    {
        py::gil_scoped_release release;
        rep = run(sc);
    }
    const RunSummary& s = rep.summary;
    py::dict summary;
    summary["num_users"] = s.num_users;
    summary["frames_generated"] = s.frames_generated;
    summary["frames_counted"] = s.frames_counted;
    summary["frames_met"] = s.frames_met;
    summary["delay_reliable_throughput"] = s.delay_reliable_throughput;
    summary["satisfied_users"] = s.satisfied_users;
    summary["mean_reliability"] = s.mean_reliability;
    summary["mean_mse"] = s.mean_mse;
    summary["slots_processed"] = s.slots_processed;
    summary["max_rbs_used"] = s.max_rbs_used;
    summary["overflow_drops"] = s.overflow_drops;
    summary["harq_drops"] = s.harq_drops;
    py::list users;
    for (const UserKpi& k : rep.users) users.append(kpi_dict(k));
    py::dict out;
    out["summary"] = summary;
    out["users"] = users;
    out["digest"] = rep.digest;
    if (frames) {
        py::list fl;
        for (const FrameRecord& r : rep.frames) fl.append(frame_dict(r));
        out["frames"] = fl;
    }
    return out;
}

py::list sweep_py(const std::string& yaml, const std::vector<std::string>& overrides, int jobs) {
    const Scenario sc = scenario_from(yaml, overrides);
    SweepResult res;
    {
        py::gil_scoped_release release;
        res = sweep(sc, jobs);
    }
    py::list rows;
    for (const SweepRow& r : res.rows) {
        py::dict d;
        d["policy"] = std::string(to_string(r.point.policy));
        d["p_d"] = r.point.p_d;
        d["delay_bound_ms"] = r.point.delay_bound_ms;
        d["num_users"] = r.point.num_users;
        d["run"] = r.run_index;
        d["seed"] = r.seed;
        d["ok"] = r.ok;
        d["error"] = r.error;
        d["satisfied_users"] = r.satisfied_users;
        d["delay_reliable_throughput"] = r.delay_reliable_throughput;
        d["mean_reliability"] = r.mean_reliability;
        d["mean_mse"] = r.mean_mse;
        rows.append(d);
    }
    return rows;
}

py::list stream_py(double fps, double rate_bps, double duration_ms, std::uint64_t seed, std::uint32_t user) {
    TrafficProfile p;
    p.frame_rate_fps = fps;
    p.data_rate_bps = rate_bps;
    py::list out;
    for (const XrFrame& f : generate_stream(p, user, duration_ms, seed)) {
        py::dict d;
        d["frame_idx"] = f.frame_idx;
        d["gen_time_ms"] = f.gen_time_ms;
        d["edge_arrival_ms"] = f.edge_arrival_ms;
        d["size_bits"] = f.size_bits;
        out.append(d);
    }
    return out;
}

py::dict crossovers_py(const std::vector<int>& users, const std::map<int, std::vector<std::optional<double>>>& by_pd,
                       const std::vector<double>& thresholds) {
    MseCurves curves{users, by_pd};
    const CrossoverReport rep = find_crossovers(curves, thresholds);
    py::list gamma;
    for (const GammaPoint& g : rep.gamma_points) gamma.append(py::make_tuple(g.pd_low, g.pd_high, g.users));
    py::list cps;
    for (const CPoint& c : rep.c_points) cps.append(py::make_tuple(c.mse_threshold, c.p_d, c.max_users));
    py::dict out;
    out["gamma_points"] = gamma;
    out["c_points"] = cps;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "xrsim core bindings";
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

    m.def("default_config", [] { return to_yaml(Scenario{}); }, "Default scenario as YAML text.");
    m.def("validate",
          [](const std::string& yaml, const std::vector<std::string>& overrides) {
              return validate(parse_scenario(yaml, overrides));
          },
          py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{});
    m.def("run", &run_py, py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{},
          py::arg("frames") = false, "Run one scenario given as YAML text.");
    m.def("sweep", &sweep_py, py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{},
          py::arg("jobs") = 1, "Run the scenario's sweep axes; one dict per (point, run).");
    m.def("generate_stream", &stream_py, py::arg("frame_rate_fps"), py::arg("data_rate_bps"),
          py::arg("duration_ms"), py::arg("seed"), py::arg("user_id") = 0);
    m.def("pathloss_uma_nlos", &pathloss_uma_nlos, py::arg("distance_3d_m"), py::arg("carrier_ghz"),
          py::arg("ue_height_m"), py::arg("bs_height_m") = 25.0);
    m.def("cqi_and_rate",
          [](double sinr_db, double overhead_frac, int num_layers) {
              RadioConfig cfg;
              cfg.overhead_frac = overhead_frac;
              cfg.num_layers = num_layers;
              const CqiRate r = cqi_and_rate(sinr_db, cfg);
              return py::make_tuple(r.cqi, r.bits_per_rb_slot);
          },
          py::arg("sinr_db"), py::arg("overhead_frac") = RadioConfig{}.overhead_frac,
          py::arg("num_layers") = RadioConfig{}.num_layers);
    m.def("effective_budget", &effective_budget, py::arg("p_d"), py::arg("frame_period_ms"),
          py::arg("delay_bound_ms"));
    m.def("find_crossovers", &crossovers_py, py::arg("users"), py::arg("curves"), py::arg("thresholds"));
}
