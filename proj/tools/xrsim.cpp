// xrsim: command-line front end.
//
//   xrsim run        --config scenario.yaml --out dir [--set key=value]...
//   xrsim sweep      --config scenario.yaml --users 1..15 --pd 0,1,2 --policy PF,DRR --runs 10
//   xrsim crossover  --sweep dir/sweep.csv --thresholds 0.02,0.035,0.04
//   xrsim link-table
//   xrsim validate   --config scenario.yaml
//
// Exit status: 0 ok, 2 configuration or usage error, 3 I/O error,
// 4 internal invariant failure.

#include <cstdlib>
#include <iostream>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xrsim/config.hpp"
#include "xrsim/error.hpp"
#include "xrsim/io.hpp"

namespace {

using namespace xrsim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

struct Common {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
    cmd->add_option("-c,--config", c.config, "Scenario YAML file (defaults apply when omitted)");
    if (with_out) {
        cmd->add_option("-o,--out", c.out, "Output directory (default $XRSIM_OUT_DIR, else ./out)");
    }
    cmd->add_option("-s,--set", c.overrides, "Override a config key, e.g. scheduler.policy=DRR")->allow_extra_args(false);
    cmd->add_option("--seed", c.seed, "Base seed");
}

std::string out_dir(const Common& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv("XRSIM_OUT_DIR"); env && *env) return env;
    return "out";
}

Scenario load(const Common& c) {
    Scenario sc = c.config.empty() ? parse_scenario("", c.overrides) : load_scenario(c.config, c.overrides);
    if (c.seed) sc.seed = *c.seed;
    const auto problems = validate(sc);
    if (!problems.empty()) {
        for (std::size_t i = 1; i < problems.size(); ++i) std::cerr << "xrsim: " << problems[i] << "\n";
        throw ConfigError(problems.front());
    }
    return sc;
}

ManifestInfo manifest_for(const std::string& command, const Scenario& sc, const Common& c) {
    ManifestInfo m;
    m.command = command;
    m.scenario_yaml = to_yaml(sc);
    m.overrides = c.overrides;
    m.base_seed = sc.seed;
    return m;
}

int cmd_run(const Common& c) {
    const Scenario sc = load(c);
    const SimReport report = run(sc);
    const std::vector<OutputFile> files{frames_csv(report.frames), users_csv(report.users), summary_json(report),
                                        links_csv(report.links)};
    write_bundle(out_dir(c), manifest_json(manifest_for("run", sc, c), files), files);
    std::cout << "users " << report.summary.num_users << ", satisfied " << report.summary.satisfied_users
              << ", mean reliability " << format_real(report.summary.mean_reliability) << ", mean mse "
              << format_real(report.summary.mean_mse) << "\n";
    return kExitOk;
}

struct SweepFlags {
    std::optional<std::string> users;
    std::optional<std::string> pd;
    std::optional<std::string> policies;
    std::optional<std::string> delay_bounds;
    std::optional<int> runs;
    int jobs = 1;
};

int cmd_sweep(const Common& c, const SweepFlags& f) {
    Scenario sc = load(c);
    if (f.users) sc.sweep.users = parse_int_list(*f.users, "--users");
    if (f.pd) sc.sweep.p_d = parse_int_list(*f.pd, "--pd");
    if (f.delay_bounds) sc.sweep.delay_bounds_ms = parse_double_list(*f.delay_bounds, "--delay-bound");
    if (f.policies) {
        sc.sweep.policies.clear();
        std::stringstream ss(*f.policies);
        for (std::string item; std::getline(ss, item, ',');) sc.sweep.policies.push_back(parse_policy(item));
        if (sc.sweep.policies.empty()) throw ConfigError("empty list", "--policy");
    }
    if (f.runs) sc.runs_per_point = *f.runs;
    if (sc.sweep.empty()) throw ConfigError("no sweep axis given (--users, --pd, --policy, --delay-bound)", "sweep");
    if (const auto problems = validate(sc); !problems.empty()) throw ConfigError(problems.front());

    const SweepResult result = sweep(sc, f.jobs);
    const std::vector<OutputFile> files{sweep_csv(result), sweep_points_csv(result), sweep_users_csv(result),
                                        violation_surface_csv(result)};
    ManifestInfo m = manifest_for("sweep", sc, c);
    for (const SweepRow& r : result.rows) m.run_seeds.push_back(r.seed);
    write_bundle(out_dir(c), manifest_json(m, files), files);
    std::size_t failed = 0;
    for (const SweepRow& r : result.rows) failed += r.ok ? 0 : 1;
    std::cout << result.rows.size() << " runs over " << result.points.size() << " points, " << failed
              << " failed\n";
    return kExitOk;
}

int cmd_crossover(const std::string& sweep_path, const std::string& thresholds, const std::string& out) {
    const CsvTable table = read_csv(sweep_path);
    const std::vector<double> th = parse_double_list(thresholds, "--thresholds");
    const OutputFile file = crossover_json(table, th);
    ManifestInfo m;
    m.command = "crossover " + sweep_path;
    const std::vector<OutputFile> files{file};
    write_bundle(out, manifest_json(m, files), files);
    std::cout << file.content;
    return kExitOk;
}

int cmd_link_table(const Common& c) {
    const Scenario sc = load(c);
    std::cout << "cqi,sinr_threshold_db,efficiency,bits_per_rb_slot\n";
    for (std::size_t i = 0; i < kCqiEfficiency.size(); ++i) {
        const CqiRate rate = cqi_and_rate(kCqiSinrThresholdDb[i], sc.radio);
        std::cout << i + 1 << "," << format_real(kCqiSinrThresholdDb[i]) << "," << format_real(kCqiEfficiency[i])
                  << "," << rate.bits_per_rb_slot << "\n";
    }
    return kExitOk;
}

int cmd_validate(const Common& c) {
    const Scenario sc = c.config.empty() ? parse_scenario("", c.overrides) : load_scenario(c.config, c.overrides);
    const auto problems = validate(sc);
    for (const std::string& p : problems) std::cout << p << "\n";
    if (problems.empty()) std::cout << "ok\n";
    return problems.empty() ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-cell 5G NR downlink simulator for XR traffic with edge frame prediction"};
    app.require_subcommand(1);
    app.set_version_flag("--version", XRSIM_VERSION);

    Common run_opts;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario and write frames/users/summary files");
    add_common(run_cmd, run_opts);

    Common sweep_opts;
    SweepFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the Cartesian product of the sweep axes");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--users", sweep_flags.users, "User counts, e.g. 1..15 or 2,4,8");
    sweep_cmd->add_option("--pd", sweep_flags.pd, "Prediction depths, e.g. 0,1,2");
    sweep_cmd->add_option("--policy", sweep_flags.policies, "Policies, e.g. PF,DRR,MAX_CQI");
    sweep_cmd->add_option("--delay-bound", sweep_flags.delay_bounds, "Delay bounds in ms, e.g. 2.5,10.83");
    sweep_cmd->add_option("--runs", sweep_flags.runs, "Runs per point")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("-j,--jobs", sweep_flags.jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string sweep_path;
    std::string thresholds = "0.02,0.035,0.04";
    std::string crossover_out;
    auto* cross_cmd = app.add_subcommand("crossover", "Locate gamma and c points in a sweep.csv");
    cross_cmd->add_option("--sweep", sweep_path, "sweep.csv from `xrsim sweep`")->required();
    cross_cmd->add_option("--thresholds", thresholds, "MSE thresholds for c points");
    cross_cmd->add_option("-o,--out", crossover_out, "Output directory (default: next to the sweep file)");

    Common link_opts;
    auto* link_cmd = app.add_subcommand("link-table", "Print the CQI table with the configured rates");
    add_common(link_cmd, link_opts, false);

    Common validate_opts;
    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario and list every violation");
    add_common(validate_cmd, validate_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run_cmd) return cmd_run(run_opts);
        if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_flags);
        if (*cross_cmd) {
            std::string out = crossover_out;
            if (out.empty()) {
                const auto parent = std::filesystem::path(sweep_path).parent_path();
                out = parent.empty() ? "." : parent.string();
            }
            return cmd_crossover(sweep_path, thresholds, out);
        }
        if (*link_cmd) return cmd_link_table(link_opts);
        if (*validate_cmd) return cmd_validate(validate_opts);
    } catch (const ConfigError& e) {
        std::cerr << "xrsim: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "xrsim: I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InternalError& e) {
        std::cerr << "xrsim: internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "xrsim: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
