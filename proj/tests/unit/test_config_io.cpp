#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xrsim/config.hpp"
#include "xrsim/error.hpp"
#include "xrsim/io.hpp"

namespace xrsim {
namespace {

const std::filesystem::path kSource = XRSIM_SOURCE_DIR;

std::string field_of(const std::string& yaml, std::vector<std::string> overrides = {}) {
    try {
        parse_scenario(yaml, overrides);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

TEST(Config, ShippedDefaultsEqualBuiltInDefaults) {
    const Scenario sc = load_scenario(kSource / "configs" / "default.yaml");
    EXPECT_EQ(to_yaml(sc), to_yaml(Scenario{}));
    EXPECT_TRUE(validate(sc).empty());
}

TEST(Config, EmptyDocumentIsDefaults) { EXPECT_EQ(to_yaml(parse_scenario("")), to_yaml(Scenario{})); }

TEST(Config, RoundTrip) {
    Scenario sc;
    sc.seed = 42;
    sc.edge.playout_delay_ms = 1.25;
    sc.traffic.frame_rate_fps = 120;
    sc.users.push_back(UserOverride{Position{1.5, 2.0}, 1});
    sc.sweep.users = {1, 2, 3};
    sc.sweep.policies = {Policy::kDrr};
    sc.sweep.delay_bounds_ms = {2.5, 1000.0 / 120.0 + 2.5};
    const std::string text = to_yaml(sc);
    EXPECT_EQ(to_yaml(parse_scenario(text)), text);
}

TEST(Config, UnknownKeysAreRejectedWithPath) {
    EXPECT_EQ(field_of("radio: {num_rb: 3}"), "radio.num_rb");
    EXPECT_EQ(field_of("edge: {error_model: {eps: 1}}"), "edge.error_model.eps");
    EXPECT_EQ(field_of("bogus: 1"), "bogus");
    EXPECT_EQ(field_of("users: [{pd: 1}]"), "users[0].pd");
}

TEST(Config, WrongTypesNameTheKey) {
    EXPECT_EQ(field_of("radio: {num_rbs: many}"), "radio.num_rbs");
    EXPECT_EQ(field_of("scheduler: {policy: RR}"), "scheduler.policy");
    EXPECT_EQ(field_of("radio: 3"), "radio");
    EXPECT_EQ(field_of("edge: {mse_averaging: some}"), "edge.mse_averaging");
    EXPECT_EQ(field_of("radio: [1, 2"), "<document>");
}

TEST(Config, OverridesApplyBeforeReading) {
    const std::vector<std::string> o{"scheduler.policy=MAX_CQI", "edge.error_model.eps1=0.02", "num_users=7",
                                     "sweep.users=1..3", "sweep.policies=[PF, DRR]"};
    const Scenario sc = parse_scenario("", o);
    EXPECT_EQ(sc.scheduler.policy, Policy::kMaxCqi);
    EXPECT_EQ(sc.edge.error_model.eps1, 0.02);
    EXPECT_EQ(sc.num_users, 7);
    EXPECT_EQ(sc.sweep.users, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(sc.sweep.policies, (std::vector<Policy>{Policy::kPf, Policy::kDrr}));
}

TEST(Config, OverrideIntoUserList) {
    const Scenario sc = parse_scenario("users: [{p_d: 0}, {p_d: 0}]", std::vector<std::string>{"users.1.p_d=2"});
    EXPECT_EQ(sc.users[1].p_d, 2);
    EXPECT_EQ(field_of("users: [{p_d: 0}]", {"users.4.p_d=2"}), "users.4.p_d");
    EXPECT_EQ(field_of("", {"noequals"}), "--set");
    EXPECT_EQ(field_of("", {"radio.typo=1"}), "radio.typo");
}

TEST(Config, MissingFileIsIoError) {
    EXPECT_THROW(load_scenario("/nonexistent/scenario.yaml"), IoError);
}

TEST(Lists, RangesAndSteps) {
    EXPECT_EQ(parse_int_list("1..3", "x"), (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(parse_int_list("1..9:4", "x"), (std::vector<int>{1, 5, 9}));
    EXPECT_EQ(parse_int_list("4, 2,2", "x"), (std::vector<int>{2, 4}));
    EXPECT_THROW(parse_int_list("", "x"), ConfigError);
    EXPECT_THROW(parse_int_list("3..1", "x"), ConfigError);
    EXPECT_EQ(parse_double_list("2.5,10.833", "x"), (std::vector<double>{2.5, 10.833}));
}

TEST(Csv, QuotingRoundTrip) {
    SweepResult r;
    SweepRow row;
    row.ok = false;
    row.error = "users[0]: bad, \"quoted\"\nvalue";
    r.rows.push_back(row);
    const OutputFile f = sweep_csv(r);
    EXPECT_EQ(f.rows, 1u);
    const CsvTable t = parse_csv(f.content);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0][t.column("error")], row.error);
    EXPECT_EQ(t.rows[0][t.column("ok")], "0");
    EXPECT_EQ(t.rows[0][t.column("delay_reliable_throughput")], "");
}

TEST(Csv, RaggedRowsAndMissingColumns) {
    EXPECT_THROW(parse_csv("a,b\n1\n"), ConfigError);
    const CsvTable t = parse_csv("a,b\n1,2\n");
    EXPECT_THROW(t.column("c"), ConfigError);
}

TEST(Csv, TimesHaveThreeDecimals) {
    FrameRecord f;
    f.gen_time_ms = 1.0 / 3.0;
    f.display_deadline_ms = 2.8333333;
    const OutputFile out = frames_csv(std::vector<FrameRecord>{f});
    EXPECT_NE(out.content.find(",0.333,0.000,,,2.833,"), std::string::npos) << out.content;
}

TEST(Crossover, FromSweepTable) {
    std::ostringstream csv;
    csv << "policy,frame_rate_fps,data_rate_bps,delay_bound_ms,p_d,num_users,ok,mean_mse\n";
    const int users[] = {4, 8, 12};
    const double a[] = {0.0, 0.02, 0.05};
    for (int i = 0; i < 3; ++i) {
        csv << "PF,120,60000000,2.500,0," << users[i] << ",1," << a[i] << "\n";
        csv << "PF,120,60000000,2.500,1," << users[i] << ",1,0.03\n";
        csv << "PF,120,60000000,2.500,1," << users[i] << ",0,9\n";
    }
    const std::vector<double> th{0.02, 0.035, 0.04};
    const OutputFile f = crossover_json(parse_csv(csv.str()), th);
    EXPECT_NE(f.content.find("\"users\": 9.333333"), std::string::npos) << f.content;
    EXPECT_NE(f.content.find("\"max_users\": 12"), std::string::npos);
}

TEST(Crossover, MissingColumnIsReported) {
    const std::vector<double> th{0.02};
    try {
        crossover_json(parse_csv("policy,p_d\nPF,0\n"), th);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "frame_rate_fps");
    }
}

TEST(Bundle, ManifestListsFilesWithRowCounts) {
    Scenario sc;
    sc.duration_ms = 2000;
    sc.warmup_ms = 500;
    sc.num_users = 2;
    const SimReport rep = run(sc);
    const std::vector<OutputFile> files{frames_csv(rep.frames), users_csv(rep.users), summary_json(rep)};
    ManifestInfo info;
    info.command = "run";
    info.overrides = {"num_users=2"};
    const OutputFile m = manifest_json(info, files);
    EXPECT_NE(m.content.find("\"name\": \"frames.csv\""), std::string::npos);
    EXPECT_NE(m.content.find("\"rows\": 240"), std::string::npos);
    EXPECT_NE(m.content.find("num_users=2"), std::string::npos);
    EXPECT_EQ(summary_json(run(sc)).content, summary_json(rep).content);

    const auto dir = std::filesystem::temp_directory_path() / "xrsim_bundle_test";
    std::filesystem::remove_all(dir);
    write_bundle(dir, m, files);
    for (const char* name : {"manifest.json", "frames.csv", "users.csv", "summary.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    }
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace xrsim
