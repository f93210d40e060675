#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xrsim/engine.hpp"
#include "xrsim/metrics.hpp"

namespace xrsim {

/// A rendered output file. `rows` counts data rows (CSV) or is 1 (JSON).
struct OutputFile {
    std::string name;
    std::string content;
    std::size_t rows = 0;
};

// CSV renderers. Fixed header row, RFC 4180 quoting, times in ms with three
// decimals, sizes in bits, rates in bit/s, empty cell for a missing value.
OutputFile frames_csv(std::span<const FrameRecord> frames);
OutputFile users_csv(std::span<const UserKpi> users);
OutputFile links_csv(std::span<const LinkState> links);
OutputFile summary_json(const SimReport& report);

OutputFile sweep_csv(const SweepResult& result);
OutputFile sweep_points_csv(const SweepResult& result);
OutputFile sweep_users_csv(const SweepResult& result);
/// One surface per (policy, traffic class, delay bound, p_d).
OutputFile violation_surface_csv(const SweepResult& result, double bin_width_db = 2.0);

struct ManifestInfo {
    std::string command;
    std::string scenario_yaml;
    std::vector<std::string> overrides;
    std::uint64_t base_seed = 0;
    std::vector<std::uint64_t> run_seeds;  // empty for single runs
};

/// Lists `files` (name and row count) ahead of their being written.
OutputFile manifest_json(const ManifestInfo& info, std::span<const OutputFile> files);

/// Writes manifest first, then `files`, into `dir` (created if needed).
/// Throws IoError.
void write_bundle(const std::filesystem::path& dir, const OutputFile& manifest,
                  std::span<const OutputFile> files);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index; ConfigError naming the column when absent.
    std::size_t column(const std::string& name) const;
};

/// RFC 4180 parsing. Throws ConfigError on ragged rows.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Crossovers for every (policy, traffic class, delay bound) group of a
/// sweep.csv table, using the mean MSE over ok runs at each (p_d, users).
OutputFile crossover_json(const CsvTable& sweep_table, std::span<const double> thresholds);

/// "1.500" style fixed formatting used for times.
std::string format_ms(double ms);
/// Shortest round-trip decimal.
std::string format_real(double value);

}  // namespace xrsim
