#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deficit {

enum class Experiment { Identities, LimitRates, Slicing, Entropy, Projection, All };

std::optional<Experiment> parse_experiment(std::string_view name);
std::string_view experiment_name(Experiment e);

/// Line-based key=value configuration; list values are comma separated and
/// '#' starts a comment. Relative mixture paths resolve against the config
/// file's directory.
struct ExperimentConfig {
    Experiment experiment = Experiment::All;
    std::vector<std::filesystem::path> mixture_files;
    int n = 1;  // dimension for the mixture-free projection experiment
    double tau_min = 0.5;
    double tau_max = 2.0;
    std::vector<long long> N_list{1000, 10000, 100000, 1000000};
    std::vector<double> beta_list{0.9, 0.95, 0.99};
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "deficit-out";
};

/// ConfigParse on unknown keys, malformed values, tau_min <= 0, tau_max < tau_min,
/// an N_list entry below 7 or a beta outside (0, 1).
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

using CsvCell = std::variant<std::string, long long, double>;

struct CsvTable {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::string> column_notes;  // one per column, written in the '#' header
    std::vector<std::vector<CsvCell>> rows;
};

/// One pass/fail line of the run summary.
struct CheckRow {
    std::string experiment;
    std::string check;
    std::string subject;
    double measured;
    std::string relation;  // e.g. "<=", ">=", "in"
    std::string threshold;
    bool pass;
};

struct RunResult {
    std::vector<CsvTable> tables;
    std::vector<CheckRow> checks;
    bool all_pass() const;
};

/// MixtureParse when a mixture file is invalid.
RunResult run_experiment(const ExperimentConfig& config);

/// Writes every table plus summary.csv into `dir` (created if absent).
void write_results(const RunResult& result, const std::filesystem::path& dir);

/// 17 significant digits, '.' decimal separator, independent of the locale.
std::string format_number(double v);
/// RFC 4180 quoting.
std::string csv_field(std::string_view s);
std::string render_csv(const CsvTable& table);
CsvTable summary_table(const std::vector<CheckRow>& checks);

}  // namespace deficit
