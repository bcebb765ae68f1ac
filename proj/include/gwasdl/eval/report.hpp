#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gwasdl::eval {

enum class Setting { Baseline, Selection, MultiLabel };

std::string to_string(Setting setting);
Setting parse_setting(const std::string& name);

/// One evaluated cell. `scope` is empty and `threshold` NaN outside the
/// selection setting.
struct ReportRow {
    std::string disease;
    std::string architecture;
    bool covariates = false;
    std::string scope;
    double threshold = 0.0;
    double auc = 0.5;
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_selected = 0;
    bool empty_selection = false;
    double wall_time_s = 0.0;  // 0 unless timing was requested

    bool operator==(const ReportRow& other) const;
};

struct ExperimentReport {
    Setting setting = Setting::Baseline;
    std::vector<ReportRow> rows;
    nlohmann::json config;  // resolved configuration that produced the rows
};

enum class ReportFormat { Csv, Json, Svg };

std::string csv_text(const ExperimentReport& report);
ExperimentReport parse_csv(const std::string& text);
ExperimentReport read_csv(const std::filesystem::path& path);

/// Full metadata plus mean and SD of AUC per (disease, architecture,
/// covariates, scope, threshold) group; for multi-label reports also the
/// per-disease covariate delta.
nlohmann::json json_document(const ExperimentReport& report);

/// Grouped bar chart of AUC, one bar per row, grouped by disease.
std::string svg_text(const ExperimentReport& report);

/// Stem shared by every file of a report: "{setting}_{16 hex digits}", the
/// digits being an FNV-1a hash of the CSV text.
std::string report_stem(const ExperimentReport& report);

/// Writes the requested formats into `out_dir` (created if absent). Throws
/// IoFailure; ConfigInvalid for an empty report.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir,
                                               const std::vector<ReportFormat>& formats = {
                                                   ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg});

ReportFormat parse_format(const std::string& name);

/// Build identifier baked in at configure time.
std::string git_describe();

}  // namespace gwasdl::eval
