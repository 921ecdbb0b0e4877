#pragma once

// On-disk layout of a run:
//   <dir>/manifest.json            config echo, timestamps, one entry per query
//   <dir>/<query_id>.document.json completed AttributionDocument
//   <dir>/report.{json,md,csv}     MetricsReport renderings
// An ablation directory holds budget-<b>/ run directories plus
// ablation.csv, ablation.md and report.json.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citecheck/metrics.hpp"
#include "citecheck/runner.hpp"

namespace citecheck {

nlohmann::json config_to_json(const RunConfig& config);

/// ISO-8601 UTC time. Honours SOURCE_DATE_EPOCH for reproducible output.
std::string utc_timestamp();
bool reproducible_timestamps();

/// File-name-safe form of a query id.
std::string document_file_name(std::string_view query_id);

struct RunInfo {
    std::string run_id;
    std::string label;
    std::string started_at;
};

/// Writes documents, manifest and reports; returns the MetricsReport.
MetricsReport write_run_directory(const std::filesystem::path& dir, const RunInfo& info,
                                  std::span<const RunRecord> records, const RunConfig& config);

struct LoadedRun {
    std::string label;
    std::vector<Dimension> dimensions;
    std::vector<RunRecord> records;
};

/// Throws std::runtime_error when manifest or documents are missing or malformed.
LoadedRun load_run_directory(const std::filesystem::path& dir);

/// `root` itself when it holds a manifest, otherwise its immediate
/// subdirectories that do, sorted by name.
std::vector<std::filesystem::path> find_run_directories(const std::filesystem::path& root);

MetricsReport write_ablation_directory(const std::filesystem::path& dir, const RunInfo& info,
                                       const std::map<int, std::vector<RunRecord>>& by_budget,
                                       const RunConfig& config);

}  // namespace citecheck
