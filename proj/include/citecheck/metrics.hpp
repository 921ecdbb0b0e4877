#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "citecheck/runner.hpp"
#include "citecheck/types.hpp"

namespace citecheck {

/// Unreduced fraction; den == 0 means the rate is undefined.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 0;

    bool defined() const noexcept { return den != 0; }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Percentage with one decimal, rounded half up: 2158/2159 -> "100.0%".
/// Undefined rates render as "n/a".
std::string render_percent(Rational r);
/// Same rounding, in tenths of a percent. Requires r.defined().
std::int64_t percent_tenths(Rational r);

struct DimensionStats {
    std::int64_t passed = 0;
    std::int64_t failed = 0;
    std::int64_t not_evaluated = 0;
    /// Subsets of passed/failed whose source was rate limited.
    std::int64_t rate_limited_passed = 0;
    std::int64_t rate_limited_failed = 0;

    std::int64_t total() const noexcept { return passed + failed + not_evaluated; }
    /// passed / (passed + failed).
    Rational pass_rate() const noexcept { return {passed, passed + failed}; }
    /// passed / all pairs, counting not_evaluated as not passed.
    Rational pass_rate_all() const noexcept { return {passed, total()}; }
    /// pass_rate with rate-limited pairs removed from both sides.
    Rational adjusted_pass_rate() const noexcept {
        return {passed - rate_limited_passed, passed + failed - rate_limited_passed - rate_limited_failed};
    }

    friend bool operator==(const DimensionStats&, const DimensionStats&) = default;
};

DimensionStats tally(std::span<const EvalResult> evals, Dimension dimension);

/// Keys of an error breakdown, in rendering order. The counts cover every
/// failed link_works result, so they always sum to the failure count.
inline constexpr std::string_view kErrorKeys[] = {"http_error_4xx", "http_error_5xx", "http_error_other",
                                                  "blocked",        "timeout",        "unreachable",
                                                  "rate_limited",   "empty_content",  "not_fetched"};

std::map<std::string, std::int64_t> error_breakdown(std::span<const EvalResult> evals);

/// Successful records over all records. Throws std::invalid_argument when empty.
Rational success_rate(std::span<const RunRecord> records);

struct BudgetRow {
    int budget = 0;
    std::int64_t n_queries = 0;
    std::int64_t n_success = 0;
    std::int64_t n_pairs = 0;
    std::map<Dimension, DimensionStats> dimensions;

    friend bool operator==(const BudgetRow&, const BudgetRow&) = default;
};

struct MetricsReport {
    std::string label;
    std::int64_t n_queries = 0;
    std::int64_t n_success = 0;
    std::int64_t n_pairs = 0;
    /// Only the dimensions that were evaluated.
    std::map<Dimension, DimensionStats> dimensions;
    std::map<std::string, std::int64_t> error_breakdown;
    /// Ascending by budget; empty outside ablations.
    std::vector<BudgetRow> budgets;

    Rational success_rate() const noexcept { return {n_success, n_queries}; }

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Aggregates the evals of every record. Dimensions are those present in
/// `dimensions`; a dimension with no results still gets zero counts.
MetricsReport build_report(std::string label, std::span<const RunRecord> records,
                           std::span<const Dimension> dimensions);

/// Per-budget rows sorted ascending, plus totals over all budgets.
MetricsReport build_ablation_report(std::string label, const std::map<int, std::vector<RunRecord>>& by_budget,
                                    std::span<const Dimension> dimensions);

enum class ReportFormat { json, markdown, csv };
std::optional<ReportFormat> report_format_from_string(std::string_view s) noexcept;

nlohmann::json to_json_value(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

/// One row (or JSON object) per report, in the given order.
std::string render_reports(std::span<const MetricsReport> reports, ReportFormat format);
std::string render_report(const MetricsReport& report, ReportFormat format);

/// Header "| Tool Calls | Link Works | Relevant | Fact Check |", one row per budget.
std::string render_ablation_markdown(const MetricsReport& report);
/// Columns budget,dimension,passed,failed,not_evaluated,rate.
std::string render_ablation_csv(const MetricsReport& report);

/// Descending by relevant-content pass rate, ties by label, undefined last.
void sort_by_relevance(std::vector<MetricsReport>& reports);

}  // namespace citecheck
