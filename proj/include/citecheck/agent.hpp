#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "citecheck/expected.hpp"

namespace citecheck {

/// One query of a batch. report_path, when set, points at a pre-generated
/// report and overrides the adapter's own lookup.
struct RunSpec {
    std::string query_id;
    std::string query;
    std::optional<std::string> report_path;

    friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct Report {
    std::string markdown;
    /// Where it came from: a file path or the command line that produced it.
    std::string origin;
};

/// Produces the Markdown report for a query. The research agent itself
/// lives outside this program; adapters only load or capture its output.
class AgentAdapter {
public:
    virtual ~AgentAdapter() = default;
    virtual Expected<Report> acquire(const RunSpec& spec, std::optional<int> budget) const = 0;
};

/// Reads <dir>/<query_id>.md, or the spec's report_path (relative to dir).
class FileReportAdapter final : public AgentAdapter {
public:
    explicit FileReportAdapter(std::filesystem::path dir);
    Expected<Report> acquire(const RunSpec& spec, std::optional<int> budget) const override;

private:
    std::filesystem::path dir_;
};

/// Runs an external command and captures its stdout as the report. The
/// template is split into arguments like a shell would (quotes and
/// backslashes, no expansion); {query}, {query_id} and {budget} are then
/// substituted inside each argument.
class CommandAgentAdapter final : public AgentAdapter {
public:
    explicit CommandAgentAdapter(std::string command_template, int timeout_ms = 0);
    Expected<Report> acquire(const RunSpec& spec, std::optional<int> budget) const override;

    /// The argv that acquire() would execute.
    std::vector<std::string> command_for(const RunSpec& spec, std::optional<int> budget) const;

private:
    std::vector<std::string> argv_template_;
    int timeout_ms_;
};

/// Shell-style word splitting. Throws std::invalid_argument on an
/// unterminated quote.
std::vector<std::string> split_command(std::string_view command);

/// Reads a batch manifest: a JSON array of {query_id, query, report_path?},
/// or an object holding such an array under "queries".
std::vector<RunSpec> load_run_specs(const std::filesystem::path& path);

}  // namespace citecheck
