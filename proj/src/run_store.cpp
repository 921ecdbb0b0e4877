#include "citecheck/run_store.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <stdexcept>

#include "citecheck/serialization.hpp"

namespace citecheck {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json config_to_json(const RunConfig& c) {
    json dims = json::array();
    for (Dimension d : c.dimensions) dims.push_back(to_string(d));
    const FetchPolicy& p = c.fetch_policy;
    json fetch = {{"max_retries", p.max_retries},
                  {"retry_delay_ms", p.retry_delay_ms},
                  {"timeout_ms", p.timeout_ms},
                  {"truncation_limit", p.truncation_limit},
                  {"fact_check_truncation_limit", p.fact_check_limit()},
                  {"user_agent", p.user_agent},
                  {"max_redirects", p.max_redirects}};
    return json{{"evaluator_concurrency", c.evaluator_concurrency},
                {"agent_concurrency", c.agent_concurrency},
                {"dimensions", dims},
                {"judge", c.judge},
                {"judge_parse_retries", c.judge_retry.parse_retries},
                {"judge_transport_retries", c.judge_retry.transport_retries},
                {"tool_call_budget", c.tool_call_budget ? json(*c.tool_call_budget) : json(nullptr)},
                {"budgets", c.budgets},
                {"fetch_policy", fetch}};
}

bool reproducible_timestamps() { return std::getenv("SOURCE_DATE_EPOCH") != nullptr; }

std::string utc_timestamp() {
    std::time_t t;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    else
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string document_file_name(std::string_view query_id) {
    std::string out;
    for (char c : query_id) {
        bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        out.push_back(safe ? c : '_');
    }
    if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
    return out + ".document.json";
}

MetricsReport write_run_directory(const fs::path& dir, const RunInfo& info, std::span<const RunRecord> records,
                                  const RunConfig& config) {
    fs::create_directories(dir);
    json entries = json::array();
    std::map<std::string, int> used_names;
    for (const RunRecord& r : records) {
        std::string name = document_file_name(r.query_id);
        // Distinct ids can sanitize to the same name.
        if (int n = used_names[name]++; n > 0) {
            std::string stem = name.substr(0, name.size() - std::string_view(".document.json").size());
            name = fmt::format("{}-{}.document.json", stem, n);
        }
        write_file(dir / name, document_to_json(r.document));
        json diags = r.diagnostics;
        entries.push_back({{"query_id", r.query_id},
                           {"query", r.query},
                           {"report_path", r.report_path ? json(*r.report_path) : json(nullptr)},
                           {"budget", r.budget ? json(*r.budget) : json(nullptr)},
                           {"success", r.success},
                           {"diagnostics", diags},
                           {"acquisition_attempts", r.acquisition_attempts},
                           {"elapsed_ms", reproducible_timestamps() ? 0 : r.elapsed_ms},
                           {"document", name}});
    }
    json manifest = {{"run_id", info.run_id},
                     {"label", info.label},
                     {"started_at", info.started_at},
                     {"finished_at", utc_timestamp()},
                     {"config", config_to_json(config)},
                     {"records", entries}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    MetricsReport report = build_report(info.label, records, config.dimensions);
    write_file(dir / "report.json", render_report(report, ReportFormat::json));
    write_file(dir / "report.md", render_report(report, ReportFormat::markdown));
    write_file(dir / "report.csv", render_report(report, ReportFormat::csv));
    return report;
}

LoadedRun load_run_directory(const fs::path& dir) {
    fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw std::runtime_error("no manifest.json in " + dir.string());
    LoadedRun run;
    try {
        json m = json::parse(read_file(manifest_path));
        run.label = m.value("label", dir.filename().string());
        if (run.label.empty()) run.label = m.value("run_id", dir.filename().string());
        for (const auto& d : m.at("config").at("dimensions")) {
            auto dim = dimension_from_string(d.get<std::string>());
            if (!dim) throw std::runtime_error("unknown dimension in manifest");
            run.dimensions.push_back(*dim);
        }
        for (const auto& e : m.at("records")) {
            RunRecord r;
            r.query_id = e.at("query_id").get<std::string>();
            r.query = e.value("query", std::string{});
            if (!e.at("report_path").is_null()) r.report_path = e["report_path"].get<std::string>();
            if (!e.at("budget").is_null()) r.budget = e["budget"].get<int>();
            r.success = e.at("success").get<bool>();
            r.diagnostics = e.value("diagnostics", json::array()).get<std::vector<Diagnostic>>();
            r.acquisition_attempts = e.value("acquisition_attempts", 0);
            r.elapsed_ms = e.value("elapsed_ms", std::int64_t{0});
            r.document = document_from_json(read_file(dir / e.at("document").get<std::string>()));
            run.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed manifest in " + dir.string() + ": " + e.what());
    }
    return run;
}

std::vector<fs::path> find_run_directories(const fs::path& root) {
    if (fs::exists(root / "manifest.json")) return {root};
    std::vector<fs::path> out;
    if (!fs::is_directory(root)) return out;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

MetricsReport write_ablation_directory(const fs::path& dir, const RunInfo& info,
                                       const std::map<int, std::vector<RunRecord>>& by_budget,
                                       const RunConfig& config) {
    fs::create_directories(dir);
    for (const auto& [budget, records] : by_budget) {
        RunInfo sub{fmt::format("{}-budget-{}", info.run_id, budget), fmt::format("{} ({} tool calls)", info.label, budget),
                    info.started_at};
        RunConfig cfg = config;
        cfg.tool_call_budget = budget;
        write_run_directory(dir / fmt::format("budget-{}", budget), sub, records, cfg);
    }
    MetricsReport report = build_ablation_report(info.label, by_budget, config.dimensions);
    write_file(dir / "ablation.csv", render_ablation_csv(report));
    write_file(dir / "ablation.md", render_ablation_markdown(report));
    write_file(dir / "report.json", render_report(report, ReportFormat::json));
    return report;
}

}  // namespace citecheck
