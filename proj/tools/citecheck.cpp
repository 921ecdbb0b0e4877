// citecheck: parse research reports, check their citations, report metrics.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "citecheck/attribution.hpp"
#include "citecheck/evaluators.hpp"
#include "citecheck/fetcher.hpp"
#include "citecheck/judge.hpp"
#include "citecheck/metrics.hpp"
#include "citecheck/remote_judge.hpp"
#include "citecheck/run_store.hpp"
#include "citecheck/runner.hpp"
#include "citecheck/serialization.hpp"
#include "citecheck/transports.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace citecheck;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitJudgeDown = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything that can come from the config file, a flag, or a default.
struct Settings {
    std::optional<std::string> config_path;
    std::optional<int> evaluator_concurrency;
    std::optional<int> agent_concurrency;
    std::optional<std::string> dims;
    std::optional<std::string> judge;
    std::optional<std::string> judge_endpoint;
    std::optional<std::string> judge_model;
    std::optional<std::string> api_key_env;
    std::optional<int> max_retries;
    std::optional<int> retry_delay_ms;
    std::optional<int> timeout_ms;
    std::optional<std::size_t> truncation_limit;
    std::optional<std::size_t> fact_check_truncation_limit;
    std::optional<std::string> user_agent;
    std::optional<std::string> replay_dir;
    std::optional<std::string> record_dir;
    std::optional<std::string> out;
    std::optional<std::string> label;
    bool judge_debug = false;
};

template <class T>
void fill(std::optional<T>& slot, const json& cfg, const char* key) {
    if (slot || !cfg.contains(key) || cfg[key].is_null()) return;
    slot = cfg[key].get<T>();
}

json load_config(const Settings& s) {
    if (!s.config_path) return json::object();
    try {
        json j = json::parse(read_file(*s.config_path));
        if (!j.is_object()) throw UsageError("config file must hold a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw UsageError(fmt::format("bad config file {}: {}", *s.config_path, e.what()));
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const UsageError*>(&e)) throw;
        throw UsageError(e.what());
    }
}

// Flags win over the config file; unset values keep the built-in defaults.
void merge_config(Settings& s) {
    json cfg = load_config(s);
    try {
        fill(s.evaluator_concurrency, cfg, "evaluator_concurrency");
        fill(s.agent_concurrency, cfg, "agent_concurrency");
        if (!s.dims && cfg.contains("dimensions")) {
            if (cfg["dimensions"].is_array()) {
                std::string joined;
                for (const auto& d : cfg["dimensions"]) joined += (joined.empty() ? "" : ",") + d.get<std::string>();
                s.dims = joined;
            } else {
                s.dims = cfg["dimensions"].get<std::string>();
            }
        }
        fill(s.judge, cfg, "judge");
        fill(s.judge_endpoint, cfg, "judge_endpoint");
        fill(s.judge_model, cfg, "judge_model");
        fill(s.api_key_env, cfg, "api_key_env");
        fill(s.replay_dir, cfg, "replay_dir");
        fill(s.record_dir, cfg, "record_dir");
        const json fetch = cfg.value("fetch_policy", json::object());
        fill(s.max_retries, fetch, "max_retries");
        fill(s.retry_delay_ms, fetch, "retry_delay_ms");
        fill(s.timeout_ms, fetch, "timeout_ms");
        fill(s.truncation_limit, fetch, "truncation_limit");
        fill(s.fact_check_truncation_limit, fetch, "fact_check_truncation_limit");
        fill(s.user_agent, fetch, "user_agent");
        if (cfg.contains("api_key")) spdlog::warn("ignoring api_key in config file; set it through the environment");
    } catch (const json::exception& e) {
        throw UsageError(fmt::format("bad value in config file: {}", e.what()));
    }
}

std::vector<Dimension> parse_dims(const std::string& list) {
    std::vector<Dimension> out;
    std::string item;
    auto flush = [&] {
        if (item.empty()) throw UsageError("empty entry in --dims");
        if (item == "all") {
            out.assign(std::begin(kAllDimensions), std::end(kAllDimensions));
        } else {
            auto d = dimension_from_string(item);
            if (!d) throw UsageError("unknown dimension '" + item + "'");
            if (std::find(out.begin(), out.end(), *d) == out.end()) out.push_back(*d);
        }
        item.clear();
    };
    for (char c : list) {
        if (c == ',') {
            flush();
        } else if (c != ' ') {
            item.push_back(c);
        }
    }
    flush();
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> parse_budgets(const std::string& list) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        std::size_t comma = std::min(list.find(',', pos), list.size());
        std::string item = list.substr(pos, comma - pos);
        item.erase(std::remove(item.begin(), item.end(), ' '), item.end());
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size() || v < 1) throw UsageError("malformed budget list '" + list + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RunConfig make_run_config(const Settings& s) {
    RunConfig c;
    if (s.evaluator_concurrency) c.evaluator_concurrency = *s.evaluator_concurrency;
    if (s.agent_concurrency) c.agent_concurrency = *s.agent_concurrency;
    if (s.dims) c.dimensions = parse_dims(*s.dims);
    if (s.judge) c.judge = *s.judge;
    FetchPolicy& p = c.fetch_policy;
    if (s.max_retries) p.max_retries = *s.max_retries;
    if (s.retry_delay_ms) p.retry_delay_ms = *s.retry_delay_ms;
    if (s.timeout_ms) p.timeout_ms = *s.timeout_ms;
    if (s.truncation_limit) p.truncation_limit = *s.truncation_limit;
    if (s.fact_check_truncation_limit) p.fact_check_truncation_limit = *s.fact_check_truncation_limit;
    if (s.user_agent) p.user_agent = *s.user_agent;
    c.judge_retry.transport_retries = p.max_retries;
    c.judge_retry.retry_delay_ms = p.retry_delay_ms;
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

std::shared_ptr<const JudgeBackend> make_judge(const Settings& s, const RunConfig& c) {
    const std::string& name = c.judge;
    if (name == "heuristic") return std::make_shared<HeuristicJudge>();
    if (name.rfind("scripted:", 0) == 0) {
        try {
            return std::make_shared<ScriptedJudge>(ScriptedJudge::from_file(name.substr(9)));
        } catch (const std::exception& e) {
            throw UsageError(fmt::format("cannot load scripted judge: {}", e.what()));
        }
    }
    if (name == "remote") {
        RemoteJudgeConfig rc;
        rc.endpoint = s.judge_endpoint.value_or("");
        rc.model = s.judge_model.value_or("");
        std::string env = s.api_key_env.value_or("CITECHECK_JUDGE_API_KEY");
        if (const char* key = std::getenv(env.c_str())) rc.api_key = key;
        rc.debug = s.judge_debug;
        if (rc.endpoint.empty() || rc.model.empty())
            throw UsageError("remote judge needs --judge-endpoint and --judge-model");
        if (rc.api_key.empty()) spdlog::warn("{} is not set; calling the judge without a key", env);
        return std::make_shared<RemoteJudge>(rc);
    }
    throw UsageError("unknown judge '" + name + "' (use heuristic, scripted:<file> or remote)");
}

std::shared_ptr<const HttpTransport> make_transport(const Settings& s) {
    std::shared_ptr<const HttpTransport> t;
    if (s.replay_dir) {
        try {
            t = std::make_shared<ReplayTransport>(*s.replay_dir);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    } else {
        t = std::make_shared<CurlTransport>();
    }
    if (s.record_dir) t = std::make_shared<RecordingTransport>(t, *s.record_dir);
    return t;
}

// Replayed runs need no real waiting between retries.
Sleeper make_sleeper(const Settings& s) {
    if (s.replay_dir) return [](std::chrono::milliseconds) {};
    return real_sleeper();
}

Pipeline make_pipeline(const Settings& s, const RunConfig& c) {
    Sleeper sleeper = make_sleeper(s);
    auto fetcher = std::make_shared<HttpFetcher>(make_transport(s), c.fetch_policy, sleeper);
    auto evaluator = std::make_shared<Evaluator>(make_judge(s, c), c.fetch_policy, c.judge_retry, sleeper);
    return Pipeline(fetcher, evaluator, c, sleeper);
}

std::string default_run_id(const Settings& s) {
    if (s.label) {
        std::string name = document_file_name(*s.label);
        return name.substr(0, name.size() - std::string_view(".document.json").size());
    }
    std::string ts = utc_timestamp();
    std::string id = "run-";
    for (char ch : ts)
        if (std::isdigit(static_cast<unsigned char>(ch))) id.push_back(ch);
    return id;
}

// 3 when every judge call of the run failed at the transport level.
int judge_exit_code(std::span<const RunRecord> records) {
    std::size_t judged = 0, unavailable = 0;
    for (const auto& r : records)
        for (const auto& e : r.document.evals)
            if (e.judge_attempts > 0) {
                ++judged;
                if (e.has_flag(EvalFlag::judge_unavailable)) ++unavailable;
            }
    if (judged > 0 && judged == unavailable) {
        spdlog::error("judge backend unreachable for all {} evaluations", judged);
        return kExitJudgeDown;
    }
    return kExitOk;
}

void print_summary(const MetricsReport& m) {
    std::cout << render_report(m, ReportFormat::markdown);
    fmt::print("{} queries, {} pairs\n", m.n_queries, m.n_pairs);
}

int cmd_parse(const std::string& input, const std::optional<std::string>& out) {
    std::string raw;
    try {
        raw = read_file(input);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    }
    AttributionDocument doc = parse_document(raw, input);
    std::string body = document_to_json(doc);
    if (out) {
        write_file(*out, body);
    } else {
        std::cout << body;
    }
    auto& stream = out ? std::cout : std::cerr;
    stream << fmt::format("{} citations, {} attributions, {} pairs\n", doc.citations.size(), doc.attributions.size(),
                          doc.pairs().size());
    return kExitOk;
}

int cmd_evaluate(const Settings& s, const std::vector<std::string>& docs, const std::optional<std::string>& manifest,
                 const std::optional<std::string>& reports_dir) {
    if (docs.empty() == !manifest) throw UsageError("give either --doc or --manifest");
    RunConfig config = make_run_config(s);
    Pipeline pipeline = make_pipeline(s, config);
    RunInfo info{default_run_id(s), s.label.value_or(""), utc_timestamp()};
    if (info.label.empty()) info.label = info.run_id;

    std::vector<RunRecord> records;
    if (manifest) {
        std::vector<RunSpec> specs;
        try {
            specs = load_run_specs(*manifest);
        } catch (const std::exception& e) {
            throw UsageError(fmt::format("cannot read manifest: {}", e.what()));
        }
        if (specs.empty()) throw UsageError("manifest lists no queries");
        fs::path base = reports_dir ? fs::path(*reports_dir) : fs::path(*manifest).parent_path();
        FileReportAdapter adapter(base);
        records = pipeline.run_batch(specs, adapter, config.tool_call_budget);
    } else {
        for (const std::string& path : docs) {
            RunRecord r;
            r.query_id = fs::path(path).filename().string();
            if (auto pos = r.query_id.find(".document.json"); pos != std::string::npos) r.query_id.resize(pos);
            try {
                r.document = document_from_json(read_file(path));
            } catch (const std::exception& e) {
                throw UsageError(fmt::format("cannot load {}: {}", path, e.what()));
            }
            r.report_path = path;
            pipeline.evaluate(r.document);
            r.success = !r.document.attributions.empty();
            records.push_back(std::move(r));
        }
    }
    fs::path out = s.out ? fs::path(*s.out) : fs::path("runs") / info.run_id;
    MetricsReport report = write_run_directory(out, info, records, config);
    print_summary(report);
    fmt::print("wrote {}\n", out.string());
    return judge_exit_code(records);
}

int cmd_report(const std::string& runs, const std::string& format, const std::optional<std::string>& out) {
    auto fmt_kind = report_format_from_string(format);
    if (!fmt_kind) throw UsageError("unknown format '" + format + "' (json, markdown or csv)");
    auto dirs = find_run_directories(runs);
    if (dirs.empty()) throw UsageError("no run directories under " + runs);
    std::vector<MetricsReport> reports;
    for (const auto& dir : dirs) {
        try {
            LoadedRun run = load_run_directory(dir);
            reports.push_back(build_report(run.label, run.records, run.dimensions));
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    sort_by_relevance(reports);
    std::string body = render_reports(reports, *fmt_kind);
    if (out)
        write_file(*out, body);
    else
        std::cout << body;
    return kExitOk;
}

int cmd_ablate(const Settings& s, const std::string& queries, const std::string& agent_cmd,
               const std::optional<std::string>& budgets, std::optional<int> agent_timeout_ms) {
    RunConfig config = make_run_config(s);
    if (budgets) config.budgets = parse_budgets(*budgets);
    std::vector<RunSpec> specs;
    try {
        specs = load_run_specs(queries);
    } catch (const std::exception& e) {
        throw UsageError(fmt::format("cannot read queries: {}", e.what()));
    }
    if (specs.empty()) throw UsageError("query manifest is empty");
    std::unique_ptr<CommandAgentAdapter> adapter;
    try {
        adapter = std::make_unique<CommandAgentAdapter>(agent_cmd, agent_timeout_ms.value_or(0));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    Pipeline pipeline = make_pipeline(s, config);
    RunInfo info{default_run_id(s), s.label.value_or(""), utc_timestamp()};
    if (info.label.empty()) info.label = info.run_id;
    auto by_budget = pipeline.run_ablation(specs, *adapter, config.budgets);
    fs::path out = s.out ? fs::path(*s.out) : fs::path("runs") / info.run_id;
    MetricsReport report = write_ablation_directory(out, info, by_budget, config);
    std::cout << render_ablation_markdown(report);
    fmt::print("wrote {}\n", out.string());
    std::vector<RunRecord> all;
    for (const auto& [b, recs] : by_budget) all.insert(all.end(), recs.begin(), recs.end());
    return judge_exit_code(all);
}

void add_run_options(CLI::App* cmd, Settings& s) {
    cmd->add_option("--config", s.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--dims", s.dims, "Dimensions: link, relevant, fact or all (comma separated)");
    cmd->add_option("--judge", s.judge, "heuristic, scripted:<file> or remote");
    cmd->add_option("--judge-endpoint", s.judge_endpoint, "Chat-completions URL for the remote judge");
    cmd->add_option("--judge-model", s.judge_model, "Model name for the remote judge");
    cmd->add_option("--api-key-env", s.api_key_env, "Environment variable holding the judge API key");
    cmd->add_flag("--judge-debug", s.judge_debug, "Log judge requests and responses (key redacted)");
    cmd->add_option("--evaluator-concurrency", s.evaluator_concurrency, "Concurrent fetches and evaluations");
    cmd->add_option("--agent-concurrency", s.agent_concurrency, "Concurrent report acquisitions");
    cmd->add_option("--max-retries", s.max_retries, "Retries per external call");
    cmd->add_option("--retry-delay-ms", s.retry_delay_ms, "Delay between retries");
    cmd->add_option("--timeout-ms", s.timeout_ms, "Per-request timeout");
    cmd->add_option("--truncation-limit", s.truncation_limit, "Source characters shown to the judge");
    cmd->add_option("--fact-check-truncation-limit", s.fact_check_truncation_limit,
                    "Source characters for fact checking");
    cmd->add_option("--user-agent", s.user_agent, "User-Agent header for fetches");
    cmd->add_option("--replay", s.replay_dir, "Serve fetches from a recorded cache directory");
    cmd->add_option("--record", s.record_dir, "Record fetches into a cache directory");
    cmd->add_option("--out", s.out, "Output run directory");
    cmd->add_option("--label", s.label, "Run label used in reports");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extract citation-claim pairs from Markdown reports and check them against their sources."};
    app.require_subcommand(1);
    std::optional<std::string> workdir;
    int verbosity = 0;
    bool quiet = false;
    app.add_option("--workdir", workdir, "Resolve relative paths against this directory");
    app.add_flag("-v,--verbose", verbosity, "More logging (repeat for debug)");
    app.add_flag("-q,--quiet", quiet, "Only log errors");

    Settings settings;

    auto* parse = app.add_subcommand("parse", "Parse a Markdown report into a document JSON");
    std::string parse_input;
    std::optional<std::string> parse_out;
    parse->add_option("input", parse_input, "Markdown report")->required();
    parse->add_option("--out", parse_out, "Where to write the document JSON (default: stdout)");

    auto* evaluate = app.add_subcommand("evaluate", "Fetch sources and score every citation-claim pair");
    std::vector<std::string> eval_docs;
    std::optional<std::string> eval_manifest, eval_reports;
    evaluate->add_option("--doc", eval_docs, "Parsed document JSON (repeatable)");
    evaluate->add_option("--manifest", eval_manifest, "Batch manifest of queries with reports");
    evaluate->add_option("--reports", eval_reports, "Directory holding <query_id>.md reports");
    add_run_options(evaluate, settings);

    auto* report = app.add_subcommand("report", "Aggregate run directories into one table");
    std::string report_runs, report_format = "markdown";
    std::optional<std::string> report_out;
    report->add_option("--runs", report_runs, "A run directory or a directory of runs")->required();
    report->add_option("--format", report_format, "json, markdown or csv");
    report->add_option("--out", report_out, "Output file (default: stdout)");

    auto* ablate = app.add_subcommand("ablate", "Score reports generated at several tool-call budgets");
    std::string ablate_queries, ablate_cmd;
    std::optional<std::string> ablate_budgets;
    std::optional<int> ablate_timeout;
    ablate->add_option("--queries", ablate_queries, "Query manifest")->required();
    ablate->add_option("--agent-cmd", ablate_cmd, "Agent command; {query}, {query_id} and {budget} are substituted")
        ->required();
    ablate->add_option("--budgets", ablate_budgets, "Comma-separated budgets (default 2,10,30,50,70,100,150)");
    ablate->add_option("--agent-timeout-ms", ablate_timeout, "Kill the agent after this long");
    add_run_options(ablate, settings);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    auto logger = spdlog::stderr_color_mt("citecheck");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("%^%l%$: %v");
    spdlog::set_level(quiet ? spdlog::level::err
                      : verbosity >= 2 || settings.judge_debug ? spdlog::level::debug
                      : verbosity == 1                         ? spdlog::level::info
                                                               : spdlog::level::warn);

    try {
        if (workdir) fs::current_path(*workdir);
        if (*parse) return cmd_parse(parse_input, parse_out);
        merge_config(settings);
        if (*evaluate) return cmd_evaluate(settings, eval_docs, eval_manifest, eval_reports);
        if (*report) return cmd_report(report_runs, report_format, report_out);
        if (*ablate) return cmd_ablate(settings, ablate_queries, ablate_cmd, ablate_budgets, ablate_timeout);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return kExitUsage;
}
