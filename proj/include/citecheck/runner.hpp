#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include "citecheck/agent.hpp"
#include "citecheck/evaluators.hpp"
#include "citecheck/fetcher.hpp"
#include "citecheck/types.hpp"

namespace citecheck {

inline constexpr std::array<int, 7> kDefaultBudgets = {2, 10, 30, 50, 70, 100, 150};

struct RunConfig {
    int evaluator_concurrency = 15;
    int agent_concurrency = 10;
    FetchPolicy fetch_policy;
    JudgeRetryPolicy judge_retry;
    std::vector<Dimension> dimensions{std::begin(kAllDimensions), std::end(kAllDimensions)};
    /// "heuristic", "scripted:<path>" or "remote".
    std::string judge = "heuristic";
    std::optional<int> tool_call_budget;
    std::vector<int> budgets{kDefaultBudgets.begin(), kDefaultBudgets.end()};
};

/// Throws std::invalid_argument on non-positive concurrency, an empty or
/// duplicated dimension list, or a bad fetch policy.
void validate(const RunConfig& config);

struct RunRecord {
    std::string query_id;
    std::string query;
    std::optional<std::string> report_path;
    std::optional<int> budget;
    AttributionDocument document;
    /// True iff the document has at least one attribution.
    bool success = false;
    std::vector<Diagnostic> diagnostics;
    int acquisition_attempts = 0;
    std::int64_t elapsed_ms = 0;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Runs `n` tasks on up to `workers` threads. Tasks are handed out in
/// index order; once `cancel` is set no new task starts.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task,
                  const std::atomic<bool>* cancel = nullptr);

/// Parse, fetch and evaluate. Every fetch and every evaluation holds one of
/// evaluator_concurrency shared slots, so the bound holds across a whole
/// batch; report acquisition has its own pool of agent_concurrency.
class Pipeline {
public:
    Pipeline(std::shared_ptr<const Fetcher> fetcher, std::shared_ptr<const Evaluator> evaluator, RunConfig config,
             Sleeper sleeper = real_sleeper());

    /// Parses and evaluates one report.
    AttributionDocument run(std::string_view markdown, std::string origin = {}) const;
    /// Fetches each citation once and fills doc.evals, sorted.
    void evaluate(AttributionDocument& doc) const;

    /// One record per spec, in spec order.
    std::vector<RunRecord> run_batch(std::span<const RunSpec> specs, const AgentAdapter& adapter,
                                     std::optional<int> budget = std::nullopt) const;
    /// Budgets run one after another.
    std::map<int, std::vector<RunRecord>> run_ablation(std::span<const RunSpec> specs, const AgentAdapter& adapter,
                                                       std::span<const int> budgets) const;

    /// Stops dispatching new work; running tasks finish.
    void cancel() noexcept { cancelled_.store(true); }
    bool cancelled() const noexcept { return cancelled_.load(); }
    const RunConfig& config() const noexcept { return config_; }

private:
    RunRecord acquire_and_run(const RunSpec& spec, const AgentAdapter& adapter, std::optional<int> budget) const;

    std::shared_ptr<const Fetcher> fetcher_;
    std::shared_ptr<const Evaluator> evaluator_;
    RunConfig config_;
    Sleeper sleeper_;
    mutable std::counting_semaphore<> slots_;
    std::atomic<bool> cancelled_{false};
};

}  // namespace citecheck
