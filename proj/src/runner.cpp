#include "citecheck/runner.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>
#include <thread>

#include "citecheck/attribution.hpp"

namespace citecheck {

namespace {

// RAII slot on the shared evaluation semaphore.
class Slot {
public:
    explicit Slot(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
    ~Slot() { s_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    std::counting_semaphore<>& s_;
};

std::int64_t ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void validate(const RunConfig& c) {
    if (c.evaluator_concurrency < 1) throw std::invalid_argument("evaluator_concurrency must be at least 1");
    if (c.agent_concurrency < 1) throw std::invalid_argument("agent_concurrency must be at least 1");
    if (c.dimensions.empty()) throw std::invalid_argument("at least one dimension is required");
    std::set<Dimension> seen(c.dimensions.begin(), c.dimensions.end());
    if (seen.size() != c.dimensions.size()) throw std::invalid_argument("dimension listed twice");
    for (int b : c.budgets)
        if (b < 1) throw std::invalid_argument("tool-call budgets must be positive");
    if (c.tool_call_budget && *c.tool_call_budget < 1) throw std::invalid_argument("tool_call_budget must be positive");
    validate(c.fetch_policy);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task,
                  const std::atomic<bool>* cancel) {
    if (n == 0) return;
    std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (;;) {
            if (cancel && cancel->load()) return;
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            task(i);
        }
    };
    if (threads == 1) {
        loop();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(loop);
}

Pipeline::Pipeline(std::shared_ptr<const Fetcher> fetcher, std::shared_ptr<const Evaluator> evaluator,
                   RunConfig config, Sleeper sleeper)
    : fetcher_(std::move(fetcher)),
      evaluator_(std::move(evaluator)),
      config_(std::move(config)),
      sleeper_(std::move(sleeper)),
      slots_(std::max(config_.evaluator_concurrency, 1)) {
    if (!fetcher_ || !evaluator_) throw std::invalid_argument("Pipeline needs a fetcher and an evaluator");
    validate(config_);
}

AttributionDocument Pipeline::run(std::string_view markdown, std::string origin) const {
    AttributionDocument doc = parse_document(markdown, std::move(origin));
    evaluate(doc);
    return doc;
}

void Pipeline::evaluate(AttributionDocument& doc) const {
    // Only citations that take part in a pair need fetching.
    std::set<int> used;
    for (const auto& a : doc.attributions) used.insert(a.citation_ids.begin(), a.citation_ids.end());
    std::vector<Citation*> to_fetch;
    for (auto& c : doc.citations)
        if (used.count(c.id) && !c.fetch_outcome) to_fetch.push_back(&c);

    parallel_for(
        to_fetch.size(), config_.evaluator_concurrency,
        [&](std::size_t i) {
            Citation& c = *to_fetch[i];
            FetchOutcome outcome;
            {
                Slot slot(slots_);
                outcome = fetcher_->fetch(c.url);
            }
            c.url_content = outcome.content;
            c.fetch_outcome = std::move(outcome);
        },
        &cancelled_);

    struct Task {
        const Attribution* attribution;
        const Citation* citation;
        Dimension dimension;
    };
    std::vector<Task> tasks;
    for (const auto& a : doc.attributions)
        for (int cid : a.citation_ids)
            if (const Citation* c = doc.find_citation(cid))
                for (Dimension d : config_.dimensions) tasks.push_back({&a, c, d});

    std::vector<EvalResult> results(tasks.size());
    std::vector<char> done(tasks.size(), 0);
    parallel_for(
        tasks.size(), config_.evaluator_concurrency,
        [&](std::size_t i) {
            const Task& t = tasks[i];
            Slot slot(slots_);
            results[i] = evaluator_->evaluate(t.dimension, *t.attribution, *t.citation);
            done[i] = 1;
        },
        &cancelled_);

    doc.evals.clear();
    for (std::size_t i = 0; i < tasks.size(); ++i)
        if (done[i]) doc.evals.push_back(std::move(results[i]));
    std::sort(doc.evals.begin(), doc.evals.end(), eval_order_less);
    if (doc.evals.size() != tasks.size())
        doc.diagnostics.push_back({"cancelled", "evaluation stopped before all pairs were scored", std::nullopt});
}

RunRecord Pipeline::acquire_and_run(const RunSpec& spec, const AgentAdapter& adapter,
                                    std::optional<int> budget) const {
    auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.query_id = spec.query_id;
    rec.query = spec.query;
    rec.report_path = spec.report_path;
    rec.budget = budget;

    const int max_attempts = 1 + config_.fetch_policy.max_retries;
    std::optional<Report> report;
    for (int attempt = 1; attempt <= max_attempts && !cancelled(); ++attempt) {
        rec.acquisition_attempts = attempt;
        auto got = adapter.acquire(spec, budget);
        if (got) {
            report = std::move(*got);
            break;
        }
        spdlog::warn("report for {} unavailable (attempt {}): {}", spec.query_id, attempt, got.error().message);
        if (attempt == max_attempts) {
            rec.diagnostics.push_back({"generation_failed", got.error().message, std::nullopt});
            break;
        }
        sleeper_(std::chrono::milliseconds(config_.fetch_policy.retry_delay_ms));
    }
    if (!report) {
        if (rec.diagnostics.empty())
            rec.diagnostics.push_back({"cancelled", "batch stopped before this query ran", std::nullopt});
        rec.elapsed_ms = ms_since(t0);
        return rec;
    }
    rec.document = run(report->markdown, report->origin);
    rec.success = !rec.document.attributions.empty();
    rec.elapsed_ms = ms_since(t0);
    return rec;
}

std::vector<RunRecord> Pipeline::run_batch(std::span<const RunSpec> specs, const AgentAdapter& adapter,
                                           std::optional<int> budget) const {
    std::vector<RunRecord> records(specs.size());
    std::vector<char> done(specs.size(), 0);
    parallel_for(
        specs.size(), config_.agent_concurrency,
        [&](std::size_t i) {
            records[i] = acquire_and_run(specs[i], adapter, budget);
            done[i] = 1;
        },
        &cancelled_);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (done[i]) continue;
        records[i].query_id = specs[i].query_id;
        records[i].query = specs[i].query;
        records[i].report_path = specs[i].report_path;
        records[i].budget = budget;
        records[i].diagnostics.push_back({"cancelled", "batch stopped before this query ran", std::nullopt});
    }
    return records;
}

std::map<int, std::vector<RunRecord>> Pipeline::run_ablation(std::span<const RunSpec> specs,
                                                             const AgentAdapter& adapter,
                                                             std::span<const int> budgets) const {
    std::vector<int> order(budgets.begin(), budgets.end());
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    std::map<int, std::vector<RunRecord>> out;
    for (int b : order) {
        spdlog::info("ablation: budget {} ({} queries)", b, specs.size());
        out[b] = run_batch(specs, adapter, b);
    }
    return out;
}

}  // namespace citecheck
