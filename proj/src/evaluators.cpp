#include "citecheck/evaluators.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

namespace citecheck {

namespace {

EvalResult base_result(Dimension d, int attribution_id, const Citation& c) {
    EvalResult r;
    r.attribution_id = attribution_id;
    r.citation_id = c.id;
    r.dimension = d;
    if (c.fetch_outcome) {
        r.fetch_category = c.fetch_outcome->category;
        r.http_status = c.fetch_outcome->http_status;
    }
    return r;
}

bool fetched_ok(const Citation& c) {
    return c.fetch_outcome && c.fetch_outcome->category == FetchCategory::ok;
}

const std::string& fetched_text(const Citation& c) {
    static const std::string empty;
    if (c.url_content) return *c.url_content;
    if (c.fetch_outcome && c.fetch_outcome->content) return *c.fetch_outcome->content;
    return empty;
}

}  // namespace

EvalResult eval_link_works(int attribution_id, const Citation& c) {
    EvalResult r = base_result(Dimension::link_works, attribution_id, c);
    bool ok = fetched_ok(c) && !fetched_text(c).empty();
    r.score = ok ? 1 : 0;
    if (c.fetch_outcome && c.fetch_outcome->category == FetchCategory::rate_limited)
        r.flags.insert(EvalFlag::rate_limited_source);
    if (!fetched_ok(c)) r.flags.insert(EvalFlag::fetch_failed);
    return r;
}

Evaluator::Evaluator(std::shared_ptr<const JudgeBackend> backend, FetchPolicy fetch_policy,
                     JudgeRetryPolicy retry, Sleeper sleeper)
    : backend_(std::move(backend)),
      fetch_policy_(std::move(fetch_policy)),
      retry_(retry),
      sleeper_(std::move(sleeper)) {
    if (!backend_) throw std::invalid_argument("Evaluator needs a judge backend");
}

EvalResult Evaluator::link_works(const Attribution& a, const Citation& c) const {
    return eval_link_works(a.id, c);
}

EvalResult Evaluator::relevant_content(const Attribution& a, const Citation& c) const {
    return judged(Dimension::relevant_content, a, c);
}

EvalResult Evaluator::fact_check(const Attribution& a, const Citation& c) const {
    return judged(Dimension::fact_check, a, c);
}

EvalResult Evaluator::evaluate(Dimension d, const Attribution& a, const Citation& c) const {
    return d == Dimension::link_works ? link_works(a, c) : judged(d, a, c);
}

EvalResult Evaluator::judged(Dimension d, const Attribution& a, const Citation& c) const {
    EvalResult r = base_result(d, a.id, c);
    if (!fetched_ok(c)) {
        // Without source text there is nothing to judge.
        r.flags.insert(EvalFlag::fetch_failed);
        if (c.fetch_outcome && c.fetch_outcome->category == FetchCategory::rate_limited)
            r.flags.insert(EvalFlag::rate_limited_source);
        return r;
    }

    const bool relevance = d == Dimension::relevant_content;
    std::string source = truncate_chars(fetched_text(c), relevance ? fetch_policy_.truncation_limit
                                                                   : fetch_policy_.fact_check_limit());
    const std::string prompt = relevance ? build_relevance_prompt(a.text_nocite, source)
                                         : build_factcheck_prompt(a.text_nocite, source);

    std::string current = prompt;
    for (int parse_try = 0; parse_try <= retry_.parse_retries; ++parse_try) {
        std::string raw;
        bool reached = false;
        for (int t = 0; t <= retry_.transport_retries; ++t) {
            ++r.judge_attempts;
            try {
                raw = backend_->complete(current);
                reached = true;
                break;
            } catch (const JudgeTransportError& e) {
                spdlog::warn("judge call failed (attribution {}, citation {}): {}", a.id, c.id, e.what());
                if (t < retry_.transport_retries) sleeper_(std::chrono::milliseconds(retry_.retry_delay_ms));
            }
        }
        if (!reached) {
            r.flags.insert(EvalFlag::judge_unavailable);
            r.explanation = "judge unavailable";
            return r;
        }
        auto verdict = parse_judge_output(raw);
        if (verdict) {
            r.score = verdict->score;
            r.explanation = verdict->explanation;
            return r;
        }
        r.flags.insert(EvalFlag::judge_parse_retry);
        current = prompt + std::string(kGrammarReminder);
    }
    r.explanation = "judge output could not be parsed";
    return r;
}

}  // namespace citecheck
