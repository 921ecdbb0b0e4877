#pragma once

#include <memory>

#include "citecheck/fetcher.hpp"
#include "citecheck/judge.hpp"
#include "citecheck/types.hpp"

namespace citecheck {

struct JudgeRetryPolicy {
    /// Extra judge calls after an unparseable answer.
    int parse_retries = 3;
    /// Extra judge calls after a transport failure.
    int transport_retries = 5;
    int retry_delay_ms = 5000;
};

/// Pure function of the fetch outcome: 1 iff the fetch succeeded with
/// non-empty content.
EvalResult eval_link_works(int attribution_id, const Citation& citation);

/// Scores attribution/citation pairs. Immutable after construction and safe
/// to share between threads as long as the backend is.
class Evaluator {
public:
    Evaluator(std::shared_ptr<const JudgeBackend> backend, FetchPolicy fetch_policy,
              JudgeRetryPolicy retry = {}, Sleeper sleeper = real_sleeper());

    EvalResult link_works(const Attribution& a, const Citation& c) const;
    EvalResult relevant_content(const Attribution& a, const Citation& c) const;
    EvalResult fact_check(const Attribution& a, const Citation& c) const;
    EvalResult evaluate(Dimension d, const Attribution& a, const Citation& c) const;

private:
    EvalResult judged(Dimension d, const Attribution& a, const Citation& c) const;

    std::shared_ptr<const JudgeBackend> backend_;
    FetchPolicy fetch_policy_;
    JudgeRetryPolicy retry_;
    Sleeper sleeper_;
};

}  // namespace citecheck
