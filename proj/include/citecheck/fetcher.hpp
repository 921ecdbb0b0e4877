#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "citecheck/types.hpp"

namespace citecheck {

struct FetchPolicy {
    /// Retries after the first attempt, so at most 1 + max_retries requests.
    int max_retries = 5;
    int retry_delay_ms = 5000;
    int timeout_ms = 30000;
    /// Characters (code points) of source text handed to the judge.
    std::size_t truncation_limit = 5000;
    /// Separate limit for fact checking; falls back to truncation_limit.
    std::optional<std::size_t> fact_check_truncation_limit;
    std::string user_agent = "citecheck/1.0 (+source attribution checker)";
    int max_redirects = 10;

    std::size_t fact_check_limit() const noexcept {
        return fact_check_truncation_limit.value_or(truncation_limit);
    }
};

/// Throws std::invalid_argument when a numeric field is out of range. Retries
/// and retry delay may be zero.
void validate(const FetchPolicy& policy);

enum class TransportError { none, timeout, unreachable };

struct HttpRequest {
    std::string url;
    int attempt = 1;
    int timeout_ms = 30000;
    int max_redirects = 10;
    std::string user_agent;
};

struct HttpResponse {
    TransportError error = TransportError::none;
    int status = 0;
    /// Header names lowercased; last value wins.
    std::map<std::string, std::string> headers;
    std::string body;
    std::string final_url;
    std::int64_t elapsed_ms = 0;
    std::string detail;

    std::string header(std::string_view name) const;
};

/// One HTTP GET with redirects handled inside. Implementations must be safe
/// to call from several threads at once.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const HttpRequest& request) const = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

FetchCategory classify_status(int status) noexcept;
FetchCategory classify_transport(TransportError error) noexcept;
/// Timeouts, unreachable hosts, 429 and 5xx are worth another attempt.
bool is_transient(FetchCategory category, std::optional<int> status) noexcept;

/// First `limit` code points of `text`. Never splits a UTF-8 sequence.
std::string truncate_chars(std::string_view text, std::size_t limit);
std::size_t count_chars(std::string_view text) noexcept;

/// Source retrieval as seen by the runner. Failures are values, not exceptions.
class Fetcher {
public:
    virtual ~Fetcher() = default;
    virtual FetchOutcome fetch(const std::string& url) const = 0;
};

class HttpFetcher final : public Fetcher {
public:
    HttpFetcher(std::shared_ptr<const HttpTransport> transport, FetchPolicy policy,
                Sleeper sleeper = real_sleeper());

    FetchOutcome fetch(const std::string& url) const override;
    const FetchPolicy& policy() const noexcept { return policy_; }

private:
    std::shared_ptr<const HttpTransport> transport_;
    FetchPolicy policy_;
    Sleeper sleeper_;
};

}  // namespace citecheck
