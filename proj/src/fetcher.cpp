#include "citecheck/fetcher.hpp"

#include <cctype>
#include <stdexcept>
#include <thread>
#include <utility>

#include "citecheck/html_text.hpp"

namespace citecheck {

void validate(const FetchPolicy& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string(what) + " must be positive");
    };
    if (p.max_retries < 0 || p.retry_delay_ms < 0)
        throw std::invalid_argument("max_retries and retry_delay_ms must not be negative");
    require(p.timeout_ms > 0, "timeout_ms");
    require(p.truncation_limit > 0, "truncation_limit");
    require(p.fact_check_limit() > 0, "fact_check_truncation_limit");
    require(p.max_redirects > 0, "max_redirects");
}

std::string HttpResponse::header(std::string_view name) const {
    std::string key(name);
    for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto it = headers.find(key);
    return it == headers.end() ? std::string{} : it->second;
}

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

FetchCategory classify_status(int status) noexcept {
    if (status >= 200 && status < 300) return FetchCategory::ok;
    if (status == 403) return FetchCategory::blocked;
    if (status == 429) return FetchCategory::rate_limited;
    return FetchCategory::http_error;
}

FetchCategory classify_transport(TransportError error) noexcept {
    return error == TransportError::timeout ? FetchCategory::timeout : FetchCategory::unreachable;
}

bool is_transient(FetchCategory category, std::optional<int> status) noexcept {
    switch (category) {
        case FetchCategory::timeout:
        case FetchCategory::unreachable:
        case FetchCategory::rate_limited:
            return true;
        case FetchCategory::http_error:
            return status && *status >= 500 && *status < 600;
        default:
            return false;
    }
}

std::size_t count_chars(std::string_view text) noexcept {
    std::size_t n = 0;
    for (char c : text)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    return n;
}

std::string truncate_chars(std::string_view text, std::size_t limit) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) continue;
        if (seen == limit) return std::string(text.substr(0, i));
        ++seen;
    }
    return std::string(text);
}

HttpFetcher::HttpFetcher(std::shared_ptr<const HttpTransport> transport, FetchPolicy policy, Sleeper sleeper)
    : transport_(std::move(transport)), policy_(std::move(policy)), sleeper_(std::move(sleeper)) {
    if (!transport_) throw std::invalid_argument("HttpFetcher needs a transport");
    validate(policy_);
}

FetchOutcome HttpFetcher::fetch(const std::string& url) const {
    FetchOutcome out;
    HttpResponse resp;
    const int max_attempts = 1 + policy_.max_retries;
    for (int attempt = 1;; ++attempt) {
        HttpRequest req{url, attempt, policy_.timeout_ms, policy_.max_redirects, policy_.user_agent};
        resp = transport_->get(req);
        out.attempts = attempt;
        out.elapsed_ms += resp.elapsed_ms;
        if (resp.error == TransportError::none) {
            out.category = classify_status(resp.status);
            out.http_status = resp.status;
        } else {
            out.category = classify_transport(resp.error);
            out.http_status.reset();
        }
        if (!is_transient(out.category, out.http_status) || attempt == max_attempts) break;
        sleeper_(std::chrono::milliseconds(policy_.retry_delay_ms));
        out.elapsed_ms += policy_.retry_delay_ms;
    }
    out.final_url = resp.final_url.empty() ? url : resp.final_url;
    out.detail = resp.detail;
    if (out.category == FetchCategory::ok) {
        ExtractedText ex = extract_text(resp.body, resp.header("content-type"));
        out.content = std::move(ex.text);
        out.flags = std::move(ex.flags);
    }
    return out;
}

}  // namespace citecheck
