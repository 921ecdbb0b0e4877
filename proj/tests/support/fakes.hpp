#pragma once

// Test doubles shared by the unit and acceptance suites.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "citecheck/fetcher.hpp"
#include "citecheck/judge.hpp"

namespace citecheck::testing {

// Tracks how many callers are inside a section at once.
class PeakCounter {
public:
    void enter() {
        int now = ++current_;
        int seen = peak_.load();
        while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
        }
    }
    void leave() { --current_; }
    int peak() const { return peak_.load(); }

private:
    std::atomic<int> current_{0};
    std::atomic<int> peak_{0};
};

// Per-URL scripted responses; attempt n gets the n-th, the last one repeats.
// Unknown URLs answer 404.
class ScriptedTransport final : public HttpTransport {
public:
    void script(const std::string& url, std::vector<HttpResponse> responses) { by_url_[url] = std::move(responses); }

    HttpResponse get(const HttpRequest& req) const override {
        {
            std::lock_guard lock(mu_);
            requests_.push_back(req);
        }
        auto it = by_url_.find(req.url);
        if (it == by_url_.end() || it->second.empty()) {
            HttpResponse r;
            r.status = 404;
            return r;
        }
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(req.attempt - 1), it->second.size() - 1);
        return it->second[i];
    }

    std::vector<HttpRequest> requests() const {
        std::lock_guard lock(mu_);
        return requests_;
    }

private:
    std::map<std::string, std::vector<HttpResponse>> by_url_;
    mutable std::mutex mu_;
    mutable std::vector<HttpRequest> requests_;
};

inline HttpResponse status_response(int status, std::string body = "<p>hello</p>",
                                    std::string content_type = "text/html") {
    HttpResponse r;
    r.status = status;
    r.body = std::move(body);
    r.headers["content-type"] = std::move(content_type);
    return r;
}

inline HttpResponse error_response(TransportError e, std::int64_t elapsed_ms = 0) {
    HttpResponse r;
    r.error = e;
    r.elapsed_ms = elapsed_ms;
    return r;
}

// Fixed outcomes per URL, counting calls and concurrency.
class FakeFetcher final : public Fetcher {
public:
    void set(const std::string& url, FetchOutcome o) { outcomes_[url] = std::move(o); }
    void set_ok(const std::string& url, std::string text) {
        FetchOutcome o;
        o.category = FetchCategory::ok;
        o.http_status = 200;
        o.content = std::move(text);
        o.final_url = url;
        set(url, std::move(o));
    }
    void set_status(const std::string& url, int status) {
        FetchOutcome o;
        o.category = classify_status(status);
        o.http_status = status;
        o.final_url = url;
        set(url, std::move(o));
    }
    void set_delay(std::chrono::microseconds d) { delay_ = d; }
    void set_peak(PeakCounter* p) { peak_ = p; }

    FetchOutcome fetch(const std::string& url) const override {
        if (peak_) peak_->enter();
        if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
        {
            std::lock_guard lock(mu_);
            ++calls_[url];
        }
        if (peak_) peak_->leave();
        auto it = outcomes_.find(url);
        if (it != outcomes_.end()) return it->second;
        FetchOutcome o;
        o.category = FetchCategory::unreachable;
        o.final_url = url;
        return o;
    }

    int calls(const std::string& url) const {
        std::lock_guard lock(mu_);
        auto it = calls_.find(url);
        return it == calls_.end() ? 0 : it->second;
    }
    int total_calls() const {
        std::lock_guard lock(mu_);
        int n = 0;
        for (const auto& [u, c] : calls_) n += c;
        return n;
    }

private:
    std::map<std::string, FetchOutcome> outcomes_;
    std::chrono::microseconds delay_{0};
    PeakCounter* peak_ = nullptr;
    mutable std::mutex mu_;
    mutable std::map<std::string, int> calls_;
};

// Wraps a backend to count calls and concurrency, optionally failing the
// first `failures` calls at the transport level.
class ProbeJudge final : public JudgeBackend {
public:
    explicit ProbeJudge(std::shared_ptr<const JudgeBackend> inner, int failures = 0)
        : inner_(std::move(inner)), failures_(failures) {}

    std::string complete(const std::string& prompt) const override {
        int n = calls_++;
        if (peak_) peak_->enter();
        if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
        if (peak_) peak_->leave();
        if (n < failures_) throw JudgeTransportError("injected failure");
        {
            std::lock_guard lock(mu_);
            prompts_.push_back(prompt);
        }
        return inner_->complete(prompt);
    }

    void set_delay(std::chrono::microseconds d) { delay_ = d; }
    void set_peak(PeakCounter* p) { peak_ = p; }
    int calls() const { return calls_.load(); }
    std::vector<std::string> prompts() const {
        std::lock_guard lock(mu_);
        return prompts_;
    }

private:
    std::shared_ptr<const JudgeBackend> inner_;
    int failures_;
    std::chrono::microseconds delay_{0};
    PeakCounter* peak_ = nullptr;
    mutable std::atomic<int> calls_{0};
    mutable std::mutex mu_;
    mutable std::vector<std::string> prompts_;
};

// Records requested delays instead of sleeping.
struct VirtualClock {
    std::shared_ptr<std::vector<std::int64_t>> delays = std::make_shared<std::vector<std::int64_t>>();
    std::shared_ptr<std::mutex> mu = std::make_shared<std::mutex>();

    Sleeper sleeper() const {
        auto d = delays;
        auto m = mu;
        return [d, m](std::chrono::milliseconds ms) {
            std::lock_guard lock(*m);
            d->push_back(ms.count());
        };
    }
    std::int64_t total() const {
        std::lock_guard lock(*mu);
        std::int64_t t = 0;
        for (auto v : *delays) t += v;
        return t;
    }
    std::size_t count() const {
        std::lock_guard lock(*mu);
        return delays->size();
    }
};

inline Sleeper no_sleep() {
    return [](std::chrono::milliseconds) {};
}

}  // namespace citecheck::testing
