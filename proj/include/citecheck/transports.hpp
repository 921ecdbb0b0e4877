#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "citecheck/fetcher.hpp"

namespace citecheck {

/// libcurl-backed transport: HTTP/1.1 or HTTP/2 over TLS, no cookies.
class CurlTransport final : public HttpTransport {
public:
    CurlTransport();
    HttpResponse get(const HttpRequest& request) const override;
    /// Bodies beyond this many bytes are cut off.
    static constexpr std::size_t kMaxBodyBytes = 16u << 20;
};

/// File name stem used for a URL in a cassette directory.
std::string cassette_key(std::string_view url);

/// Passes requests to `inner` and stores every attempt under `dir`, one
/// JSON index per URL plus one body file per attempt.
class RecordingTransport final : public HttpTransport {
public:
    RecordingTransport(std::shared_ptr<const HttpTransport> inner, std::filesystem::path dir);
    HttpResponse get(const HttpRequest& request) const override;

private:
    std::shared_ptr<const HttpTransport> inner_;
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

/// Serves responses recorded by RecordingTransport. Attempt n gets the n-th
/// recorded response, or the last one when fewer were recorded. Unknown URLs
/// are unreachable.
class ReplayTransport final : public HttpTransport {
public:
    explicit ReplayTransport(std::filesystem::path dir);
    HttpResponse get(const HttpRequest& request) const override;

private:
    std::filesystem::path dir_;
};

}  // namespace citecheck
