#include <curl/curl.h>

#include <cctype>
#include <chrono>
#include <mutex>

#include "citecheck/transports.hpp"

namespace citecheck {

namespace {

struct Sink {
    HttpResponse* resp;
    bool overflow = false;
};

std::size_t on_body(char* data, std::size_t size, std::size_t n, void* user) {
    auto* sink = static_cast<Sink*>(user);
    std::size_t len = size * n;
    std::string& body = sink->resp->body;
    if (body.size() + len > CurlTransport::kMaxBodyBytes) {
        body.append(data, CurlTransport::kMaxBodyBytes - body.size());
        sink->overflow = true;
        return 0;  // aborts the transfer; what we have is kept
    }
    body.append(data, len);
    return len;
}

// Called once per header line, for every response in a redirect chain.
std::size_t on_header(char* data, std::size_t size, std::size_t n, void* user) {
    auto* resp = static_cast<HttpResponse*>(user);
    std::size_t len = size * n;
    std::string_view line(data, len);
    if (line.rfind("HTTP/", 0) == 0) {
        resp->headers.clear();
        return len;
    }
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) return len;
    std::string key(line.substr(0, colon));
    for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string_view value = line.substr(colon + 1);
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.remove_prefix(1);
    while (!value.empty() && (value.back() == '\r' || value.back() == '\n' || value.back() == ' '))
        value.remove_suffix(1);
    resp->headers[key] = std::string(value);
    return len;
}

TransportError map_error(CURLcode code) {
    switch (code) {
        case CURLE_OPERATION_TIMEDOUT:
            return TransportError::timeout;
        default:
            return TransportError::unreachable;
    }
}

}  // namespace

CurlTransport::CurlTransport() {
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

HttpResponse CurlTransport::get(const HttpRequest& req) const {
    HttpResponse resp;
    resp.final_url = req.url;
    CURL* h = curl_easy_init();
    if (!h) {
        resp.error = TransportError::unreachable;
        resp.detail = "curl_easy_init failed";
        return resp;
    }
    Sink sink{&resp};
    char errbuf[CURL_ERROR_SIZE] = {0};
    curl_easy_setopt(h, CURLOPT_URL, req.url.c_str());
    curl_easy_setopt(h, CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(h, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(h, CURLOPT_MAXREDIRS, static_cast<long>(req.max_redirects));
    curl_easy_setopt(h, CURLOPT_PROTOCOLS, static_cast<long>(CURLPROTO_HTTP | CURLPROTO_HTTPS));
    curl_easy_setopt(h, CURLOPT_REDIR_PROTOCOLS, static_cast<long>(CURLPROTO_HTTP | CURLPROTO_HTTPS));
    curl_easy_setopt(h, CURLOPT_TIMEOUT_MS, static_cast<long>(req.timeout_ms));
    curl_easy_setopt(h, CURLOPT_HTTP_VERSION, static_cast<long>(CURL_HTTP_VERSION_2TLS));
    curl_easy_setopt(h, CURLOPT_ACCEPT_ENCODING, "");
    curl_easy_setopt(h, CURLOPT_USERAGENT, req.user_agent.c_str());
    curl_easy_setopt(h, CURLOPT_WRITEFUNCTION, on_body);
    curl_easy_setopt(h, CURLOPT_WRITEDATA, &sink);
    curl_easy_setopt(h, CURLOPT_HEADERFUNCTION, on_header);
    curl_easy_setopt(h, CURLOPT_HEADERDATA, &resp);
    curl_easy_setopt(h, CURLOPT_ERRORBUFFER, errbuf);

    auto start = std::chrono::steady_clock::now();
    CURLcode rc = curl_easy_perform(h);
    resp.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                          .count();

    long status = 0;
    curl_easy_getinfo(h, CURLINFO_RESPONSE_CODE, &status);
    resp.status = static_cast<int>(status);
    char* effective = nullptr;
    if (curl_easy_getinfo(h, CURLINFO_EFFECTIVE_URL, &effective) == CURLE_OK && effective)
        resp.final_url = effective;

    if (rc == CURLE_WRITE_ERROR && sink.overflow) {
        resp.detail = "body truncated";
    } else if (rc == CURLE_TOO_MANY_REDIRECTS && status > 0) {
        // Reported as the last redirect status, which classifies as http_error.
        resp.detail = "too many redirects";
    } else if (rc != CURLE_OK) {
        resp.error = map_error(rc);
        resp.status = 0;
        resp.detail = errbuf[0] ? errbuf : curl_easy_strerror(rc);
    }
    curl_easy_cleanup(h);
    return resp;
}

}  // namespace citecheck
