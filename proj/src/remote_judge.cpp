#include "citecheck/remote_judge.hpp"

#include <curl/curl.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <memory>
#include <mutex>

namespace citecheck {

namespace {

std::size_t append_body(char* data, std::size_t size, std::size_t n, void* user) {
    static_cast<std::string*>(user)->append(data, size * n);
    return size * n;
}

}  // namespace

std::string redact(std::string text, const std::string& secret) {
    if (secret.empty()) return text;
    for (std::size_t at = text.find(secret); at != std::string::npos; at = text.find(secret, at))
        text.replace(at, secret.size(), "[redacted]");
    return text;
}

RemoteJudge::RemoteJudge(RemoteJudgeConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw std::invalid_argument("remote judge needs an endpoint");
    if (config_.model.empty()) throw std::invalid_argument("remote judge needs a model name");
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

std::string RemoteJudge::request_body(const std::string& prompt) const {
    nlohmann::json j = {{"model", config_.model},
                        {"temperature", 0},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    return j.dump();
}

std::string RemoteJudge::parse_response(const std::string& body) {
    try {
        auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw JudgeTransportError(std::string("unexpected judge response: ") + e.what());
    }
}

std::string RemoteJudge::complete(const std::string& prompt) const {
    std::string body = request_body(prompt);
    if (config_.debug) spdlog::debug("judge request: {}", redact(body, config_.api_key));

    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> h(curl_easy_init(), curl_easy_cleanup);
    if (!h) throw JudgeTransportError("curl_easy_init failed");
    curl_slist* headers = nullptr;
    headers = curl_slist_append(headers, "Content-Type: application/json");
    std::string auth = "Authorization: Bearer " + config_.api_key;
    if (!config_.api_key.empty()) headers = curl_slist_append(headers, auth.c_str());
    std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> header_guard(headers, curl_slist_free_all);

    std::string response;
    curl_easy_setopt(h.get(), CURLOPT_URL, config_.endpoint.c_str());
    curl_easy_setopt(h.get(), CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(h.get(), CURLOPT_POST, 1L);
    curl_easy_setopt(h.get(), CURLOPT_POSTFIELDS, body.c_str());
    curl_easy_setopt(h.get(), CURLOPT_POSTFIELDSIZE, static_cast<long>(body.size()));
    curl_easy_setopt(h.get(), CURLOPT_HTTPHEADER, headers);
    curl_easy_setopt(h.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(config_.timeout_ms));
    curl_easy_setopt(h.get(), CURLOPT_WRITEFUNCTION, append_body);
    curl_easy_setopt(h.get(), CURLOPT_WRITEDATA, &response);

    CURLcode rc = curl_easy_perform(h.get());
    if (rc != CURLE_OK) throw JudgeTransportError(std::string("judge request failed: ") + curl_easy_strerror(rc));
    long status = 0;
    curl_easy_getinfo(h.get(), CURLINFO_RESPONSE_CODE, &status);
    if (config_.debug) spdlog::debug("judge response {}: {}", status, redact(response, config_.api_key));
    if (status < 200 || status >= 300)
        throw JudgeTransportError("judge endpoint returned HTTP " + std::to_string(status));
    return parse_response(response);
}

}  // namespace citecheck
