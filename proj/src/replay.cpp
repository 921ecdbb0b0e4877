#include <cstdint>
#include <filesystem>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "citecheck/serialization.hpp"
#include "citecheck/transports.hpp"

namespace citecheck {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view error_name(TransportError e) {
    switch (e) {
        case TransportError::timeout: return "timeout";
        case TransportError::unreachable: return "unreachable";
        default: return "none";
    }
}

TransportError error_from(std::string_view s) {
    if (s == "timeout") return TransportError::timeout;
    if (s == "unreachable") return TransportError::unreachable;
    return TransportError::none;
}

json load_index(const fs::path& file) {
    if (!fs::exists(file)) return json::object();
    return json::parse(read_file(file));
}

}  // namespace

std::string cassette_key(std::string_view url) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : url) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

RecordingTransport::RecordingTransport(std::shared_ptr<const HttpTransport> inner, fs::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

HttpResponse RecordingTransport::get(const HttpRequest& request) const {
    HttpResponse resp = inner_->get(request);
    std::lock_guard lock(mu_);
    std::string key = cassette_key(request.url);
    fs::path index_file = dir_ / (key + ".json");
    json index = load_index(index_file);
    index["url"] = request.url;
    json& attempts = index["attempts"];
    if (!attempts.is_array()) attempts = json::array();
    // A fresh fetch of the URL starts the attempt list over.
    if (request.attempt == 1) attempts = json::array();
    std::string body_name = fmt::format("{}.{}.body", key, attempts.size());
    write_file(dir_ / body_name, resp.body);
    attempts.push_back({{"status", resp.status},
                        {"error", error_name(resp.error)},
                        {"headers", resp.headers},
                        {"final_url", resp.final_url},
                        {"elapsed_ms", resp.elapsed_ms},
                        {"detail", resp.detail},
                        {"body_file", body_name}});
    write_file(index_file, index.dump(2) + "\n");
    return resp;
}

ReplayTransport::ReplayTransport(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::is_directory(dir_)) throw std::runtime_error("replay directory not found: " + dir_.string());
}

HttpResponse ReplayTransport::get(const HttpRequest& request) const {
    HttpResponse resp;
    resp.final_url = request.url;
    fs::path index_file = dir_ / (cassette_key(request.url) + ".json");
    json index;
    try {
        index = load_index(index_file);
    } catch (const std::exception& e) {
        resp.error = TransportError::unreachable;
        resp.detail = std::string("bad cassette: ") + e.what();
        return resp;
    }
    const json* attempts = index.contains("attempts") ? &index["attempts"] : nullptr;
    if (!attempts || !attempts->is_array() || attempts->empty()) {
        resp.error = TransportError::unreachable;
        resp.detail = "not recorded";
        return resp;
    }
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(std::max(request.attempt, 1)) - 1,
                                          attempts->size() - 1);
    const json& a = (*attempts)[i];
    resp.status = a.value("status", 0);
    resp.error = error_from(a.value("error", std::string("none")));
    resp.headers = a.value("headers", std::map<std::string, std::string>{});
    resp.final_url = a.value("final_url", request.url);
    resp.elapsed_ms = a.value("elapsed_ms", std::int64_t{0});
    resp.detail = a.value("detail", std::string{});
    if (auto body = a.value("body_file", std::string{}); !body.empty() && fs::exists(dir_ / body))
        resp.body = read_file(dir_ / body);
    return resp;
}

}  // namespace citecheck
