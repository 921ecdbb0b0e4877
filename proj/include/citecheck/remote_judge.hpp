#pragma once

#include <string>

#include "citecheck/judge.hpp"

namespace citecheck {

struct RemoteJudgeConfig {
    /// Chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
    std::string endpoint;
    std::string model;
    std::string api_key;
    int timeout_ms = 60000;
    /// Log request and response bodies (the key is redacted).
    bool debug = false;
};

/// OpenAI-compatible chat-completions client at temperature 0.
class RemoteJudge final : public JudgeBackend {
public:
    explicit RemoteJudge(RemoteJudgeConfig config);
    std::string complete(const std::string& prompt) const override;

    /// Request body for one prompt; exposed for tests.
    std::string request_body(const std::string& prompt) const;
    /// Extracts choices[0].message.content. Throws JudgeTransportError.
    static std::string parse_response(const std::string& body);

private:
    RemoteJudgeConfig config_;
};

/// `text` with every occurrence of `secret` replaced by "[redacted]".
std::string redact(std::string text, const std::string& secret);

}  // namespace citecheck
