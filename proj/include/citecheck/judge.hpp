#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citecheck/expected.hpp"

namespace citecheck {

struct JudgeVerdict {
    int score = 0;
    std::string explanation;

    friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

/// Expects "SCORE: 0|1" on the first non-blank line (key case-insensitive)
/// followed by "EXPLANATION: ..."; the explanation is everything after the
/// key, trimmed, and must not be empty.
Expected<JudgeVerdict> parse_judge_output(std::string_view raw);
std::string render_verdict(const JudgeVerdict& verdict);

/// Appended to the prompt after an unparseable answer.
extern const std::string_view kGrammarReminder;

enum class JudgeTask { relevance, fact_check };

std::string_view prompt_template(JudgeTask task);
/// Escapes &, < and > so claim and source cannot close their delimiters.
std::string escape_prompt_text(std::string_view text);
std::string unescape_prompt_text(std::string_view text);
/// Single-pass substitution of {claim} and {source}; inputs are escaped.
std::string render_prompt(std::string_view tmpl, std::string_view claim, std::string_view source);
std::string build_relevance_prompt(std::string_view claim, std::string_view content);
std::string build_factcheck_prompt(std::string_view claim, std::string_view content);

/// Hex FNV-1a of the prompt; keys scripted responses.
std::string prompt_hash(std::string_view prompt);

class JudgeTransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Prompt in, raw completion out. Must tolerate concurrent calls.
/// Throws JudgeTransportError when the backend cannot be reached.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual std::string complete(const std::string& prompt) const = 0;
};

/// Canned answers: exact prompt hash first, then the first rule whose
/// substring occurs in the prompt, then the default.
class ScriptedJudge final : public JudgeBackend {
public:
    ScriptedJudge() = default;
    /// JSON: {"responses": {hash: text}, "rules": [{"contains", "response"}], "default": text}
    static ScriptedJudge from_json(std::string_view json_text);
    static ScriptedJudge from_file(const std::filesystem::path& path);

    ScriptedJudge& respond_to_hash(std::string hash, std::string response);
    ScriptedJudge& respond_when(std::string substring, std::string response);
    ScriptedJudge& otherwise(std::string response);

    std::string complete(const std::string& prompt) const override;

private:
    std::map<std::string, std::string> by_hash_;
    std::vector<std::pair<std::string, std::string>> rules_;
    std::string default_ = "SCORE: 0\nEXPLANATION: no scripted response";
};

/// Offline judge scoring by word overlap between claim and source.
/// Relevance passes when at least half of the claim's content words occur
/// in the source; fact check needs all of them.
class HeuristicJudge final : public JudgeBackend {
public:
    std::string complete(const std::string& prompt) const override;
};

/// Lowercased content words: alphanumeric runs of three or more bytes, or
/// any run containing a digit, minus a few stopwords.
std::vector<std::string> content_words(std::string_view text);

}  // namespace citecheck
