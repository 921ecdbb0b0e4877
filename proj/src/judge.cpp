#include "citecheck/judge.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string_view>

#include "citecheck/serialization.hpp"

namespace citecheck {

namespace {

#include "prompt_templates.inc"

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool ieq_prefix(std::string_view s, std::string_view key) {
    if (s.size() < key.size()) return false;
    for (std::size_t i = 0; i < key.size(); ++i)
        if (std::toupper(static_cast<unsigned char>(s[i])) != key[i]) return false;
    return true;
}

// "KEY: value" with optional spaces around the colon; returns value or nullopt.
std::optional<std::string_view> keyed(std::string_view line, std::string_view key) {
    line = trim(line);
    if (!ieq_prefix(line, key)) return std::nullopt;
    std::string_view rest = trim(line.substr(key.size()));
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    return trim(rest.substr(1));
}

std::string_view block_between(std::string_view prompt, std::string_view open, std::string_view close) {
    std::size_t b = prompt.find(open);
    if (b == std::string_view::npos) return {};
    b += open.size();
    std::size_t e = prompt.find(close, b);
    if (e == std::string_view::npos) return {};
    return trim(prompt.substr(b, e - b));
}

constexpr std::array<std::string_view, 16> kStopwords = {
    "the", "and", "for", "with", "that", "this", "from", "are", "was",
    "were", "has", "have", "its", "into", "than", "been"};

}  // namespace

const std::string_view kGrammarReminder =
    "\n\nYour previous reply did not follow the required format. Answer with exactly two lines:\n"
    "SCORE: 0 or 1\nEXPLANATION: a short paragraph\n";

Expected<JudgeVerdict> parse_judge_output(std::string_view raw) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= raw.size();) {
        std::size_t nl = std::min(raw.find('\n', pos), raw.size());
        lines.push_back(raw.substr(pos, nl - pos));
        pos = nl + 1;
    }
    auto next_nonblank = [&](std::size_t from) {
        while (from < lines.size() && trim(lines[from]).empty()) ++from;
        return from;
    };
    std::size_t i = next_nonblank(0);
    auto score = i < lines.size() ? keyed(lines[i], "SCORE") : std::nullopt;
    if (!score) return make_error("missing_score", "first non-blank line is not a SCORE line");
    if (*score != "0" && *score != "1") return make_error("score_out_of_range", "score must be 0 or 1");

    std::size_t j = next_nonblank(i + 1);
    auto first = j < lines.size() ? keyed(lines[j], "EXPLANATION") : std::nullopt;
    if (!first) return make_error("missing_explanation", "no EXPLANATION line after SCORE");
    std::string explanation(*first);
    for (std::size_t k = j + 1; k < lines.size(); ++k) {
        explanation += '\n';
        explanation += lines[k];
    }
    explanation = std::string(trim(explanation));
    if (explanation.empty()) return make_error("missing_explanation", "explanation is empty");
    return JudgeVerdict{*score == "1" ? 1 : 0, std::move(explanation)};
}

std::string render_verdict(const JudgeVerdict& v) {
    return fmt::format("SCORE: {}\nEXPLANATION: {}", v.score, v.explanation);
}

std::string_view prompt_template(JudgeTask task) {
    return task == JudgeTask::relevance ? kRelevanceTemplateV1 : kFactCheckTemplateV1;
}

std::string escape_prompt_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_prompt_text(std::string_view text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '&') {
            auto rest = text.substr(i);
            if (rest.rfind("&amp;", 0) == 0) { out.push_back('&'); i += 4; continue; }
            if (rest.rfind("&lt;", 0) == 0) { out.push_back('<'); i += 3; continue; }
            if (rest.rfind("&gt;", 0) == 0) { out.push_back('>'); i += 3; continue; }
        }
        out.push_back(text[i]);
    }
    return out;
}

std::string render_prompt(std::string_view tmpl, std::string_view claim, std::string_view source) {
    const std::string ec = escape_prompt_text(claim), es = escape_prompt_text(source);
    std::string out;
    out.reserve(tmpl.size() + ec.size() + es.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.compare(i, 7, "{claim}") == 0) {
            out += ec;
            i += 7;
        } else if (tmpl.compare(i, 8, "{source}") == 0) {
            out += es;
            i += 8;
        } else {
            out.push_back(tmpl[i++]);
        }
    }
    return out;
}

std::string build_relevance_prompt(std::string_view claim, std::string_view content) {
    return render_prompt(prompt_template(JudgeTask::relevance), claim, content);
}

std::string build_factcheck_prompt(std::string_view claim, std::string_view content) {
    return render_prompt(prompt_template(JudgeTask::fact_check), claim, content);
}

std::string prompt_hash(std::string_view prompt) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : prompt) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

ScriptedJudge ScriptedJudge::from_json(std::string_view text) {
    auto j = nlohmann::json::parse(text);
    ScriptedJudge s;
    const nlohmann::json responses = j.value("responses", nlohmann::json::object());
    for (const auto& [hash, resp] : responses.items())
        s.respond_to_hash(hash, resp.get<std::string>());
    for (const auto& rule : j.value("rules", nlohmann::json::array()))
        s.respond_when(rule.at("contains").get<std::string>(), rule.at("response").get<std::string>());
    if (j.contains("default")) s.otherwise(j["default"].get<std::string>());
    return s;
}

ScriptedJudge ScriptedJudge::from_file(const std::filesystem::path& path) {
    return from_json(read_file(path));
}

ScriptedJudge& ScriptedJudge::respond_to_hash(std::string hash, std::string response) {
    by_hash_[std::move(hash)] = std::move(response);
    return *this;
}

ScriptedJudge& ScriptedJudge::respond_when(std::string substring, std::string response) {
    rules_.emplace_back(std::move(substring), std::move(response));
    return *this;
}

ScriptedJudge& ScriptedJudge::otherwise(std::string response) {
    default_ = std::move(response);
    return *this;
}

std::string ScriptedJudge::complete(const std::string& prompt) const {
    if (auto it = by_hash_.find(prompt_hash(prompt)); it != by_hash_.end()) return it->second;
    for (const auto& [needle, response] : rules_)
        if (prompt.find(needle) != std::string::npos) return response;
    return default_;
}

std::vector<std::string> content_words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    bool digit = false;
    auto flush = [&] {
        if ((cur.size() >= 3 || digit) && !cur.empty() &&
            std::find(kStopwords.begin(), kStopwords.end(), cur) == kStopwords.end())
            out.push_back(cur);
        cur.clear();
        digit = false;
    };
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            if (std::isdigit(u)) digit = true;
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string HeuristicJudge::complete(const std::string& prompt) const {
    bool fact = prompt.rfind("# Fact Check", 0) == 0;
    std::string claim = unescape_prompt_text(block_between(prompt, "<claim>", "</claim>"));
    std::string source = unescape_prompt_text(block_between(prompt, "<source>", "</source>"));
    std::vector<std::string> words = content_words(claim);
    std::set<std::string> distinct(words.begin(), words.end());
    auto src_words = content_words(source);
    std::set<std::string> have(src_words.begin(), src_words.end());
    std::size_t found = 0;
    for (const auto& w : distinct) found += have.count(w);
    std::size_t total = distinct.size();
    bool pass = total > 0 && (fact ? found == total : 2 * found >= total);
    return fmt::format("SCORE: {}\nEXPLANATION: {} of {} claim terms appear in the source.", pass ? 1 : 0, found,
                       total);
}

}  // namespace citecheck
