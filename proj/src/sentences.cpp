#include "citecheck/sentences.hpp"

#include <algorithm>
#include <cctype>

#include "citecheck/markdown.hpp"

namespace citecheck {

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Bytes of a closing quote/bracket/emphasis sequence at `i`, or 0.
std::size_t closer_len(std::string_view t, std::size_t i) {
    char c = t[i];
    if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '*' || c == '_') return 1;
    // U+2019 and U+201D
    if (t.substr(i, 3) == "\xE2\x80\x99" || t.substr(i, 3) == "\xE2\x80\x9D") return 3;
    return 0;
}

bool starts_sentence(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return (c >= 'A' && c <= 'Z') || is_digit(c) || c == '[' || c == '(' || c == '"' ||
           c == '\'' || c == '*' || c == '_' || c == '<' || u >= 0x80;
}

// Abbreviations that only hold before a number ("No. 5").
bool needs_number(std::string_view token) { return token == "No" || token == "no" || token == "Nos"; }

class Segmenter {
public:
    explicit Segmenter(std::string_view text) : t_(text) {
        for (const InlineNode& n : scan_inlines(text))
            if (n.kind != InlineKind::text) atomic_.push_back(n.span);
    }

    std::vector<Span> run() {
        std::vector<Span> out;
        std::optional<std::size_t> start;
        std::size_t i = 0;
        while (i < t_.size()) {
            if (auto end = atomic_end(i)) {
                if (!start) start = i;
                i = *end;
                continue;
            }
            char c = t_[i];
            if (is_ws(c)) {
                ++i;
                continue;
            }
            if (!start) start = i;
            if (!is_terminal(c)) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < t_.size() && is_terminal(t_[j])) ++j;
            if (c == '.' && j == i + 1 && guarded(i)) {
                i = j;
                continue;
            }
            std::size_t end = j;
            while (end < t_.size()) {
                std::size_t n = closer_len(t_, end);
                if (n == 0) break;
                end += n;
            }
            bool absorbed = false;
            if (std::size_t after = absorb_markers(end); after != end) {
                absorbed = true;
                end = after;
                while (end < t_.size()) {
                    std::size_t n = is_terminal(t_[end]) ? 1 : closer_len(t_, end);
                    if (n == 0) break;
                    end += n;
                }
            }
            if (is_boundary(end, absorbed)) {
                out.push_back({*start, end});
                start.reset();
                i = end;
            } else {
                i = j;
            }
        }
        if (start) {
            std::size_t e = t_.size();
            while (e > *start && is_ws(t_[e - 1])) --e;
            out.push_back({*start, e});
        }
        return out;
    }

private:
    std::optional<std::size_t> atomic_end(std::size_t pos) const {
        auto it = std::lower_bound(atomic_.begin(), atomic_.end(), Span{pos, 0});
        if (it != atomic_.end() && it->begin == pos) return it->end;
        return std::nullopt;
    }

    bool guarded(std::size_t dot) const {
        if (dot > 0 && dot + 1 < t_.size() && is_digit(t_[dot - 1]) && is_digit(t_[dot + 1]))
            return true;
        std::size_t b = dot;
        while (b > 0 && !is_ws(t_[b - 1])) --b;
        std::string_view token = t_.substr(b, dot - b);
        while (!token.empty() && (token.front() == '(' || token.front() == '"' ||
                                  token.front() == '\'' || token.front() == '['))
            token.remove_prefix(1);
        if (token.size() == 1 && token[0] >= 'A' && token[0] <= 'Z') return true;
        if (!is_abbreviation(token)) return false;
        if (needs_number(token)) {
            std::size_t k = dot + 1;
            while (k < t_.size() && is_ws(t_[k])) ++k;
            return k < t_.size() && is_digit(t_[k]);
        }
        return true;
    }

    // Consumes whitespace-separated citation markers, optionally wrapped in
    // one pair of parentheses, that directly follow a sentence terminator.
    std::size_t absorb_markers(std::size_t pos) const {
        std::size_t k = pos;
        for (;;) {
            std::size_t p = k;
            while (p < t_.size() && is_ws(t_[p])) ++p;
            if (auto e = atomic_end(p)) {
                k = *e;
                continue;
            }
            if (p < t_.size() && t_[p] == '(') {
                std::size_t q = p + 1;
                bool any = false;
                for (;;) {
                    while (q < t_.size() && (is_ws(t_[q]) || t_[q] == ',' || t_[q] == ';')) ++q;
                    if (auto e = atomic_end(q)) {
                        any = true;
                        q = *e;
                        continue;
                    }
                    break;
                }
                if (any && q < t_.size() && t_[q] == ')') {
                    k = q + 1;
                    continue;
                }
            }
            return k;
        }
    }

    bool is_boundary(std::size_t end, bool absorbed) const {
        if (end >= t_.size()) return true;
        if (!is_ws(t_[end])) return false;
        std::size_t q = end;
        while (q < t_.size() && is_ws(t_[q])) ++q;
        if (q >= t_.size() || absorbed) return true;
        return starts_sentence(t_[q]) || atomic_end(q).has_value();
    }

    std::string_view t_;
    std::vector<Span> atomic_;
};

}  // namespace

bool is_abbreviation(std::string_view token) noexcept {
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), token) != kAbbreviations.end();
}

std::vector<Span> segment_sentences(std::string_view text) { return Segmenter(text).run(); }

}  // namespace citecheck
