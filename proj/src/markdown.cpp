#include "citecheck/markdown.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

namespace citecheck {

namespace {

bool is_space_or_tab(char c) { return c == ' ' || c == '\t'; }
bool is_trailing_ws(char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

struct Line {
    std::size_t begin;
    std::size_t end;  // excludes '\n'
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            lines.push_back({start, i});
            start = i + 1;
        }
    }
    if (start < text.size()) lines.push_back({start, text.size()});
    return lines;
}

void blank_range(std::string& text, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end && i < text.size(); ++i)
        if (text[i] != '\n') text[i] = ' ';
}

bool line_is_blank(std::string_view text, const Line& line) {
    for (std::size_t i = line.begin; i < line.end; ++i)
        if (!std::isspace(static_cast<unsigned char>(text[i]))) return false;
    return true;
}

struct Fence {
    char ch;
    std::size_t length;
};

// Fence runs may follow any mix of indentation and '>' so fences nested in
// lists or quotes are masked too.
std::optional<Fence> fence_at(std::string_view text, const Line& line, bool opening) {
    std::size_t i = line.begin;
    while (i < line.end && (is_space_or_tab(text[i]) || text[i] == '>')) ++i;
    if (i >= line.end) return std::nullopt;
    char ch = text[i];
    if (ch != '`' && ch != '~') return std::nullopt;
    std::size_t run = 0;
    while (i + run < line.end && text[i + run] == ch) ++run;
    if (run < 3) return std::nullopt;
    std::string_view rest = text.substr(i + run, line.end - i - run);
    if (opening) {
        if (ch == '`' && rest.find('`') != std::string_view::npos) return std::nullopt;
    } else {
        for (char c : rest)
            if (!std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
    }
    return Fence{ch, run};
}

}  // namespace

std::string canonicalize(std::string_view raw) {
    static constexpr std::string_view kBom = "\xEF\xBB\xBF";
    while (raw.substr(0, kBom.size()) == kBom) raw.remove_prefix(kBom.size());

    std::string out;
    out.reserve(raw.size());
    std::size_t line_start = 0;
    auto finish_line = [&] {
        std::size_t end = out.size();
        while (end > line_start && is_trailing_ws(out[end - 1])) --end;
        out.resize(end);
    };
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
            finish_line();
            out.push_back('\n');
            line_start = out.size();
        } else {
            out.push_back(c);
        }
    }
    finish_line();
    return out;
}

MaskResult mask_code(std::string_view canonical) {
    MaskResult result;
    result.text.assign(canonical);
    const auto lines = split_lines(canonical);

    std::vector<bool> in_fence(lines.size(), false);
    std::optional<Fence> open;
    std::size_t open_line = 0;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (!open) {
            if (auto f = fence_at(canonical, lines[li], true)) {
                open = f;
                open_line = li;
                in_fence[li] = true;
            }
            continue;
        }
        in_fence[li] = true;
        auto close = fence_at(canonical, lines[li], false);
        if (close && close->ch == open->ch && close->length >= open->length) {
            Span s{lines[open_line].begin, lines[li].end};
            blank_range(result.text, s.begin, s.end);
            result.masked.push_back(s);
            open.reset();
        }
    }
    if (open) {
        Span s{lines[open_line].begin, canonical.size()};
        blank_range(result.text, s.begin, s.end);
        result.masked.push_back(s);
        result.warnings.push_back({"unterminated_fence",
                                   "code fence is never closed; remainder of document treated as code",
                                   s});
    }

    // Inline code spans: a run of n backticks closed by a run of exactly n,
    // never crossing a blank line or a fenced region.
    std::size_t li = 0;
    std::vector<Span> inline_spans;
    while (li < lines.size()) {
        if (in_fence[li] || line_is_blank(canonical, lines[li])) {
            ++li;
            continue;
        }
        std::size_t lj = li;
        while (lj + 1 < lines.size() && !in_fence[lj + 1] && !line_is_blank(canonical, lines[lj + 1]))
            ++lj;
        const std::size_t begin = lines[li].begin;
        const std::size_t end = lines[lj].end;
        std::size_t i = begin;
        while (i < end) {
            char c = canonical[i];
            if (c == '\\' && i + 1 < end) {
                i += 2;
                continue;
            }
            if (c != '`') {
                ++i;
                continue;
            }
            std::size_t run = 0;
            while (i + run < end && canonical[i + run] == '`') ++run;
            std::size_t j = i + run;
            std::optional<std::size_t> close;
            while (j < end) {
                if (canonical[j] != '`') {
                    ++j;
                    continue;
                }
                std::size_t r = 0;
                while (j + r < end && canonical[j + r] == '`') ++r;
                if (r == run) {
                    close = j;
                    break;
                }
                j += r;
            }
            if (close) {
                Span s{i, *close + run};
                blank_range(result.text, s.begin, s.end);
                inline_spans.push_back(s);
                i = s.end;
            } else {
                i += run;
            }
        }
        li = lj + 1;
    }
    result.masked.insert(result.masked.end(), inline_spans.begin(), inline_spans.end());
    std::sort(result.masked.begin(), result.masked.end());
    return result;
}

bool BlockNode::is_passage() const noexcept {
    return !in_reference_section &&
           (kind == BlockKind::paragraph || kind == BlockKind::list_item ||
            kind == BlockKind::table_row);
}

std::string block_content(std::string_view text, const BlockNode& block) {
    std::string out(text.substr(block.span.begin, block.span.size()));
    for (const Span& m : block.container_markers) {
        if (!block.span.contains(m)) continue;
        blank_range(out, m.begin - block.span.begin, m.end - block.span.begin);
    }
    return out;
}

bool is_reference_heading_text(std::string_view heading_text) {
    std::string norm;
    for (char c : heading_text) {
        if (c == '*' || c == '_' || c == '`' || c == '#' || c == ':') continue;
        norm.push_back(ascii_lower(c));
    }
    auto trim = [](std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        s = s.substr(b, e - b);
    };
    trim(norm);
    // Drop a leading section number such as "7." or "7)".
    std::size_t i = 0;
    while (i < norm.size() && is_digit(norm[i])) ++i;
    if (i > 0 && i < norm.size() && (norm[i] == '.' || norm[i] == ')')) {
        norm = norm.substr(i + 1);
        trim(norm);
    } else if (i > 0 && i < norm.size() && norm[i] == ' ') {
        norm = norm.substr(i);
        trim(norm);
    }
    static constexpr std::array<std::string_view, 4> kNames = {"references", "sources", "citations",
                                                               "bibliography"};
    return std::find(kNames.begin(), kNames.end(), norm) != kNames.end();
}

// ---------------------------------------------------------------------------
// Inline scanning

namespace {

std::size_t match_bracket(std::string_view t, std::size_t open) {
    int depth = 0;
    for (std::size_t j = open; j < t.size(); ++j) {
        char c = t[j];
        if (c == '\\') {
            ++j;
            continue;
        }
        if (c == '[') ++depth;
        if (c == ']' && --depth == 0) return j;
    }
    return std::string_view::npos;
}

struct LinkTail {
    std::size_t end;  // one past ')'
    std::string destination;
};

std::optional<LinkTail> parse_link_tail(std::string_view t, std::size_t paren) {
    if (paren >= t.size() || t[paren] != '(') return std::nullopt;
    std::size_t k = paren + 1;
    auto skip_ws = [&] {
        while (k < t.size() && std::isspace(static_cast<unsigned char>(t[k]))) ++k;
    };
    skip_ws();
    std::string dest;
    if (k < t.size() && t[k] == '<') {
        std::size_t close = t.find('>', k + 1);
        if (close == std::string_view::npos) return std::nullopt;
        std::string_view d = t.substr(k + 1, close - k - 1);
        if (d.find('\n') != std::string_view::npos) return std::nullopt;
        dest.assign(d);
        k = close + 1;
    } else {
        int depth = 0;
        while (k < t.size()) {
            char c = t[k];
            if (std::isspace(static_cast<unsigned char>(c))) break;
            if (c == '\\' && k + 1 < t.size() && is_ascii_punct(t[k + 1])) {
                dest.push_back(t[k + 1]);
                k += 2;
                continue;
            }
            if (c == '(') ++depth;
            if (c == ')') {
                if (depth == 0) break;
                --depth;
            }
            dest.push_back(c);
            ++k;
        }
        if (depth != 0) return std::nullopt;
    }
    skip_ws();
    if (k < t.size() && (t[k] == '"' || t[k] == '\'' || t[k] == '(')) {
        char close = t[k] == '(' ? ')' : t[k];
        std::size_t e = t.find(close, k + 1);
        if (e == std::string_view::npos) return std::nullopt;
        k = e + 1;
        skip_ws();
    }
    if (k >= t.size() || t[k] != ')') return std::nullopt;
    return LinkTail{k + 1, std::move(dest)};
}

// "[1]", "[1-3]", "[1, 2]", "[1,3-5]"; en/em dashes accepted as range separators.
std::optional<std::size_t> parse_citation_list(std::string_view t, std::size_t open) {
    std::size_t k = open + 1;
    auto skip_sp = [&] {
        while (k < t.size() && is_space_or_tab(t[k])) ++k;
    };
    auto digits = [&] {
        std::size_t s = k;
        while (k < t.size() && is_digit(t[k]) && k - s < 9) ++k;
        return k > s && !(k < t.size() && is_digit(t[k]));
    };
    auto dash = [&] {
        if (k < t.size() && t[k] == '-') {
            ++k;
            return true;
        }
        if (t.substr(k, 3) == "\xE2\x80\x93" || t.substr(k, 3) == "\xE2\x80\x94") {
            k += 3;
            return true;
        }
        return false;
    };
    skip_sp();
    if (!digits()) return std::nullopt;
    for (;;) {
        skip_sp();
        if (dash()) {
            skip_sp();
            if (!digits()) return std::nullopt;
            skip_sp();
        }
        if (k < t.size() && (t[k] == ',' || t[k] == ';')) {
            ++k;
            skip_sp();
            if (!digits()) return std::nullopt;
            continue;
        }
        if (k < t.size() && t[k] == ']') return k + 1;
        return std::nullopt;
    }
}

std::optional<std::size_t> parse_autolink(std::string_view t, std::size_t open, std::string* url) {
    std::size_t k = open + 1;
    std::size_t s = k;
    if (k >= t.size() || !std::isalpha(static_cast<unsigned char>(t[k]))) return std::nullopt;
    while (k < t.size() && (std::isalnum(static_cast<unsigned char>(t[k])) || t[k] == '+' ||
                            t[k] == '.' || t[k] == '-'))
        ++k;
    if (k - s < 2 || k - s > 32 || k >= t.size() || t[k] != ':') return std::nullopt;
    std::string scheme;
    for (std::size_t i = s; i < k; ++i) scheme.push_back(ascii_lower(t[i]));
    if (scheme != "http" && scheme != "https") return std::nullopt;
    while (k < t.size() && t[k] != '>' && t[k] != '<' &&
           !std::isspace(static_cast<unsigned char>(t[k])))
        ++k;
    if (k >= t.size() || t[k] != '>') return std::nullopt;
    *url = std::string(t.substr(s, k - s));
    return k + 1;
}

std::string trimmed(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<InlineNode> scan_inlines(std::string_view t) {
    std::vector<InlineNode> nodes;
    std::size_t text_start = 0;
    auto emit = [&](InlineNode node) {
        if (node.span.begin > text_start) {
            InlineNode txt;
            txt.kind = InlineKind::text;
            txt.span = {text_start, node.span.begin};
            nodes.push_back(std::move(txt));
        }
        text_start = node.span.end;
        nodes.push_back(std::move(node));
    };

    std::size_t i = 0;
    while (i < t.size()) {
        char c = t[i];
        if (c == '\\' && i + 1 < t.size() && is_ascii_punct(t[i + 1])) {
            i += 2;
            continue;
        }
        if (c == '!' && i + 1 < t.size() && t[i + 1] == '[') {
            // Images are content, never citations; skip them whole.
            std::size_t close = match_bracket(t, i + 1);
            if (close != std::string_view::npos) {
                if (auto tail = parse_link_tail(t, close + 1)) {
                    i = tail->end;
                    continue;
                }
            }
            ++i;
            continue;
        }
        if (c == '[') {
            if (i + 1 < t.size() && t[i + 1] == '^') {
                std::size_t j = i + 2;
                while (j < t.size() && t[j] != ']' && t[j] != '[' &&
                       !std::isspace(static_cast<unsigned char>(t[j])))
                    ++j;
                if (j < t.size() && t[j] == ']' && j > i + 2) {
                    InlineNode n;
                    n.kind = InlineKind::footnote_ref;
                    n.span = {i, j + 1};
                    n.label = std::string(t.substr(i + 1, j - i - 1));
                    emit(std::move(n));
                    i = j + 1;
                    continue;
                }
            }
            std::size_t close = match_bracket(t, i);
            if (close != std::string_view::npos) {
                if (auto tail = parse_link_tail(t, close + 1)) {
                    InlineNode n;
                    n.kind = InlineKind::link;
                    n.span = {i, tail->end};
                    n.text_span = {i + 1, close};
                    n.label = trimmed(t.substr(i + 1, close - i - 1));
                    n.url = std::move(tail->destination);
                    emit(std::move(n));
                    i = nodes.back().span.end;
                    continue;
                }
            }
            if (auto end = parse_citation_list(t, i)) {
                InlineNode n;
                n.kind = InlineKind::citation_ref;
                n.span = {i, *end};
                n.label = trimmed(t.substr(i + 1, *end - i - 2));
                emit(std::move(n));
                i = *end;
                continue;
            }
            ++i;
            continue;
        }
        if (c == '<') {
            std::string url;
            if (auto end = parse_autolink(t, i, &url)) {
                InlineNode n;
                n.kind = InlineKind::autolink;
                n.span = {i, *end};
                n.label = url;
                n.url = std::move(url);
                emit(std::move(n));
                i = *end;
                continue;
            }
        }
        ++i;
    }
    if (text_start < t.size()) {
        InlineNode txt;
        txt.kind = InlineKind::text;
        txt.span = {text_start, t.size()};
        nodes.push_back(std::move(txt));
    }
    return nodes;
}

std::vector<Span> find_bare_urls(std::string_view t) {
    std::vector<Span> out;
    std::size_t i = 0;
    while (i < t.size()) {
        std::size_t prefix = 0;
        auto starts = [&](std::string_view p) {
            if (i + p.size() > t.size()) return false;
            for (std::size_t k = 0; k < p.size(); ++k)
                if (ascii_lower(t[i + k]) != p[k]) return false;
            return true;
        };
        if (starts("https://"))
            prefix = 8;
        else if (starts("http://"))
            prefix = 7;
        bool boundary = i == 0 || !std::isalnum(static_cast<unsigned char>(t[i - 1]));
        if (prefix == 0 || !boundary) {
            ++i;
            continue;
        }
        std::size_t j = i + prefix;
        int depth = 0;
        while (j < t.size()) {
            char c = t[j];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>' || c == '"' ||
                c == '[' || c == ']')
                break;
            if (c == '(') ++depth;
            if (c == ')') {
                if (depth == 0) break;
                --depth;
            }
            ++j;
        }
        while (j > i + prefix) {
            char c = t[j - 1];
            if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
                c == '\'' || c == '*' || c == '_')
                --j;
            else
                break;
        }
        if (j > i + prefix) out.push_back({i, j});
        i = std::max(j, i + 1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Block structure

namespace {

struct LineInfo {
    std::size_t content;  // first byte after blockquote markers
    std::size_t first;    // first non-whitespace byte (== end for blank lines)
    std::size_t end;
    int indent;  // columns between content and first, tabs as 4
    std::vector<Span> quote_markers;
};

LineInfo analyse_line(std::string_view text, const Line& line) {
    LineInfo info{line.begin, line.begin, line.end, 0, {}};
    std::size_t i = line.begin;
    for (;;) {
        std::size_t j = i;
        int spaces = 0;
        while (j < line.end && text[j] == ' ' && spaces < 3) {
            ++j;
            ++spaces;
        }
        if (j < line.end && text[j] == '>') {
            std::size_t e = j + 1;
            if (e < line.end && is_space_or_tab(text[e])) ++e;
            info.quote_markers.push_back({j, e});
            i = e;
            continue;
        }
        break;
    }
    info.content = i;
    int cols = 0;
    std::size_t k = i;
    while (k < line.end && is_space_or_tab(text[k])) {
        cols += text[k] == '\t' ? 4 : 1;
        ++k;
    }
    info.first = k;
    info.indent = cols;
    return info;
}

struct ListMarker {
    bool ordered;
    long ordinal;
    std::size_t content;  // first byte of item content
};

std::optional<ListMarker> list_marker(std::string_view text, const LineInfo& li) {
    std::size_t k = li.first;
    if (k >= li.end) return std::nullopt;
    char c = text[k];
    auto content_after = [&](std::size_t after) -> std::optional<std::size_t> {
        if (after == li.end) return after;
        if (!is_space_or_tab(text[after])) return std::nullopt;
        while (after < li.end && is_space_or_tab(text[after])) ++after;
        return after;
    };
    if (c == '-' || c == '*' || c == '+') {
        if (auto cs = content_after(k + 1)) return ListMarker{false, -1, *cs};
        return std::nullopt;
    }
    std::size_t d = k;
    while (d < li.end && is_digit(text[d]) && d - k < 9) ++d;
    if (d == k || d >= li.end || (text[d] != '.' && text[d] != ')')) return std::nullopt;
    if (auto cs = content_after(d + 1))
        return ListMarker{true, std::stol(std::string(text.substr(k, d - k))), *cs};
    return std::nullopt;
}

// "[n] Title ..." entries used by plain-text reference lists.
std::optional<ListMarker> bracket_entry(std::string_view text, const LineInfo& li) {
    std::size_t k = li.first;
    if (k >= li.end || text[k] != '[') return std::nullopt;
    std::size_t d = k + 1;
    while (d < li.end && is_digit(text[d]) && d - k < 10) ++d;
    if (d == k + 1 || d >= li.end || text[d] != ']') return std::nullopt;
    std::size_t after = d + 1;
    if (after < li.end && (text[after] == ':' || text[after] == '(')) return std::nullopt;
    while (after < li.end && is_space_or_tab(text[after])) ++after;
    if (after >= li.end) return std::nullopt;
    return ListMarker{true, std::stol(std::string(text.substr(k + 1, d - k - 1))), after};
}

bool is_thematic_break(std::string_view text, const LineInfo& li) {
    if (li.indent > 3 || li.first >= li.end) return false;
    char c = text[li.first];
    if (c != '*' && c != '-' && c != '_') return false;
    int count = 0;
    for (std::size_t i = li.first; i < li.end; ++i) {
        if (text[i] == c)
            ++count;
        else if (!is_space_or_tab(text[i]))
            return false;
    }
    return count >= 3;
}

std::optional<int> setext_level(std::string_view text, const LineInfo& li) {
    if (li.indent > 3 || li.first >= li.end) return std::nullopt;
    char c = text[li.first];
    if (c != '=' && c != '-') return std::nullopt;
    std::size_t i = li.first;
    std::size_t count = 0;
    while (i < li.end && text[i] == c) {
        ++i;
        ++count;
    }
    while (i < li.end && is_space_or_tab(text[i])) ++i;
    if (i != li.end) return std::nullopt;
    if (c == '-' && count < 2) return std::nullopt;
    return c == '=' ? 1 : 2;
}

struct DefinitionLine {
    std::string label;
    std::string destination;
    std::size_t content;
};

std::optional<DefinitionLine> definition_line(std::string_view text, const LineInfo& li) {
    if (li.indent > 3) return std::nullopt;
    std::size_t k = li.first;
    if (k >= li.end || text[k] != '[') return std::nullopt;
    std::size_t close = k + 1;
    while (close < li.end && text[close] != ']' && text[close] != '[') {
        if (text[close] == '\\') ++close;
        ++close;
    }
    if (close >= li.end || text[close] != ']' || close == k + 1) return std::nullopt;
    if (close + 1 >= li.end || text[close + 1] != ':') return std::nullopt;
    DefinitionLine def;
    def.label = std::string(text.substr(k + 1, close - k - 1));
    std::size_t p = close + 2;
    while (p < li.end && is_space_or_tab(text[p])) ++p;
    def.content = p;
    if (!def.label.empty() && def.label[0] == '^') return def;
    // Link reference definition: destination, optional title, nothing else.
    std::size_t dest_begin = p, dest_end = p;
    if (p < li.end && text[p] == '<') {
        std::size_t e = text.find('>', p + 1);
        if (e == std::string_view::npos || e >= li.end) return std::nullopt;
        dest_begin = p + 1;
        dest_end = e;
        p = e + 1;
    } else {
        while (p < li.end && !is_space_or_tab(text[p])) ++p;
        dest_end = p;
    }
    if (dest_end == dest_begin) return std::nullopt;
    def.destination = std::string(text.substr(dest_begin, dest_end - dest_begin));
    while (p < li.end && is_space_or_tab(text[p])) ++p;
    if (p < li.end) {
        char q = text[p];
        char qc = q == '(' ? ')' : q;
        if (q != '"' && q != '\'' && q != '(') return std::nullopt;
        std::size_t e = li.end;
        while (e > p + 1 && is_space_or_tab(text[e - 1])) --e;
        if (e <= p + 1 || text[e - 1] != qc) return std::nullopt;
    }
    return def;
}

bool is_table_delimiter(std::string_view text, const LineInfo& li) {
    bool dash = false;
    for (std::size_t i = li.first; i < li.end; ++i) {
        char c = text[i];
        if (c == '-')
            dash = true;
        else if (c != '|' && c != ':' && !is_space_or_tab(c))
            return false;
    }
    return dash;
}

class BlockBuilder {
public:
    explicit BlockBuilder(std::string_view text) : text_(text) {}

    SyntaxTree build() {
        for (const Line& line : split_lines(text_)) process(analyse_line(text_, line));
        close();
        for (auto& b : blocks_) {
            if (b.kind == BlockKind::reference_definition) continue;
            std::string content = block_content(text_, b);
            b.inlines = scan_inlines(content);
            for (auto& n : b.inlines) {
                n.span = n.span.shifted(static_cast<std::ptrdiff_t>(b.span.begin));
                if (n.kind == InlineKind::link)
                    n.text_span = n.text_span.shifted(static_cast<std::ptrdiff_t>(b.span.begin));
            }
        }
        return SyntaxTree{std::string(text_), std::move(blocks_)};
    }

private:
    void close() { open_ = false; }

    BlockNode& start(BlockKind kind, std::size_t begin, std::size_t end) {
        close();
        BlockNode b;
        b.kind = kind;
        b.span = {begin, std::max(begin, end)};
        b.in_reference_section = ref_level_ > 0;
        blocks_.push_back(std::move(b));
        open_ = true;
        return blocks_.back();
    }

    void extend(const LineInfo& li) {
        BlockNode& b = blocks_.back();
        for (const Span& q : li.quote_markers)
            if (q.begin >= b.span.begin) b.container_markers.push_back(q);
        b.span.end = li.end;
    }

    void on_heading(BlockNode& h) {
        std::string_view heading_text = text_.substr(h.span.begin, h.span.size());
        if (ref_level_ > 0 && h.heading_level <= ref_level_) ref_level_ = 0;
        h.in_reference_section = ref_level_ > 0;
        if (is_reference_heading_text(heading_text)) {
            h.is_reference_heading = true;
            ref_level_ = h.heading_level;
        }
    }

    void process(const LineInfo& li) {
        if (li.first >= li.end) {
            close();
            return;
        }
        const char c = text_[li.first];
        const bool para_open = open_ && blocks_.back().kind == BlockKind::paragraph;

        // ATX heading
        if (li.indent <= 3 && c == '#') {
            std::size_t k = li.first;
            while (k < li.end && text_[k] == '#') ++k;
            int level = static_cast<int>(k - li.first);
            if (level <= 6 && (k == li.end || is_space_or_tab(text_[k]))) {
                while (k < li.end && is_space_or_tab(text_[k])) ++k;
                std::size_t e = li.end;
                std::size_t h = e;
                while (h > k && text_[h - 1] == '#') --h;
                if (h < e && (h == k || is_space_or_tab(text_[h - 1]))) {
                    e = h;
                    while (e > k && is_space_or_tab(text_[e - 1])) --e;
                }
                BlockNode& b = start(BlockKind::heading, k, e);
                b.heading_level = level;
                on_heading(b);
                close();
                return;
            }
        }

        if (para_open) {
            if (auto level = setext_level(text_, li)) {
                BlockNode& b = blocks_.back();
                b.kind = BlockKind::heading;
                b.heading_level = *level;
                on_heading(b);
                close();
                return;
            }
        }

        if (is_thematic_break(text_, li)) {
            close();
            return;
        }

        if (c == '[') {
            if (auto def = definition_line(text_, li)) {
                if (def->label[0] == '^') {
                    BlockNode& b = start(BlockKind::footnote_definition, def->content, li.end);
                    b.label = def->label;
                    return;
                }
                BlockNode& b = start(BlockKind::reference_definition, li.first, li.end);
                b.label = def->label;
                b.destination = def->destination;
                close();
                return;
            }
            if (ref_level_ > 0) {
                if (auto entry = bracket_entry(text_, li)) {
                    BlockNode& b = start(BlockKind::list_item, entry->content, li.end);
                    b.ordered = true;
                    b.ordinal = entry->ordinal;
                    return;
                }
            }
        }

        if (c == '|') {
            close();
            if (!is_table_delimiter(text_, li)) {
                start(BlockKind::table_row, li.first, li.end);
                close();
            }
            return;
        }

        if (auto marker = list_marker(text_, li)) {
            bool interrupts = !para_open || !marker->ordered || marker->ordinal == 1;
            if (para_open && marker->content == li.end) interrupts = false;
            if (interrupts) {
                BlockNode& b = start(BlockKind::list_item, marker->content, li.end);
                b.ordered = marker->ordered;
                b.ordinal = marker->ordinal;
                return;
            }
        }

        if (open_) {
            extend(li);
            return;
        }
        start(BlockKind::paragraph, li.first, li.end);
    }

    std::string_view text_;
    std::vector<BlockNode> blocks_;
    bool open_ = false;
    int ref_level_ = 0;
};

}  // namespace

SyntaxTree build_ast(std::string_view masked) { return BlockBuilder(masked).build(); }

}  // namespace citecheck
