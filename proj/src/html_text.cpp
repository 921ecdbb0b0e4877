#include "citecheck/html_text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace citecheck {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = lower(c);
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (lower(s[i]) != lower(prefix[i])) return false;
    return true;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Windows-1252 differs from Latin-1 only in 0x80..0x9F.
constexpr std::array<std::uint16_t, 32> kCp1252High = {
    0x20AC, 0xFFFD, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0xFFFD, 0x017D, 0xFFFD, 0xFFFD, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0xFFFD, 0x017E, 0x0178};

std::string from_single_byte(std::string_view bytes, bool cp1252) {
    std::string out;
    out.reserve(bytes.size());
    for (char ch : bytes) {
        auto b = static_cast<unsigned char>(ch);
        if (cp1252 && b >= 0x80 && b <= 0x9F)
            append_utf8(out, kCp1252High[b - 0x80]);
        else
            append_utf8(out, b);
    }
    return out;
}

struct MediaType {
    std::string type;
    std::string charset;
};

MediaType parse_content_type(std::string_view header) {
    MediaType mt;
    std::size_t semi = header.find(';');
    mt.type = lowercase(trim(header.substr(0, semi)));
    while (semi != std::string_view::npos) {
        std::string_view rest = header.substr(semi + 1);
        semi = rest.find(';');
        std::string_view param = trim(rest.substr(0, semi));
        header = rest;
        if (istarts_with(param, "charset=")) {
            std::string_view v = trim(param.substr(8));
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
            mt.charset = lowercase(v);
        }
    }
    return mt;
}

std::string decode(std::string_view body, const std::string& charset, bool& lossy) {
    if (charset == "iso-8859-1" || charset == "latin1" || charset == "latin-1" || charset == "us-ascii" ||
        charset == "ascii")
        return from_single_byte(body, false);
    if (charset == "windows-1252" || charset == "cp1252") return from_single_byte(body, true);
    return to_valid_utf8(body, lossy);
}

bool looks_like_html(std::string_view body) {
    std::string_view head = trim(body.substr(0, 512));
    return istarts_with(head, "<!doctype html") || istarts_with(head, "<html") ||
           istarts_with(head, "<head") || istarts_with(head, "<body");
}

bool looks_binary(std::string_view body) {
    std::size_t n = std::min<std::size_t>(body.size(), 1024);
    for (std::size_t i = 0; i < n; ++i)
        if (body[i] == '\0') return true;
    return false;
}

// Element bodies that are never visible page text.
constexpr std::array<std::string_view, 8> kSkipElements = {"script", "style",    "nav", "noscript",
                                                         "template", "head", "svg", "iframe"};

struct Entity {
    std::string_view name;
    std::uint32_t cp;
};

constexpr std::array<Entity, 24> kEntities = {{
    {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
    {"nbsp", ' '},     {"copy", 0xA9},    {"reg", 0xAE},     {"trade", 0x2122}, {"mdash", 0x2014},
    {"ndash", 0x2013}, {"hellip", 0x2026}, {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C},
    {"rdquo", 0x201D}, {"euro", 0x20AC},  {"pound", 0xA3},   {"yen", 0xA5},     {"cent", 0xA2},
    {"deg", 0xB0},     {"middot", 0xB7},  {"times", 0xD7},   {"laquo", 0xAB},
}};

// Decodes one entity at s[0] == '&'. Returns bytes consumed, or 0.
std::size_t decode_entity(std::string_view s, std::string& out) {
    std::size_t semi = s.find(';');
    if (semi == std::string_view::npos || semi > 12 || semi < 2) return 0;
    std::string_view name = s.substr(1, semi - 1);
    if (name[0] == '#') {
        std::uint32_t cp = 0;
        bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
        std::string_view digits = name.substr(hex ? 2 : 1);
        if (digits.empty()) return 0;
        for (char c : digits) {
            int v;
            if (c >= '0' && c <= '9')
                v = c - '0';
            else if (hex && c >= 'a' && c <= 'f')
                v = c - 'a' + 10;
            else if (hex && c >= 'A' && c <= 'F')
                v = c - 'A' + 10;
            else
                return 0;
            cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
            if (cp > 0x10FFFF) cp = 0x110000;
        }
        append_utf8(out, cp);
        return semi + 1;
    }
    for (const Entity& e : kEntities) {
        if (e.name == name) {
            append_utf8(out, e.cp);
            return semi + 1;
        }
    }
    return 0;
}

std::string collapse(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string read_tag_name(std::string_view s, std::size_t& i) {
    std::string name;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == ':'))
        name.push_back(lower(s[i++]));
    return name;
}

// Position just past the '>' closing a tag that starts at `i`, honouring quotes.
std::size_t tag_end(std::string_view s, std::size_t i) {
    char quote = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            return i + 1;
        }
    }
    return s.size();
}

// Skips past the matching close tag of `name`, counting nested opens.
std::size_t skip_element(std::string_view s, std::size_t i, const std::string& name) {
    int depth = 1;
    bool raw = name == "script" || name == "style";
    while (i < s.size()) {
        std::size_t lt = s.find('<', i);
        if (lt == std::string_view::npos) return s.size();
        std::size_t j = lt + 1;
        bool closing = j < s.size() && s[j] == '/';
        if (closing) ++j;
        std::string tag = read_tag_name(s, j);
        std::size_t end = tag_end(s, lt);
        if (tag == name) {
            if (closing) {
                if (--depth == 0) return end;
            } else if (!raw && !(end >= 2 && s[end - 2] == '/')) {
                ++depth;
            }
        }
        i = raw ? lt + 1 : end;
    }
    return s.size();
}

}  // namespace

std::string to_valid_utf8(std::string_view bytes, bool& lossy) {
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        auto b = static_cast<unsigned char>(bytes[i]);
        std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
        bool good = len != 0 && i + len <= bytes.size();
        std::uint32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
        for (std::size_t k = 1; good && k < len; ++k) {
            auto c = static_cast<unsigned char>(bytes[i + k]);
            if ((c & 0xC0) != 0x80) good = false;
            cp = (cp << 6) | (c & 0x3F);
        }
        if (good) {
            // Reject overlong forms, surrogates and out-of-range values.
            static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
            if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) good = false;
        }
        if (good) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append("\xEF\xBF\xBD");
            lossy = true;
            ++i;
        }
    }
    return out;
}

std::string html_to_text(std::string_view html) {
    std::string raw;
    raw.reserve(html.size());
    std::size_t i = 0;
    while (i < html.size()) {
        char c = html[i];
        if (c == '&') {
            std::size_t used = decode_entity(html.substr(i), raw);
            if (used) {
                i += used;
                continue;
            }
            raw.push_back(c);
            ++i;
            continue;
        }
        if (c != '<') {
            raw.push_back(c);
            ++i;
            continue;
        }
        if (html.substr(i, 4) == "<!--") {
            std::size_t end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? html.size() : end + 3;
            continue;
        }
        std::size_t j = i + 1;
        bool closing = j < html.size() && html[j] == '/';
        if (closing) ++j;
        if (j < html.size() && (html[j] == '!' || html[j] == '?')) {
            i = tag_end(html, i);
            continue;
        }
        std::string name = read_tag_name(html, j);
        if (name.empty()) {
            // A lone '<' in text.
            raw.push_back(c);
            ++i;
            continue;
        }
        std::size_t end = tag_end(html, i);
        bool self_closing = end >= 2 && html[end - 2] == '/';
        if (!closing && !self_closing &&
            std::find(kSkipElements.begin(), kSkipElements.end(), name) != kSkipElements.end()) {
            i = skip_element(html, end, name);
            raw.push_back(' ');
            continue;
        }
        // Inline tags must not split words: "<b>a</b>b" reads "ab".
        static constexpr std::array<std::string_view, 8> kInline = {"a", "b", "i", "em", "strong", "span", "sup", "sub"};
        if (std::find(kInline.begin(), kInline.end(), name) == kInline.end()) raw.push_back(' ');
        i = end;
    }
    return collapse(raw);
}

ExtractedText extract_text(std::string_view body, std::string_view content_type) {
    ExtractedText out;
    MediaType mt = parse_content_type(content_type);
    bool lossy = false;

    bool html = mt.type == "text/html" || mt.type == "application/xhtml+xml" ||
                (mt.type.empty() && looks_like_html(body));
    bool texty = mt.type.rfind("text/", 0) == 0 || mt.type == "application/json" ||
                 mt.type == "application/xml" || mt.type == "application/markdown" ||
                 (mt.type.empty() && !looks_binary(body) && body.substr(0, 5) != "%PDF-");

    if (html) {
        out.text = html_to_text(decode(body, mt.charset, lossy));
    } else if (texty) {
        out.text = decode(body, mt.charset, lossy);
    } else {
        out.flags.insert(ContentFlag::unsupported_content_type);
        return out;
    }
    if (lossy) out.flags.insert(ContentFlag::lossy_decoded);
    if (trim(out.text).empty()) {
        out.text.clear();
        out.flags.insert(ContentFlag::empty_content);
    }
    return out;
}

}  // namespace citecheck
