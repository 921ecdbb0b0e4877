#include "citecheck/citations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <unordered_map>

namespace citecheck {

namespace {

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

// Link labels match case-insensitively with internal whitespace collapsed.
std::string label_key(std::string_view label) {
    std::string out;
    bool space = false;
    for (char c : label) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(ascii_lower(c));
    }
    return out;
}

std::optional<long> parse_number(std::string_view s) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits "1, 3-5" into (a, b) pairs; a single number is (a, a).
std::vector<std::pair<long, long>> citation_items(std::string_view list) {
    std::vector<std::pair<long, long>> items;
    std::string norm;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list.substr(i, 3) == "\xE2\x80\x93" || list.substr(i, 3) == "\xE2\x80\x94") {
            norm.push_back('-');
            i += 2;
        } else if (list[i] == ';') {
            norm.push_back(',');
        } else {
            norm.push_back(list[i]);
        }
    }
    std::string_view rest = norm;
    while (!rest.empty()) {
        std::size_t comma = rest.find(',');
        std::string_view item = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        std::size_t dash = item.find('-');
        auto a = parse_number(trim(item.substr(0, dash)));
        auto b = dash == std::string_view::npos ? a : parse_number(trim(item.substr(dash + 1)));
        if (a && b) items.emplace_back(*a, *b);
    }
    return items;
}

struct LinkCandidate {
    std::size_t pos;
    std::string url;
};

// Links, autolinks and bare URLs of one block in position order.
std::vector<LinkCandidate> block_links(const SyntaxTree& tree, const BlockNode& block) {
    std::vector<LinkCandidate> out;
    for (const InlineNode& n : block.inlines) {
        if (n.kind == InlineKind::link || n.kind == InlineKind::autolink) {
            out.push_back({n.span.begin, n.url});
        } else if (n.kind == InlineKind::text) {
            std::string_view t(tree.text);
            t = t.substr(n.span.begin, n.span.size());
            for (const Span& s : find_bare_urls(t))
                out.push_back({n.span.begin + s.begin, std::string(t.substr(s.begin, s.size()))});
        }
    }
    return out;
}

}  // namespace

ExtractionResult extract_citation_markers(const SyntaxTree& tree) {
    ExtractionResult result;
    for (std::size_t bi = 0; bi < tree.blocks.size(); ++bi) {
        const BlockNode& block = tree.blocks[bi];
        if (!block.is_passage()) continue;
        for (const InlineNode& n : block.inlines) {
            auto push = [&](MarkerKind kind, std::string label, std::optional<std::string> url) {
                CitationMarker m;
                m.kind = kind;
                m.label = std::move(label);
                m.url = std::move(url);
                m.span = n.span;
                m.block_index = bi;
                if (kind == MarkerKind::inline_link) m.label_span = n.text_span;
                result.markers.push_back(std::move(m));
            };
            switch (n.kind) {
                case InlineKind::text: break;
                case InlineKind::footnote_ref: push(MarkerKind::footnote, n.label, std::nullopt); break;
                case InlineKind::link: push(MarkerKind::inline_link, n.label, n.url); break;
                case InlineKind::autolink: push(MarkerKind::autolink, n.url, n.url); break;
                case InlineKind::citation_ref:
                    for (auto [a, b] : citation_items(n.label)) {
                        if (a > b) {
                            result.warnings.push_back(
                                {"descending_range",
                                 "range [" + std::to_string(a) + "-" + std::to_string(b) +
                                     "] is descending; only its endpoints are used",
                                 n.span});
                            push(MarkerKind::numbered, std::to_string(a), std::nullopt);
                            push(MarkerKind::numbered, std::to_string(b), std::nullopt);
                        } else if (b - a + 1 > kMaxRangeExpansion) {
                            result.warnings.push_back(
                                {"range_too_large",
                                 "range [" + std::to_string(a) + "-" + std::to_string(b) +
                                     "] is too wide to expand; only its endpoints are used",
                                 n.span});
                            push(MarkerKind::numbered, std::to_string(a), std::nullopt);
                            push(MarkerKind::numbered, std::to_string(b), std::nullopt);
                        } else {
                            for (long k = a; k <= b; ++k)
                                push(MarkerKind::numbered, std::to_string(k), std::nullopt);
                        }
                    }
                    break;
            }
        }
    }
    return result;
}

ResolutionResult resolve_references(std::span<const CitationMarker> markers, const SyntaxTree& tree) {
    // First definition of a label wins, as in CommonMark.
    std::map<std::string, std::string> definitions;
    std::map<std::string, const BlockNode*> footnotes;
    std::map<long, std::string> reference_list;
    for (const BlockNode& b : tree.blocks) {
        if (b.kind == BlockKind::reference_definition) {
            definitions.emplace(label_key(b.label), b.destination);
        } else if (b.kind == BlockKind::footnote_definition) {
            footnotes.emplace(label_key(b.label), &b);
        } else if (b.kind == BlockKind::list_item && b.in_reference_section && b.ordered) {
            auto links = block_links(tree, b);
            if (links.size() == 1) reference_list.emplace(b.ordinal, links.front().url);
        }
    }

    ResolutionResult result;
    result.markers.reserve(markers.size());
    for (const CitationMarker& m : markers) {
        std::optional<std::string> raw;
        switch (m.kind) {
            case MarkerKind::numbered: {
                if (auto it = definitions.find(label_key(m.label)); it != definitions.end()) {
                    raw = it->second;
                } else if (auto n = parse_number(m.label)) {
                    if (auto rit = reference_list.find(*n); rit != reference_list.end())
                        raw = rit->second;
                }
                break;
            }
            case MarkerKind::footnote: {
                if (auto it = footnotes.find(label_key(m.label)); it != footnotes.end()) {
                    auto links = block_links(tree, *it->second);
                    if (!links.empty()) raw = links.front().url;
                }
                break;
            }
            case MarkerKind::inline_link:
            case MarkerKind::autolink: raw = m.url; break;
        }

        ResolvedMarker rm{m, std::nullopt};
        if (!raw) {
            result.diagnostics.push_back(
                {"unresolved_label", "citation label '" + m.label + "' has no matching source", m.span});
        } else if (auto norm = normalize_url(*raw)) {
            rm.url = *norm;
        } else {
            result.diagnostics.push_back({"invalid_url",
                                          "citation '" + m.label + "' points at '" + *raw +
                                              "': " + norm.error().message,
                                          m.span});
        }
        result.markers.push_back(std::move(rm));
    }
    return result;
}

Expected<std::string> normalize_url(std::string_view url) {
    url = trim(url);
    for (char c : url)
        if (std::isspace(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) < 0x20)
            return make_error("invalid_url", "URL contains whitespace or control characters");

    std::size_t sep = url.find("://");
    if (sep == std::string_view::npos || sep == 0)
        return make_error("relative_url", "URL is relative or has no scheme");
    std::string scheme = lower(url.substr(0, sep));
    if (!std::isalpha(static_cast<unsigned char>(scheme[0])))
        return make_error("relative_url", "URL is relative or has no scheme");
    if (scheme != "http" && scheme != "https")
        return make_error("unsupported_scheme", "scheme '" + scheme + "' is not http or https");

    std::string_view rest = url.substr(sep + 3);
    std::size_t auth_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, auth_end);
    std::string_view tail = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

    std::string userinfo;
    if (std::size_t at = authority.rfind('@'); at != std::string_view::npos) {
        userinfo = std::string(authority.substr(0, at + 1));
        authority = authority.substr(at + 1);
    }
    std::string_view host = authority;
    std::string_view port;
    if (!authority.empty() && authority.front() == '[') {
        std::size_t close = authority.find(']');
        if (close == std::string_view::npos) return make_error("invalid_url", "unterminated IPv6 host");
        host = authority.substr(0, close + 1);
        std::string_view after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':') return make_error("invalid_url", "garbage after IPv6 host");
            port = after.substr(1);
        }
    } else if (std::size_t colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = authority.substr(colon + 1);
    }
    if (host.empty()) return make_error("invalid_url", "URL has no host");
    for (char c : port)
        if (c < '0' || c > '9') return make_error("invalid_url", "port is not numeric");

    std::string out = scheme + "://" + userinfo + lower(host);
    if (!port.empty()) {
        auto value = parse_number(port);
        if (!value || *value > 65535) return make_error("invalid_url", "port out of range");
        bool is_default = (scheme == "http" && *value == 80) || (scheme == "https" && *value == 443);
        if (!is_default) out += ":" + std::to_string(*value);
    }
    if (std::size_t hash = tail.find('#'); hash != std::string_view::npos) tail = tail.substr(0, hash);
    if (tail.empty() || tail.front() != '/') out.push_back('/');
    out.append(tail);
    return out;
}

std::vector<Citation> build_registry(std::span<const ResolvedMarker> markers) {
    std::vector<Citation> registry;
    std::unordered_map<std::string, std::size_t> index;
    for (const ResolvedMarker& rm : markers) {
        if (!rm.url) continue;
        auto [it, inserted] = index.emplace(*rm.url, registry.size());
        if (inserted) {
            Citation c;
            c.id = static_cast<int>(registry.size()) + 1;
            c.url = *rm.url;
            registry.push_back(std::move(c));
        }
        auto& labels = registry[it->second].raw_labels;
        if (std::find(labels.begin(), labels.end(), rm.marker.label) == labels.end())
            labels.push_back(rm.marker.label);
    }
    return registry;
}

}  // namespace citecheck
