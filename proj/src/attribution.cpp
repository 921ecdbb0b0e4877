#include "citecheck/attribution.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>

#include "citecheck/markdown.hpp"
#include "citecheck/sentences.hpp"

namespace citecheck {

namespace {

constexpr char kCut = '\x01';

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool trailing_punct(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' ||
           c == ']';
}

// Link text that only names the citation ("1", "[2]", "source") is dropped
// along with the rest of the link syntax.
bool is_label_like(std::string_view text) {
    while (!text.empty() && is_ws(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_ws(text.back())) text.remove_suffix(1);
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
    if (!text.empty() && text.front() == '^') text.remove_prefix(1);
    if (text.empty()) return true;
    if (std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) return true;
    std::string low;
    for (char c : text) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    static constexpr std::array<std::string_view, 9> kWords = {
        "source", "sources", "src", "link", "ref", "reference", "here", "cite", "citation"};
    return std::find(kWords.begin(), kWords.end(), low) != kWords.end();
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (is_ws(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string tidy_cuts(std::string s) {
    // Adjacent removals ("[1], [2]") merge into one cut.
    std::string merged;
    for (std::size_t i = 0; i < s.size(); ++i) {
        merged.push_back(s[i]);
        if (s[i] != kCut) continue;
        for (;;) {
            std::size_t k = i + 1;
            while (k < s.size() && (s[k] == ' ' || s[k] == ',' || s[k] == ';')) ++k;
            if (k < s.size() && s[k] == kCut) {
                i = k;
                continue;
            }
            break;
        }
    }
    // Parentheses that only wrapped citations go too.
    std::string unwrapped;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (merged[i] == '(') {
            std::size_t k = i + 1;
            if (k < merged.size() && merged[k] == ' ') ++k;
            if (k < merged.size() && merged[k] == kCut) {
                std::size_t e = k + 1;
                if (e < merged.size() && merged[e] == ' ') ++e;
                if (e < merged.size() && merged[e] == ')') {
                    unwrapped.push_back(kCut);
                    i = e;
                    continue;
                }
            }
        }
        unwrapped.push_back(merged[i]);
    }
    std::string out;
    for (std::size_t i = 0; i < unwrapped.size(); ++i) {
        char c = unwrapped[i];
        if (c != kCut) {
            out.push_back(c);
            continue;
        }
        char next = i + 1 < unwrapped.size() ? unwrapped[i + 1] : '\0';
        if (!out.empty() && out.back() == ' ' && (next == '\0' || next == ' ' || trailing_punct(next)))
            out.pop_back();
    }
    return collapse_ws(out);
}

bool is_final_marker(const Passage& passage, Span sentence, Span marker,
                     std::span<const ResolvedMarker> all) {
    std::size_t pos = marker.end;
    while (pos < sentence.end) {
        auto other = std::find_if(all.begin(), all.end(), [&](const ResolvedMarker& rm) {
            return rm.marker.span.begin == pos && rm.marker.span.end > pos;
        });
        if (other != all.end()) {
            pos = other->marker.span.end;
            continue;
        }
        std::string_view t = passage.text;
        std::size_t rel = pos - passage.span.begin;
        char c = t[rel];
        if (is_ws(c) || trailing_punct(c) || c == '"' || c == '\'' || c == '*' || c == '_') {
            ++pos;
        } else if (t.substr(rel, 3) == "\xE2\x80\x99" || t.substr(rel, 3) == "\xE2\x80\x9D") {
            pos += 3;
        } else {
            return false;
        }
    }
    return true;
}

void append_unique(std::vector<int>& ids, int id) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
}

}  // namespace

std::string strip_markers(std::string_view passage_text, Span sentence, std::size_t passage_begin,
                          std::span<const ResolvedMarker> markers) {
    std::vector<const ResolvedMarker*> inside;
    for (const ResolvedMarker& rm : markers) {
        if (!sentence.contains(rm.marker.span)) continue;
        bool dup = std::any_of(inside.begin(), inside.end(), [&](const ResolvedMarker* o) {
            return o->marker.span == rm.marker.span;
        });
        if (!dup) inside.push_back(&rm);
    }
    std::sort(inside.begin(), inside.end(), [](const ResolvedMarker* a, const ResolvedMarker* b) {
        return a->marker.span.begin < b->marker.span.begin;
    });

    auto rel = [&](std::size_t abs) { return abs - passage_begin; };
    std::string out;
    std::size_t pos = sentence.begin;
    for (const ResolvedMarker* rm : inside) {
        const CitationMarker& m = rm->marker;
        if (m.span.begin < pos) continue;
        out.append(passage_text.substr(rel(pos), m.span.begin - pos));
        if (m.kind == MarkerKind::inline_link && m.label_span &&
            !is_label_like(passage_text.substr(rel(m.label_span->begin), m.label_span->size()))) {
            out.append(passage_text.substr(rel(m.label_span->begin), m.label_span->size()));
        } else {
            out.push_back(kCut);
        }
        pos = m.span.end;
    }
    out.append(passage_text.substr(rel(pos), sentence.end - pos));
    return tidy_cuts(collapse_ws(out));
}

std::vector<Attribution> backward_attribute(const Passage& passage,
                                            std::span<const ResolvedMarker> markers,
                                            std::span<const Citation> registry) {
    std::unordered_map<std::string, int> id_of;
    for (const Citation& c : registry) id_of.emplace(c.url, c.id);

    const std::size_t n = passage.sentences.size();
    std::vector<std::vector<int>> ids(n);
    std::vector<std::vector<int>> final_ids(n);
    std::vector<bool> has_marker(n, false);

    for (const ResolvedMarker& rm : markers) {
        auto it = std::find_if(passage.sentences.begin(), passage.sentences.end(),
                               [&](const Span& s) { return s.contains(rm.marker.span); });
        if (it == passage.sentences.end()) continue;
        std::size_t si = static_cast<std::size_t>(it - passage.sentences.begin());
        has_marker[si] = true;
        if (!rm.url) continue;
        auto cid = id_of.find(*rm.url);
        if (cid == id_of.end()) continue;
        append_unique(ids[si], cid->second);
        if (is_final_marker(passage, *it, rm.marker.span, markers))
            append_unique(final_ids[si], cid->second);
    }

    // Propagation only fills sentences without markers, so each one is
    // reached from at most one cited sentence: the nearest following one.
    for (std::size_t i = 0; i < n; ++i) {
        if (final_ids[i].empty()) continue;
        for (std::size_t j = i; j-- > 0 && !has_marker[j];) ids[j] = final_ids[i];
    }

    std::vector<Attribution> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (ids[i].empty()) continue;
        std::string text = strip_markers(passage.text, passage.sentences[i], passage.span.begin, markers);
        if (text.empty()) continue;
        Attribution a;
        a.text_nocite = std::move(text);
        a.span = passage.sentences[i];
        a.citation_ids = ids[i];
        a.passage_id = passage.passage_id;
        out.push_back(std::move(a));
    }
    return out;
}

AttributionDocument parse_document(std::string_view raw, std::string origin) {
    AttributionDocument doc;
    doc.source.raw_text = std::string(raw);
    doc.source.canonical_text = canonicalize(raw);
    doc.source.origin = std::move(origin);
    const std::string& canonical = doc.source.canonical_text;

    MaskResult masked = mask_code(canonical);
    SyntaxTree tree = build_ast(masked.text);
    ExtractionResult extracted = extract_citation_markers(tree);
    ResolutionResult resolved = resolve_references(extracted.markers, tree);
    doc.citations = build_registry(resolved.markers);

    doc.diagnostics = std::move(masked.warnings);
    doc.diagnostics.insert(doc.diagnostics.end(), extracted.warnings.begin(), extracted.warnings.end());
    doc.diagnostics.insert(doc.diagnostics.end(), resolved.diagnostics.begin(), resolved.diagnostics.end());

    int passage_id = 0;
    std::size_t uncited = 0;
    std::size_t cursor = 0;
    for (std::size_t bi = 0; bi < tree.blocks.size(); ++bi) {
        const BlockNode& block = tree.blocks[bi];
        if (!block.is_passage()) continue;
        Passage passage;
        passage.passage_id = ++passage_id;
        passage.span = block.span;
        passage.text = block_content(canonical, block);
        for (const Span& s : segment_sentences(block_content(tree.text, block)))
            passage.sentences.push_back(s.shifted(static_cast<std::ptrdiff_t>(block.span.begin)));

        // Markers arrive grouped by block in document order.
        std::size_t first = cursor;
        while (first < resolved.markers.size() && resolved.markers[first].marker.block_index < bi) ++first;
        std::size_t last = first;
        while (last < resolved.markers.size() && resolved.markers[last].marker.block_index == bi) ++last;
        cursor = last;
        std::span<const ResolvedMarker> block_markers(resolved.markers.data() + first, last - first);

        auto attributions = backward_attribute(passage, block_markers, doc.citations);
        uncited += passage.sentences.size() - attributions.size();
        for (auto& a : attributions) {
            a.id = static_cast<int>(doc.attributions.size()) + 1;
            doc.attributions.push_back(std::move(a));
        }
    }
    if (uncited > 0)
        doc.diagnostics.push_back(
            {"uncited_sentences", std::to_string(uncited) + " sentence(s) carry no citation", std::nullopt});
    return doc;
}

}  // namespace citecheck
