#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace citecheck {

/// Half-open byte range [begin, end) into a document's canonical text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return begin >= end; }
    bool contains(const Span& other) const noexcept {
        return begin <= other.begin && other.end <= end;
    }
    bool overlaps(const Span& other) const noexcept {
        return begin < other.end && other.begin < end;
    }
    Span shifted(std::ptrdiff_t delta) const noexcept {
        return Span{static_cast<std::size_t>(static_cast<std::ptrdiff_t>(begin) + delta),
                    static_cast<std::size_t>(static_cast<std::ptrdiff_t>(end) + delta)};
    }
    friend bool operator==(const Span&, const Span&) = default;
    friend auto operator<=>(const Span&, const Span&) = default;
};

struct Diagnostic {
    std::string code;
    std::string message;
    std::optional<Span> span;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

enum class MarkerKind { numbered, footnote, inline_link, autolink };

/// One citation occurrence in the text. Range and list markers are already
/// expanded: "[1-3]" yields three of these sharing one span.
struct CitationMarker {
    MarkerKind kind = MarkerKind::numbered;
    std::string label;
    std::optional<std::string> url;
    Span span;
    /// Link text inside the brackets; only meaningful for inline links.
    std::optional<Span> label_span;
    std::size_t block_index = 0;

    friend bool operator==(const CitationMarker&, const CitationMarker&) = default;
};

enum class FetchCategory { ok, http_error, blocked, timeout, unreachable, rate_limited };

enum class ContentFlag { empty_content, unsupported_content_type, lossy_decoded };

struct FetchOutcome {
    FetchCategory category = FetchCategory::unreachable;
    std::optional<int> http_status;
    int attempts = 1;
    std::int64_t elapsed_ms = 0;
    /// Extracted text; present iff category == ok.
    std::optional<std::string> content;
    std::string final_url;
    std::set<ContentFlag> flags;
    std::string detail;

    friend bool operator==(const FetchOutcome&, const FetchOutcome&) = default;
};

struct Citation {
    int id = 0;
    std::string url;
    std::vector<std::string> raw_labels;
    std::optional<std::string> url_content;
    std::optional<FetchOutcome> fetch_outcome;

    friend bool operator==(const Citation&, const Citation&) = default;
};

struct Attribution {
    int id = 0;
    std::string text_nocite;
    Span span;
    std::vector<int> citation_ids;
    int passage_id = 0;

    friend bool operator==(const Attribution&, const Attribution&) = default;
};

enum class Dimension { link_works, relevant_content, fact_check };

inline constexpr Dimension kAllDimensions[] = {Dimension::link_works, Dimension::relevant_content,
                                               Dimension::fact_check};

enum class EvalFlag { rate_limited_source, fetch_failed, judge_parse_retry, judge_unavailable };

struct EvalResult {
    int attribution_id = 0;
    int citation_id = 0;
    Dimension dimension = Dimension::link_works;
    /// 0 or 1; nullopt means not_evaluated.
    std::optional<int> score;
    std::string explanation;
    int judge_attempts = 0;
    std::set<EvalFlag> flags;
    std::optional<FetchCategory> fetch_category;
    std::optional<int> http_status;

    bool evaluated() const noexcept { return score.has_value(); }
    bool has_flag(EvalFlag f) const { return flags.count(f) != 0; }

    friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

/// Sort key used to make evaluation output independent of scheduling.
inline bool eval_order_less(const EvalResult& a, const EvalResult& b) {
    if (a.attribution_id != b.attribution_id) return a.attribution_id < b.attribution_id;
    if (a.citation_id != b.citation_id) return a.citation_id < b.citation_id;
    return static_cast<int>(a.dimension) < static_cast<int>(b.dimension);
}

struct SourceDocument {
    std::string raw_text;
    std::string canonical_text;
    std::string origin;

    friend bool operator==(const SourceDocument&, const SourceDocument&) = default;
};

struct CitationPair {
    int attribution_id;
    int citation_id;
    friend bool operator==(const CitationPair&, const CitationPair&) = default;
};

struct AttributionDocument {
    std::vector<Citation> citations;
    std::vector<Attribution> attributions;
    std::vector<EvalResult> evals;
    std::vector<Diagnostic> diagnostics;
    SourceDocument source;

    const Citation* find_citation(int id) const noexcept;
    Citation* find_citation(int id) noexcept;
    const Attribution* find_attribution(int id) const noexcept;

    /// Every (attribution, citation) pair in attribution order.
    std::vector<CitationPair> pairs() const;

    friend bool operator==(const AttributionDocument&, const AttributionDocument&) = default;
};

std::string_view to_string(MarkerKind kind) noexcept;
std::string_view to_string(FetchCategory category) noexcept;
std::string_view to_string(ContentFlag flag) noexcept;
std::string_view to_string(Dimension dimension) noexcept;
std::string_view to_string(EvalFlag flag) noexcept;

std::optional<MarkerKind> marker_kind_from_string(std::string_view s) noexcept;
std::optional<FetchCategory> fetch_category_from_string(std::string_view s) noexcept;
std::optional<ContentFlag> content_flag_from_string(std::string_view s) noexcept;
std::optional<EvalFlag> eval_flag_from_string(std::string_view s) noexcept;
/// Accepts the canonical names plus the short forms "link", "relevant", "fact".
std::optional<Dimension> dimension_from_string(std::string_view s) noexcept;

/// Column heading used in rendered tables ("Link Works", "Relevant", "Fact Check").
std::string_view display_name(Dimension dimension) noexcept;

}  // namespace citecheck
