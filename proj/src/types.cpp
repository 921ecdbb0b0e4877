#include "citecheck/types.hpp"

#include <algorithm>
#include <utility>

namespace citecheck {

const Citation* AttributionDocument::find_citation(int id) const noexcept {
    if (id >= 1 && static_cast<std::size_t>(id) <= citations.size() && citations[id - 1].id == id)
        return &citations[id - 1];
    auto it = std::find_if(citations.begin(), citations.end(),
                           [id](const Citation& c) { return c.id == id; });
    return it == citations.end() ? nullptr : &*it;
}

Citation* AttributionDocument::find_citation(int id) noexcept {
    return const_cast<Citation*>(std::as_const(*this).find_citation(id));
}

const Attribution* AttributionDocument::find_attribution(int id) const noexcept {
    if (id >= 1 && static_cast<std::size_t>(id) <= attributions.size() &&
        attributions[id - 1].id == id)
        return &attributions[id - 1];
    auto it = std::find_if(attributions.begin(), attributions.end(),
                           [id](const Attribution& a) { return a.id == id; });
    return it == attributions.end() ? nullptr : &*it;
}

std::vector<CitationPair> AttributionDocument::pairs() const {
    std::vector<CitationPair> out;
    for (const auto& a : attributions)
        for (int cid : a.citation_ids) out.push_back({a.id, cid});
    return out;
}

std::string_view to_string(MarkerKind kind) noexcept {
    switch (kind) {
        case MarkerKind::numbered: return "numbered";
        case MarkerKind::footnote: return "footnote";
        case MarkerKind::inline_link: return "inline_link";
        case MarkerKind::autolink: return "autolink";
    }
    return "numbered";
}

std::string_view to_string(FetchCategory category) noexcept {
    switch (category) {
        case FetchCategory::ok: return "ok";
        case FetchCategory::http_error: return "http_error";
        case FetchCategory::blocked: return "blocked";
        case FetchCategory::timeout: return "timeout";
        case FetchCategory::unreachable: return "unreachable";
        case FetchCategory::rate_limited: return "rate_limited";
    }
    return "unreachable";
}

std::string_view to_string(ContentFlag flag) noexcept {
    switch (flag) {
        case ContentFlag::empty_content: return "empty_content";
        case ContentFlag::unsupported_content_type: return "unsupported_content_type";
        case ContentFlag::lossy_decoded: return "lossy_decoded";
    }
    return "empty_content";
}

std::string_view to_string(Dimension dimension) noexcept {
    switch (dimension) {
        case Dimension::link_works: return "link_works";
        case Dimension::relevant_content: return "relevant_content";
        case Dimension::fact_check: return "fact_check";
    }
    return "link_works";
}

std::string_view to_string(EvalFlag flag) noexcept {
    switch (flag) {
        case EvalFlag::rate_limited_source: return "rate_limited_source";
        case EvalFlag::fetch_failed: return "fetch_failed";
        case EvalFlag::judge_parse_retry: return "judge_parse_retry";
        case EvalFlag::judge_unavailable: return "judge_unavailable";
    }
    return "fetch_failed";
}

std::string_view display_name(Dimension dimension) noexcept {
    switch (dimension) {
        case Dimension::link_works: return "Link Works";
        case Dimension::relevant_content: return "Relevant";
        case Dimension::fact_check: return "Fact Check";
    }
    return "";
}

namespace {
template <class E, std::size_t N>
std::optional<E> lookup(std::string_view s, const E (&values)[N]) noexcept {
    for (E v : values)
        if (to_string(v) == s) return v;
    return std::nullopt;
}
}  // namespace

std::optional<MarkerKind> marker_kind_from_string(std::string_view s) noexcept {
    static constexpr MarkerKind all[] = {MarkerKind::numbered, MarkerKind::footnote,
                                         MarkerKind::inline_link, MarkerKind::autolink};
    return lookup(s, all);
}

std::optional<FetchCategory> fetch_category_from_string(std::string_view s) noexcept {
    static constexpr FetchCategory all[] = {FetchCategory::ok,          FetchCategory::http_error,
                                            FetchCategory::blocked,     FetchCategory::timeout,
                                            FetchCategory::unreachable, FetchCategory::rate_limited};
    return lookup(s, all);
}

std::optional<ContentFlag> content_flag_from_string(std::string_view s) noexcept {
    static constexpr ContentFlag all[] = {ContentFlag::empty_content,
                                          ContentFlag::unsupported_content_type,
                                          ContentFlag::lossy_decoded};
    return lookup(s, all);
}

std::optional<EvalFlag> eval_flag_from_string(std::string_view s) noexcept {
    static constexpr EvalFlag all[] = {EvalFlag::rate_limited_source, EvalFlag::fetch_failed,
                                       EvalFlag::judge_parse_retry, EvalFlag::judge_unavailable};
    return lookup(s, all);
}

std::optional<Dimension> dimension_from_string(std::string_view s) noexcept {
    if (s == "link") return Dimension::link_works;
    if (s == "relevant" || s == "relevance") return Dimension::relevant_content;
    if (s == "fact" || s == "factcheck") return Dimension::fact_check;
    return lookup(s, kAllDimensions);
}

}  // namespace citecheck
