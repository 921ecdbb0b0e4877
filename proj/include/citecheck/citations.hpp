#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citecheck/expected.hpp"
#include "citecheck/markdown.hpp"
#include "citecheck/types.hpp"

namespace citecheck {

/// Ranges wider than this are not expanded; only their endpoints are emitted.
inline constexpr long kMaxRangeExpansion = 500;

struct ExtractionResult {
    std::vector<CitationMarker> markers;
    std::vector<Diagnostic> warnings;
};

/// Citation markers of all passage blocks in document order. Headings,
/// definitions and everything under a references-style heading are skipped.
ExtractionResult extract_citation_markers(const SyntaxTree& tree);

struct ResolvedMarker {
    CitationMarker marker;
    /// Normalized URL; nullopt when the label could not be resolved.
    std::optional<std::string> url;
};

struct ResolutionResult {
    std::vector<ResolvedMarker> markers;
    std::vector<Diagnostic> diagnostics;
};

/// Numbered labels try link-reference definitions first, then ordered items
/// under a references-style heading holding exactly one link. Footnotes take
/// the first URL in their definition. Links and autolinks resolve to
/// themselves. Every URL is normalized; rejected URLs leave the marker
/// unresolved.
ResolutionResult resolve_references(std::span<const CitationMarker> markers, const SyntaxTree& tree);

/// Lowercases scheme and host, drops default ports and the fragment, and
/// writes an empty path as "/". Path and query are kept byte-for-byte.
/// Only absolute http/https URLs are accepted.
Expected<std::string> normalize_url(std::string_view url);

/// One Citation per distinct normalized URL, ids 1..n in first-appearance
/// order. raw_labels collects each distinct label that mapped to the URL.
std::vector<Citation> build_registry(std::span<const ResolvedMarker> markers);

}  // namespace citecheck
