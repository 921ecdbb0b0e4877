#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citecheck/citations.hpp"
#include "citecheck/types.hpp"

namespace citecheck {

/// One block-level element that can carry claims (paragraph, list item,
/// table row). Attribution never crosses passage boundaries.
struct Passage {
    int passage_id = 0;
    Span span;
    /// Canonical text of the block with container markers blanked; byte i
    /// corresponds to canonical offset span.begin + i.
    std::string text;
    /// Sentence spans in canonical coordinates.
    std::vector<Span> sentences;
};

/// Maps each sentence to citation ids. A sentence keeps its own resolved
/// markers; the ids of its sentence-final markers also flow to the run of
/// marker-free sentences directly before it. Returned attributions carry
/// id 0; parse_document numbers them.
std::vector<Attribution> backward_attribute(const Passage& passage,
                                            std::span<const ResolvedMarker> markers,
                                            std::span<const Citation> registry);

/// Sentence text with citation syntax deleted and whitespace collapsed.
/// Inline links keep their link text unless it is a bare label such as "1".
std::string strip_markers(std::string_view passage_text, Span sentence, std::size_t passage_begin,
                          std::span<const ResolvedMarker> markers);

/// Full parse: canonicalize, mask code, build the tree, extract and resolve
/// markers, build the registry, segment and attribute. Never fails;
/// problems are reported in `diagnostics`.
AttributionDocument parse_document(std::string_view raw, std::string origin = {});

}  // namespace citecheck
