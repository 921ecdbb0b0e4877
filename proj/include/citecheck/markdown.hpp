#pragma once

// Markdown front end: canonicalization, code masking and a block/inline
// syntax tree with byte spans into the canonical text. Only the subset of
// Markdown that matters for citation extraction is modelled; anything else
// degrades to paragraph text.

#include <string>
#include <string_view>
#include <vector>

#include "citecheck/types.hpp"

namespace citecheck {

/// CRLF and lone CR become LF, trailing spaces/tabs on each line are removed,
/// and a leading UTF-8 byte-order mark is dropped. Idempotent.
std::string canonicalize(std::string_view raw);

struct MaskResult {
    std::string text;
    std::vector<Span> masked;
    std::vector<Diagnostic> warnings;
};

/// Replaces fenced code blocks and inline code spans with spaces (newlines are
/// kept) so byte offsets stay valid. An unterminated fence masks the rest of
/// the document and records a warning.
MaskResult mask_code(std::string_view canonical);

enum class InlineKind { text, link, autolink, citation_ref, footnote_ref };

struct InlineNode {
    InlineKind kind = InlineKind::text;
    Span span;
    /// citation_ref: bracket contents ("1-3"); footnote_ref: "^label";
    /// link: link text; autolink: the URL.
    std::string label;
    std::string url;
    /// Link text span (links only).
    Span text_span;
};

enum class BlockKind {
    paragraph,
    heading,
    list_item,
    table_row,
    reference_definition,
    footnote_definition,
};

struct BlockNode {
    BlockKind kind = BlockKind::paragraph;
    Span span;
    /// Container syntax inside span (blockquote '>' markers) that is not content.
    std::vector<Span> container_markers;
    int heading_level = 0;
    bool ordered = false;
    /// Written number of an ordered list item, or the n of a "[n] ..." entry.
    long ordinal = -1;
    /// Definition label ("1", "^note") for the two definition kinds.
    std::string label;
    /// Destination of a link-reference definition.
    std::string destination;
    /// True for every block under a references-style heading.
    bool in_reference_section = false;
    /// True for the references-style heading itself.
    bool is_reference_heading = false;
    std::vector<InlineNode> inlines;

    /// Paragraphs, list items and table rows outside a reference section.
    bool is_passage() const noexcept;
};

struct SyntaxTree {
    /// The masked canonical text the spans index into.
    std::string text;
    std::vector<BlockNode> blocks;
};

/// Builds the block list with nested inline nodes from masked canonical text.
SyntaxTree build_ast(std::string_view masked);

/// Inline scan of one block's text. Offsets in the result are relative to
/// `text`. Exposed so the sentence splitter can treat citation syntax as
/// atomic tokens.
std::vector<InlineNode> scan_inlines(std::string_view text);

/// Copy of `text.substr(block.span)` with container markers blanked to spaces.
std::string block_content(std::string_view text, const BlockNode& block);

/// True when the heading text names a references section
/// (references, sources, citations, bibliography; case-insensitive).
bool is_reference_heading_text(std::string_view heading_text);

/// Bare http(s) URLs inside plain text, trailing punctuation trimmed.
std::vector<Span> find_bare_urls(std::string_view text);

}  // namespace citecheck
