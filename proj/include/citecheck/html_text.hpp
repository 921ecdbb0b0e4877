#pragma once

#include <set>
#include <string>
#include <string_view>

#include "citecheck/types.hpp"

namespace citecheck {

struct ExtractedText {
    std::string text;
    std::set<ContentFlag> flags;
};

/// Judge-ready text from a response body. HTML loses markup and the
/// contents of script, style, nav and similar elements; other text types
/// pass through after decoding. PDF and binary bodies give empty text and
/// the unsupported_content_type flag.
ExtractedText extract_text(std::string_view body, std::string_view content_type);

/// Visible text of an HTML document with whitespace collapsed.
std::string html_to_text(std::string_view html);

/// Replaces invalid UTF-8 with U+FFFD. Sets `lossy` when anything changed.
std::string to_valid_utf8(std::string_view bytes, bool& lossy);

}  // namespace citecheck
