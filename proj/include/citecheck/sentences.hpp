#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "citecheck/types.hpp"

namespace citecheck {

/// Tokens that never end a sentence when followed by a period. Matching is
/// exact on the token preceding the period (leading brackets and quotes
/// stripped). Single capital letters are treated as initials separately.
inline constexpr std::array<std::string_view, 40> kAbbreviations = {
    "Dr",   "Mr",  "Mrs", "Ms",  "Prof", "Sr",  "Jr",  "St",   "Mt",  "Gen",
    "Gov",  "Sen", "Rep", "vs",  "Nos",  "e.g", "i.e", "cf",   "al",  "approx",
    "Fig",  "fig", "Figs", "Eq", "eq",   "Vol", "vol", "pp",  "Ch",   "Sec",
    "No",   "no",  "U.S", "U.K", "Inc",  "Ltd", "Co",  "Corp", "Jan", "Feb"};

bool is_abbreviation(std::string_view token) noexcept;

/// Splits one block's text into sentence spans (offsets relative to `text`).
/// A boundary is terminal punctuation (. ! ?) plus closing quotes/brackets,
/// followed by whitespace and an uppercase letter, digit, bracket, quote or
/// emphasis marker. Citation markers directly after the punctuation belong
/// to the sentence they follow; citation syntax is never split. Spans are
/// whitespace-trimmed, disjoint and cover every non-whitespace byte.
std::vector<Span> segment_sentences(std::string_view text);

}  // namespace citecheck
