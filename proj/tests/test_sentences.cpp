#include <doctest.h>

#include <string>
#include <vector>

#include "citecheck/sentences.hpp"

using namespace citecheck;

namespace {

std::vector<std::string> split(std::string_view text) {
    std::vector<std::string> out;
    for (Span s : segment_sentences(text)) out.emplace_back(text.substr(s.begin, s.size()));
    return out;
}

using Strings = std::vector<std::string>;

}  // namespace

TEST_CASE("plain sentence boundaries") {
    CHECK(split("One. Two! Three?") == Strings{"One.", "Two!", "Three?"});
    CHECK(split("No terminal punctuation") == Strings{"No terminal punctuation"});
    CHECK(split("") == Strings{});
    CHECK(split("   ") == Strings{});
    CHECK(split("lowercase. continues here.") == Strings{"lowercase. continues here."});
    CHECK(split("Wait... What?!") == Strings{"Wait...", "What?!"});
}

TEST_CASE("closers and trailing markers stay with their sentence") {
    CHECK(split("He said \"yes.\" Then left.") == Strings{"He said \"yes.\"", "Then left."});
    CHECK(split("Claim one. [1] Claim two.") == Strings{"Claim one. [1]", "Claim two."});
    CHECK(split("Claim one. [1][2] claim two.") == Strings{"Claim one. [1][2]", "claim two."});
    CHECK(split("Claim one.[^a] Next.") == Strings{"Claim one.[^a]", "Next."});
    CHECK(split("Claim (Smith) [2]. Next.") == Strings{"Claim (Smith) [2].", "Next."});
    CHECK(split("Claim. ([Src](https://a.com)) Next.") == Strings{"Claim. ([Src](https://a.com))", "Next."});
    CHECK(split("Claim. <https://a.com/x> Next.") == Strings{"Claim. <https://a.com/x>", "Next."});
}

TEST_CASE("abbreviations, initials and decimals do not split") {
    CHECK(split("Dr. Smith agreed. Others did not.") == Strings{"Dr. Smith agreed.", "Others did not."});
    CHECK(split("Growth was 3.5 percent. Then it fell.") ==
          Strings{"Growth was 3.5 percent.", "Then it fell."});
    CHECK(split("J. R. R. Tolkien wrote it. Fine.") == Strings{"J. R. R. Tolkien wrote it.", "Fine."});
    CHECK(split("See e.g. Table 2 for data. Done.") == Strings{"See e.g. Table 2 for data.", "Done."});
    CHECK(split("Items No. 5 and 6. Next one.") == Strings{"Items No. 5 and 6.", "Next one."});
    CHECK(split("The answer was no. Nobody asked.") == Strings{"The answer was no.", "Nobody asked."});
    CHECK(split("Smith et al. Found it.") == Strings{"Smith et al. Found it."});
}

TEST_CASE("citation syntax is atomic") {
    CHECK(split("See [a. B](https://x.com/a.B) now. Next.") ==
          Strings{"See [a. B](https://x.com/a.B) now.", "Next."});
    CHECK(split("Visit <https://x.com/A. B> ok.") .size() >= 1);
}

TEST_CASE("sentences start with digits, quotes, emphasis and non-ASCII") {
    CHECK(split("First. 2024 was big.") == Strings{"First.", "2024 was big."});
    CHECK(split("First. \"Quoted\" next.") == Strings{"First.", "\"Quoted\" next."});
    CHECK(split("First. **Bold** next.") == Strings{"First.", "**Bold** next."});
    CHECK(split("First. \xC3\x89tude next.") == Strings{"First.", "\xC3\x89tude next."});
}

TEST_CASE("spans are trimmed, disjoint and cover all non-whitespace") {
    std::string text = "  Alpha [1]. Beta fell.\n  Gamma (see [2]). Dr. Who?  ";
    auto spans = segment_sentences(text);
    REQUIRE_FALSE(spans.empty());
    std::vector<bool> covered(text.size(), false);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const Span s = spans[i];
        CHECK(s.begin < s.end);
        CHECK(text[s.begin] != ' ');
        CHECK(text[s.end - 1] != ' ');
        if (i > 0) CHECK(spans[i - 1].end <= s.begin);
        for (std::size_t k = s.begin; k < s.end; ++k) covered[k] = true;
    }
    for (std::size_t k = 0; k < text.size(); ++k)
        if (!std::isspace(static_cast<unsigned char>(text[k]))) CHECK(covered[k]);
}

TEST_CASE("abbreviation list") {
    CHECK(is_abbreviation("Dr"));
    CHECK(is_abbreviation("e.g"));
    CHECK_FALSE(is_abbreviation("dog"));
}
