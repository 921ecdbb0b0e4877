#include <doctest.h>

#include <string>
#include <vector>

#include "citecheck/attribution.hpp"
#include "citecheck/serialization.hpp"
#include "support/doc_gen.hpp"

using namespace citecheck;

namespace {

std::vector<std::string> texts(const AttributionDocument& d) {
    std::vector<std::string> out;
    for (const auto& a : d.attributions) out.push_back(a.text_nocite);
    return out;
}

using Ids = std::vector<int>;
using Strings = std::vector<std::string>;

}  // namespace

TEST_CASE("hand-traced document") {
    std::string md =
        "Alpha rose. Beta fell. [1]\n\nGamma grew [2]. Delta shrank.\n\nEpsilon held. [1-2]\n\n"
        "[1]: https://a.com\n[2]: https://b.com";
    auto doc = parse_document(md);
    REQUIRE(doc.citations.size() == 2);
    CHECK(doc.citations[0].url == "https://a.com/");
    CHECK(doc.citations[0].raw_labels == Strings{"1"});
    CHECK(doc.citations[1].url == "https://b.com/");

    CHECK(texts(doc) == Strings{"Alpha rose.", "Beta fell.", "Gamma grew.", "Epsilon held."});
    REQUIRE(doc.attributions.size() == 4);
    CHECK(doc.attributions[0].citation_ids == Ids{1});
    CHECK(doc.attributions[1].citation_ids == Ids{1});
    CHECK(doc.attributions[2].citation_ids == Ids{2});
    CHECK(doc.attributions[3].citation_ids == Ids{1, 2});
    CHECK(doc.attributions[0].passage_id == 1);
    CHECK(doc.attributions[2].passage_id == 2);
    CHECK(doc.attributions[3].passage_id == 3);
    for (int i = 0; i < 4; ++i) CHECK(doc.attributions[static_cast<std::size_t>(i)].id == i + 1);
    CHECK(doc.attributions[0].span == Span{0, 11});
    CHECK(doc.attributions[1].span == Span{12, 26});

    auto uncited = std::find_if(doc.diagnostics.begin(), doc.diagnostics.end(),
                                [](const Diagnostic& d) { return d.code == "uncited_sentences"; });
    REQUIRE(uncited != doc.diagnostics.end());
    CHECK(uncited->message.rfind("1 ", 0) == 0);
}

TEST_CASE("propagation stops at the previous cited sentence") {
    auto doc = parse_document("A one. B two [1]. C three. D four. [2]\n\n[1]: https://a.com\n[2]: https://b.com");
    CHECK(texts(doc) == Strings{"A one.", "B two.", "C three.", "D four."});
    CHECK(doc.attributions[0].citation_ids == Ids{1});
    CHECK(doc.attributions[1].citation_ids == Ids{1});
    CHECK(doc.attributions[2].citation_ids == Ids{2});
    CHECK(doc.attributions[3].citation_ids == Ids{2});
}

TEST_CASE("mid-sentence markers do not propagate") {
    auto doc = parse_document("Lead in. Claim [1] continues here.\n\n[1]: https://a.com");
    CHECK(texts(doc) == Strings{"Claim continues here."});
}

TEST_CASE("unresolved marker blocks propagation") {
    auto doc = parse_document("First. Second [9]. Third. [1]\n\n[1]: https://a.com");
    CHECK(texts(doc) == Strings{"Third."});
}

TEST_CASE("attribution is scoped to one passage") {
    auto doc = parse_document("Above.\n\n- Item text. [1]\n\n[1]: https://a.com");
    CHECK(texts(doc) == Strings{"Item text."});
    CHECK(doc.attributions[0].passage_id == 2);
}

TEST_CASE("text_nocite cleanup") {
    auto one = [](std::string md) {
        auto d = parse_document(md + "\n\n[1]: https://a.com\n[2]: https://b.com");
        REQUIRE(d.attributions.size() == 1);
        return d.attributions[0].text_nocite;
    };
    CHECK(one("Sales rose [1], [2].") == "Sales rose.");
    CHECK(one("Sales rose ([1]).") == "Sales rose.");
    CHECK(one("Per [Reuters](https://r.com/x), sales rose.") == "Per Reuters, sales rose.");
    CHECK(one("Sales rose ([source](https://r.com/x)).") == "Sales rose.");
    CHECK(one("Sales rose [[1]](https://r.com/x).") == "Sales rose.");
    CHECK(one("Sales   rose\nsharply. [1]") == "Sales rose sharply.");
    CHECK(one("Use `x[1]` here. [2]") == "Use `x[1]` here.");
    CHECK(one("> Quoted claim\n> goes on. [1]") == "Quoted claim goes on.");
}

TEST_CASE("marker-only sentence yields nothing") {
    auto doc = parse_document("[1]\n\n[1]: https://a.com");
    CHECK(doc.attributions.empty());
    CHECK(doc.citations.size() == 1);
}

TEST_CASE("text_nocite never re-parses to a marker") {
    citecheck::testing::DocGenerator gen(5);
    for (int i = 0; i < 100; ++i) {
        auto doc = parse_document(gen.next().markdown);
        for (const auto& a : doc.attributions) {
            auto again = parse_document(a.text_nocite + "\n\n[1]: https://a.com");
            CHECK(again.attributions.empty());
        }
    }
}

TEST_CASE("k uncited sentences before a cited one all inherit it") {
    for (int k = 0; k <= 5; ++k) {
        std::string md;
        for (int i = 0; i < k; ++i) md += "Plain claim " + std::to_string(i) + " here. ";
        md += "Cited claim. [3]\n\n[3]: https://c.org";
        auto doc = parse_document(md);
        REQUIRE(doc.attributions.size() == static_cast<std::size_t>(k + 1));
        for (const auto& a : doc.attributions) CHECK(a.citation_ids == Ids{1});
    }
}

TEST_CASE("parser agrees with the generation model") {
    citecheck::testing::DocGenerator gen(42);
    for (int i = 0; i < 200; ++i) {
        auto g = gen.next();
        auto doc = parse_document(g.markdown);
        INFO(g.markdown);
        std::vector<std::string> urls;
        for (const auto& c : doc.citations) urls.push_back(c.url);
        CHECK(urls == g.urls);
        REQUIRE(doc.attributions.size() == g.expected.size());
        for (std::size_t k = 0; k < g.expected.size(); ++k) {
            CHECK(doc.attributions[k].text_nocite == g.expected[k].text_nocite);
            CHECK(doc.attributions[k].span == g.expected[k].span);
            CHECK(doc.attributions[k].citation_ids == g.expected[k].citation_ids);
            CHECK(doc.attributions[k].passage_id == g.expected[k].passage_id);
        }
    }
}

TEST_CASE("document JSON round trip is byte stable") {
    citecheck::testing::DocGenerator gen(9);
    for (int i = 0; i < 50; ++i) {
        auto doc = parse_document(gen.next().markdown, "gen.md");
        std::string first = document_to_json(doc);
        auto back = document_from_json(first);
        CHECK(back == doc);
        CHECK(document_to_json(back) == first);
    }
}

TEST_CASE("document JSON rejects an unknown schema") {
    CHECK_THROWS(document_from_json("{\"schema\": 99}"));
    CHECK_THROWS(document_from_json("not json"));
}
